"""Report rows and their byte-stable CSV / JSON encodings."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Iterable, Sequence

COLUMNS = ("experiment", "n", "statistic", "value", "ci_low", "ci_high", "bound", "pass",
           "seed", "selector_id")
# informational rows carry the largest finite double as their bound
NO_BOUND = sys.float_info.max


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    n: int
    statistic: str
    value: float
    ci_low: float
    ci_high: float
    bound: float
    seed: int
    selector_id: str = ""

    def __post_init__(self):
        for name in ("value", "ci_low", "ci_high", "bound"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def point(cls, experiment: str, n: int, statistic: str, value: float, bound: float = NO_BOUND,
              seed: int = 0, selector_id: str = "") -> "ReportRow":
        """A row whose interval is the value itself."""
        bound = NO_BOUND if not math.isfinite(bound) else bound
        return cls(experiment, n, statistic, value, value, value, bound, seed, selector_id)

    @property
    def passed(self) -> bool:
        return self.value <= self.bound

    def as_strings(self) -> list[str]:
        return [self.experiment, str(self.n), self.statistic, fmt(self.value), fmt(self.ci_low),
                fmt(self.ci_high), fmt(self.bound), "true" if self.passed else "false",
                str(self.seed), self.selector_id]

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "n": self.n, "statistic": self.statistic,
                "value": self.value, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "bound": self.bound, "pass": self.passed, "seed": self.seed,
                "selector_id": self.selector_id}


def to_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.as_strings())
    return buf.getvalue()


def to_json(rows: Sequence[ReportRow]) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps([r.as_dict() for r in rows], indent=1) + "\n"


def emit(rows: Sequence[ReportRow], fmt_name: str = "csv") -> str:
    if not rows:
        raise ValueError("nothing to emit")
    if fmt_name == "csv":
        return to_csv(rows)
    if fmt_name == "json":
        return to_json(rows)
    raise ValueError(f"unknown format {fmt_name!r}")


def _row(d: dict) -> ReportRow:
    row = ReportRow(d["experiment"], int(d["n"]), d["statistic"], float(d["value"]),
                    float(d["ci_low"]), float(d["ci_high"]), float(d["bound"]), int(d["seed"]),
                    d["selector_id"])
    flag = d["pass"]
    flag = flag if isinstance(flag, bool) else flag == "true"
    if flag != row.passed:
        raise ValueError(f"pass flag of {row.statistic} disagrees with value and bound")
    return row


def parse(text: str, fmt_name: str = "csv") -> list[ReportRow]:
    if fmt_name == "json":
        return [_row(d) for d in json.loads(text)]
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    return [_row(d) for d in reader]


def all_pass(rows: Iterable[ReportRow]) -> bool:
    return all(r.passed for r in rows)
