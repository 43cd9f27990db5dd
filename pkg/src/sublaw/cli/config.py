"""YAML experiment configuration: loading, defaults and validation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from sublaw.errors import SublawError
from sublaw.sequences import GLUES, SCHEMES, WINDOW_FUNCTIONS

EXPERIMENTS = ("axioms", "capacity", "choquet", "maximal", "rademacher_mensov",
               "thm41", "thm42", "thm43", "cor41", "seq_lemma", "oracle")
MODEL_KINDS = ("independent", "m_dependent", "blockwise", "orthogonal")
PRESETS = ("signs", "unit_variance_pair", "two_point", "counterexample")
BLOCK_KINDS = ("powers_of_two", "unit", "cuts")
NORMALIZERS = ("linear", "power", "custom")
FORMATS = ("csv", "json")

_TOP_KEYS = {"experiment", "seed", "model", "normalizer", "r", "C", "Z", "f", "variance_growth",
             "plan", "band", "params", "output", "expect_exit", "description"}
_MODEL_KEYS = {"preset", "scenarios", "kind", "window", "m", "horizon", "blocks", "glue",
               "scheme", "scales"}
_PLAN_KEYS = {"replications", "pool_size", "checkpoints"}


class ConfigParseError(SublawError):
    def __init__(self, path, line, column, problem):
        super().__init__(f"{path}:{line}:{column}: {problem}")
        self.path, self.line, self.column, self.problem = path, line, column, problem


class ConfigValidationError(SublawError):
    def __init__(self, path, errors: list[str]):
        body = "\n".join(f"  {e}" for e in errors)
        super().__init__(f"{path}: {len(errors)} validation error(s)\n{body}")
        self.path, self.errors = path, list(errors)


@dataclass(frozen=True)
class ModelSpec:
    preset: Optional[str] = None
    scenarios: Optional[tuple] = None     # ((value, prob), ...) per scenario
    kind: str = "independent"
    window: str = "identity"
    m: int = 0
    horizon: int = 1
    blocks: Optional[dict] = None
    glue: str = "fresh_driver_per_block"
    scheme: str = "symmetric_signs"
    scales: Optional[dict] = None


@dataclass(frozen=True)
class PlanSpec:
    replications: int = 100
    pool_size: int = 32
    checkpoints: tuple[int, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    model: Optional[ModelSpec] = None
    normalizer: dict = field(default_factory=lambda: {"kind": "linear"})
    r: float = 1.0
    C: float = 1.0
    Z: Optional[ModelSpec] = None
    f: tuple[float, ...] = (1.0,)
    variance_growth: float = 0.0
    plan: PlanSpec = PlanSpec()
    band: Optional[float] = None
    params: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    output_format: str = "csv"
    expect_exit: int = 0
    description: str = ""
    source: str = ""

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _checkpoints(raw, errors, horizon) -> tuple[int, ...]:
    if raw is None:
        return ()
    if isinstance(raw, dict):
        lo, hi = raw.get("dyadic_from"), raw.get("dyadic_to")
        if not (_is_int(lo) and _is_int(hi)) or lo < 0 or hi < lo:
            errors.append("plan.checkpoints: dyadic_from/dyadic_to must be integers with "
                          "0 <= from <= to")
            return ()
        cps = tuple(2**k for k in range(lo, hi + 1))
    elif isinstance(raw, list) and all(_is_int(c) for c in raw):
        cps = tuple(raw)
    else:
        errors.append("plan.checkpoints: expected a list of integers or "
                      "{dyadic_from, dyadic_to}")
        return ()
    if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
        errors.append("plan.checkpoints: must be positive and strictly increasing")
    elif horizon and cps[-1] > horizon:
        errors.append(f"plan.checkpoints: last checkpoint {cps[-1]} exceeds horizon {horizon}")
    return cps


def _scenarios(raw, errors, where) -> Optional[tuple]:
    if raw is None:
        return None
    ok = isinstance(raw, list) and raw and all(
        isinstance(s, list) and s and all(isinstance(a, list) and len(a) == 2
                                          and all(_is_num(x) for x in a) for a in s)
        for s in raw)
    if not ok:
        errors.append(f"{where}.scenarios: expected a nonempty list of [[value, prob], ...] lists")
        return None
    for i, s in enumerate(raw):
        total = sum(p for _, p in s)
        if any(p < 0 for _, p in s) or abs(total - 1.0) > 1e-12:
            errors.append(f"{where}.scenarios[{i}]: probabilities must be >= 0 and sum to 1")
    return tuple(tuple((float(v), float(p)) for v, p in s) for s in raw)


def _model(raw, errors, where="model") -> Optional[ModelSpec]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        errors.append(f"{where}: expected a mapping")
        return None
    for k in sorted(set(raw) - _MODEL_KEYS):
        errors.append(f"{where}.{k}: unknown field")
    preset = raw.get("preset")
    if preset is not None and preset not in PRESETS:
        errors.append(f"{where}.preset: unknown preset {preset!r}; expected one of {PRESETS}")
    scen = _scenarios(raw.get("scenarios"), errors, where)
    if preset is not None and scen is not None:
        errors.append(f"{where}: give either preset or scenarios, not both")
    kind = raw.get("kind", "independent")
    haar = kind == "orthogonal" and raw.get("scheme") == "haar_like"
    if preset is None and scen is None and not haar:
        errors.append(f"{where}: one of preset or scenarios is required")
    if kind not in MODEL_KINDS:
        errors.append(f"{where}.kind: unknown kind {kind!r}; expected one of {MODEL_KINDS}")
    window = raw.get("window", "identity")
    if window not in WINDOW_FUNCTIONS:
        errors.append(f"{where}.window: unknown window {window!r}; "
                      f"expected one of {tuple(WINDOW_FUNCTIONS)}")
    m = raw.get("m", 0)
    if not _is_int(m) or m < 0:
        errors.append(f"{where}.m: must be a nonnegative integer")
    horizon = raw.get("horizon", 1)
    if not _is_int(horizon) or horizon < 1:
        errors.append(f"{where}.horizon: must be a positive integer")
    blocks = raw.get("blocks")
    if blocks is not None:
        if not isinstance(blocks, dict) or blocks.get("kind") not in BLOCK_KINDS:
            errors.append(f"{where}.blocks.kind: expected one of {BLOCK_KINDS}")
        elif blocks["kind"] == "cuts" and not (
                isinstance(blocks.get("cuts"), list) and all(_is_int(c) for c in blocks["cuts"])):
            errors.append(f"{where}.blocks.cuts: expected a list of integers")
    elif kind == "blockwise":
        errors.append(f"{where}.blocks: required for blockwise models")
    glue = raw.get("glue", "fresh_driver_per_block")
    if glue not in GLUES:
        errors.append(f"{where}.glue: expected one of {GLUES}")
    scheme = raw.get("scheme", "symmetric_signs")
    if scheme not in SCHEMES:
        errors.append(f"{where}.scheme: expected one of {SCHEMES}")
    scales = raw.get("scales")
    if scales is not None and not (isinstance(scales, dict) and scales.get("kind") == "power"
                                   and _is_num(scales.get("exponent"))):
        errors.append(f"{where}.scales: expected {{kind: power, exponent: <number>}}")
    return ModelSpec(preset, scen, kind, window, m if _is_int(m) else 0,
                     horizon if _is_int(horizon) else 1, blocks, glue, scheme, scales)


def _resolve_band(raw, errors) -> Optional[float]:
    if raw is None:
        return None
    if isinstance(raw, str) and raw.startswith("golden:"):
        from sublaw.slln import golden_bands
        bands = golden_bands()
        name = raw.split(":", 1)[1]
        if name not in bands:
            errors.append(f"band: no golden band named {name!r}")
            return None
        return float(bands[name]["band"])
    if not _is_num(raw) or raw <= 0:
        errors.append("band: expected a positive number or 'golden:<name>'")
        return None
    return float(raw)


def validate(data: Any, source: str = "<config>") -> ExperimentConfig:
    """Build a config from parsed YAML, reporting every problem at once."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigValidationError(source, ["top level: expected a mapping"])
    for k in sorted(set(data) - _TOP_KEYS):
        errors.append(f"{k}: unknown field")
    exp = data.get("experiment")
    if exp not in EXPERIMENTS:
        errors.append(f"experiment: expected one of {EXPERIMENTS}, got {exp!r}")
    seed = data.get("seed")
    if not _is_int(seed) or seed < 0:
        errors.append("seed: required nonnegative integer")
    model = _model(data.get("model"), errors)
    if exp in ("maximal", "rademacher_mensov", "thm41", "thm42", "thm43", "cor41", "oracle") \
            and model is None:
        errors.append(f"model: required for experiment {exp!r}")
    r = data.get("r", 1.0)
    if not _is_num(r) or not 1 <= r < 2:
        errors.append("r: r must lie in [1,2)")
    C = data.get("C", 1.0)
    if not _is_num(C) or C <= 0:
        errors.append("C: must be a positive number")
    Z = _model(data.get("Z"), errors, "Z")
    f = data.get("f", [1.0])
    if not (isinstance(f, list) and f and all(_is_num(v) and v >= 0 for v in f)):
        errors.append("f: expected a nonempty list of nonnegative numbers")
        f = [1.0]
    vg = data.get("variance_growth", 0.0)
    if not _is_num(vg) or vg >= 1:
        errors.append("variance_growth: expected a number below 1")
    norm = data.get("normalizer", {"kind": "linear"})
    if not isinstance(norm, dict) or norm.get("kind") not in NORMALIZERS:
        errors.append(f"normalizer.kind: expected one of {NORMALIZERS}")
        norm = {"kind": "linear"}
    elif norm["kind"] == "power" and not (_is_num(norm.get("exponent")) and norm["exponent"] > 0):
        errors.append("normalizer.exponent: must be a positive number")
    elif norm["kind"] == "custom" and not (isinstance(norm.get("values"), list)
                                           and all(_is_num(v) for v in norm["values"])):
        errors.append("normalizer.values: expected a list of numbers")
    plan_raw = data.get("plan", {}) or {}
    if not isinstance(plan_raw, dict):
        errors.append("plan: expected a mapping")
        plan_raw = {}
    for k in sorted(set(plan_raw) - _PLAN_KEYS):
        errors.append(f"plan.{k}: unknown field")
    reps = plan_raw.get("replications", 100)
    if not _is_int(reps) or reps < 2:
        errors.append("plan.replications: must be an integer >= 2")
    pool = plan_raw.get("pool_size", 32)
    if not _is_int(pool) or pool < 1:
        errors.append("plan.pool_size: must be a positive integer")
    cps = _checkpoints(plan_raw.get("checkpoints"), errors, model.horizon if model else None)
    if exp in ("thm41", "thm42", "thm43", "cor41") and not cps:
        errors.append(f"plan.checkpoints: required for experiment {exp!r}")
    band = _resolve_band(data.get("band"), errors)
    if exp in ("thm41", "thm42", "thm43", "cor41") and band is None and "band" not in data:
        errors.append(f"band: required for experiment {exp!r}")
    params = data.get("params", {}) or {}
    if not isinstance(params, dict):
        errors.append("params: expected a mapping")
        params = {}
    out = data.get("output", {}) or {}
    fmt = out.get("format", "csv") if isinstance(out, dict) else None
    if fmt not in FORMATS:
        errors.append(f"output.format: expected one of {FORMATS}")
    expect = data.get("expect_exit", 0)
    if expect not in (0, 2, 3):
        errors.append("expect_exit: expected 0, 2 or 3")
    if errors:
        raise ConfigValidationError(source, errors)
    return ExperimentConfig(
        experiment=exp, seed=seed, model=model, normalizer=dict(norm), r=float(r), C=float(C),
        Z=Z, f=tuple(float(v) for v in f), variance_growth=float(vg),
        plan=PlanSpec(reps, pool, cps), band=band, params=dict(params),
        output_path=out.get("path"), output_format=fmt, expect_exit=expect,
        description=str(data.get("description", "")), source=source)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (0, 0)
        raise ConfigParseError(source, line, col, exc.problem or str(exc)) from None
    except yaml.YAMLError as exc:
        raise ConfigParseError(source, 0, 0, str(exc)) from None
    return validate(data, source)


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file. OSError propagates for missing files."""
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))
