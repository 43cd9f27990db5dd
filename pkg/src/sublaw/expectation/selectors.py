"""Scenario-selection strategies and the path simulator that drives them.

A selector looks at the history of the driver and names the scenario used
for the next coordinate. Every ``choose`` is vectorized: state arrays have
shape (rows, replications) and the result is an integer array of the same
shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from sublaw.expectation.laws import ScenarioSet

#: target number of float64 cells per simulated chunk
CHUNK_CELLS = 1 << 21


@dataclass
class PathState:
    k: int                    # coordinate about to be drawn (1-based)
    prev: np.ndarray          # value of coordinate k-1 (0 before the start)
    total: np.ndarray         # running sum of coordinates 1..k-1
    history: Optional[np.ndarray] = None   # (..., k-1) when some selector needs it


class Selector:
    """Base class. Subclasses set ``kind`` and implement ``choose``."""

    kind = "abstract"
    needs_history = False

    def choose(self, state: PathState, driver: ScenarioSet) -> np.ndarray:
        raise NotImplementedError

    def group_key(self):
        """Selectors with equal non-None keys are evaluated in one call."""
        return None

    @staticmethod
    def stack(selectors: Sequence["Selector"]) -> "Selector":
        return selectors[0]

    @property
    def id(self) -> str:
        return self.kind


@dataclass(frozen=True)
class ConstantSelector(Selector):
    index: int
    kind = "constant"

    def choose(self, state, driver):
        return np.full(state.total.shape, self.index, dtype=np.intp)

    def group_key(self):
        return ("constant", self.index)

    @property
    def id(self):
        return f"constant[{self.index}]"


@dataclass(frozen=True)
class TableSelector(Selector):
    """Explicit map from history prefixes to scenario indices.

    Keys are tuples of the driver values at ``key_coords`` that precede the
    current coordinate (all earlier coordinates when ``key_coords`` is None).
    ``by_coord`` optionally restricts the table to a per-coordinate dict;
    coordinates absent from it use ``default``.
    """

    by_coord: Mapping[int, Mapping[tuple, int]]
    key_coords: Optional[tuple[int, ...]] = None
    default: int = 0
    name: str = "table"
    kind = "table"
    needs_history = True

    def _key_positions(self, k):
        if self.key_coords is None:
            return list(range(k - 1))
        return [c - 1 for c in self.key_coords if c < k]

    def choose(self, state, driver):
        table = self.by_coord.get(state.k)
        out = np.full(state.total.shape, self.default, dtype=np.intp)
        if table is None:
            return out
        pos = self._key_positions(state.k)
        if not pos:
            out[...] = table[()]
            return out
        hist = state.history[..., pos].reshape(-1, len(pos))
        uniq, inverse = np.unique(hist, axis=0, return_inverse=True)
        picks = np.empty(len(uniq), dtype=np.intp)
        for i, row in enumerate(uniq):
            key = tuple(float(v) for v in row)
            if key not in table:
                raise KeyError(f"table selector {self.name!r} undefined at coordinate "
                               f"{state.k} for history {key}")
            picks[i] = table[key]
        return picks[inverse.reshape(-1)].reshape(out.shape)

    def is_total(self, driver: ScenarioSet, horizon: int) -> bool:
        """True when every reachable history up to ``horizon`` has an entry."""
        frontier = [()]
        for k in range(1, horizon + 1):
            table = self.by_coord.get(k)
            nxt = []
            for hist in frontier:
                if table is None:
                    idx = self.default
                else:
                    pos = self._key_positions(k)
                    key = tuple(hist[p] for p in pos)
                    if key not in table:
                        return False
                    idx = table[key]
                if not 0 <= idx < len(driver):
                    return False
                for v, _ in driver[idx].atoms:
                    nxt.append(hist + (v,))
            frontier = nxt
        return True

    @property
    def id(self):
        return self.name


@dataclass(frozen=True)
class RandomizedSelector(Selector):
    """Seeded pseudo-random rule of (k, previous value, running sum).

    index = floor(S * frac(a*prev + b*total + c*k + d)); the coefficients
    come from ``seed``. Acts as a random table on every history.
    """

    seed: int
    kind = "randomized"

    def _coefs(self):
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(0xA11CE,)))
        return rng.uniform(0.1, 1.0, size=4) * np.array([3.1, 1.7, 0.618, 1.0])

    def choose(self, state, driver):
        a, b, c, d = self._coefs()
        return self._rule(a, b, c, d, state, len(driver))

    @staticmethod
    def _rule(a, b, c, d, state, n_scen):
        z = a * state.prev + b * state.total + c * state.k + d
        idx = np.floor((z - np.floor(z)) * n_scen).astype(np.intp)
        return np.minimum(idx, n_scen - 1)

    def group_key(self):
        return ("randomized",)

    @staticmethod
    def stack(selectors):
        return _StackedRandomized(np.array([s._coefs() for s in selectors]))

    @property
    def id(self):
        return f"randomized[{self.seed}]"


@dataclass(frozen=True, eq=False)
class _StackedRandomized(Selector):
    coefs: np.ndarray   # (rows, 4)
    kind = "randomized"

    def choose(self, state, driver):
        a, b, c, d = (self.coefs[:, i:i + 1] for i in range(4))
        return RandomizedSelector._rule(a, b, c, d, state, len(driver))


GREEDY_OBJECTIVES = ("spread", "calm", "away", "toward")


@dataclass(frozen=True)
class GreedySelector(Selector):
    """One-step lookahead on the running sum s.

    Picks the scenario maximizing E_theta[phi(s + x)] for
      spread: phi = (s+x)^2      calm: phi = -(s+x)^2
      away:   phi = sign(s)(s+x) toward: phi = -sign(s)(s+x)
    """

    objective: str
    kind = "greedy"

    def __post_init__(self):
        if self.objective not in GREEDY_OBJECTIVES:
            raise ValueError(f"unknown greedy objective {self.objective!r}")

    def choose(self, state, driver):
        s = state.total[..., None]
        mu, m2 = driver.means, driver.second_moments
        if self.objective == "spread":
            score = 2 * s * mu + m2
        elif self.objective == "calm":
            score = -(2 * s * mu + m2)
        elif self.objective == "away":
            score = np.sign(s) * mu
        else:
            score = -np.sign(s) * mu
        return np.argmax(score, axis=-1)

    def group_key(self):
        return ("greedy", self.objective)

    @property
    def id(self):
        return f"greedy[{self.objective}]"


def default_pool(driver: ScenarioSet, size: int = 32, seed: int = 0) -> list[Selector]:
    """Constants, greedy lookaheads, then seeded randomized rules up to ``size``.

    A singleton family admits a single strategy, so the pool collapses to it.
    """
    if size < 1:
        raise ValueError("selector pool must be nonempty")
    if len(driver) == 1:
        return [ConstantSelector(0)]
    pool: list[Selector] = [ConstantSelector(i) for i in range(len(driver))]
    pool += [GreedySelector(o) for o in GREEDY_OBJECTIVES]
    pool = pool[:size]
    i = 0
    while len(pool) < size:
        pool.append(RandomizedSelector(int(np.random.SeedSequence(seed, spawn_key=(i,))
                                           .generate_state(1)[0])))
        i += 1
    return pool


def selector_stream(seed: int, row: int) -> np.random.Generator:
    """Independent stream for pool row ``row`` split off the root seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(row,))))


def chunk_width(rows: int, replications: int, n_coords: int) -> int:
    return int(max(1, min(n_coords, CHUNK_CELLS // max(1, rows * replications))))


def simulate_driver(driver: ScenarioSet, pool: Sequence[Selector], n_coords: int,
                    replications: int, seed: int,
                    chunk: Optional[int] = None) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_coord, values)`` blocks of driver paths.

    ``values`` has shape (len(pool), replications, width). Row p is driven
    by its own random stream, so results do not depend on which other
    selectors share the pool.
    """
    P, R = len(pool), replications
    width = chunk or chunk_width(P, R, n_coords)
    streams = [selector_stream(seed, p) for p in range(P)]

    static: dict[int, list[int]] = {}
    dynamic: dict = {}
    for p, sel in enumerate(pool):
        key = sel.group_key()
        if isinstance(sel, ConstantSelector):
            static.setdefault(sel.index, []).append(p)
        elif key is None:
            dynamic[("solo", p)] = [p]
        else:
            dynamic.setdefault(key, []).append(p)
    dyn_rows = np.array(sorted(r for rows in dynamic.values() for r in rows), dtype=np.intp)
    local = {int(r): i for i, r in enumerate(dyn_rows)}
    groups = [(np.array([local[r] for r in rows], dtype=np.intp),
               type(pool[rows[0]]).stack([pool[r] for r in rows]) if len(rows) > 1
               else pool[rows[0]]) for rows in dynamic.values()]
    need_hist = any(pool[r].needs_history for r in dyn_rows)

    prev = np.zeros((len(dyn_rows), R))
    total = np.zeros((len(dyn_rows), R))
    history = np.zeros((len(dyn_rows), R, n_coords)) if need_hist else None

    start = 1
    while start <= n_coords:
        C = min(width, n_coords - start + 1)
        uni = np.stack([s.random((R, C)) for s in streams])
        out = np.empty((P, R, C))
        for index, rows in static.items():
            out[rows] = driver.sample_fixed(index, uni[rows])
        if len(dyn_rows):
            for j in range(C):
                k = start + j
                idx = np.empty((len(dyn_rows), R), dtype=np.intp)
                for loc, sel in groups:
                    state = PathState(k, prev[loc], total[loc],
                                      None if history is None else history[loc, :, :k - 1])
                    idx[loc] = sel.choose(state, driver)
                vals = driver.sample(idx, uni[dyn_rows, :, j])
                out[dyn_rows, :, j] = vals
                prev = vals
                total = total + vals
                if history is not None:
                    history[:, :, k - 1] = vals
        yield start, out
        start += C


def simulate_paths(driver: ScenarioSet, pool: Sequence[Selector], n_coords: int,
                   replications: int, seed: int,
                   keep: Optional[Sequence[int]] = None) -> np.ndarray:
    """Materialize driver paths (P, R, len(keep)) for the listed coordinates."""
    keep = list(range(1, n_coords + 1)) if keep is None else list(keep)
    want = np.asarray(keep) - 1
    parts = []
    for first, block in simulate_driver(driver, pool, n_coords, replications, seed):
        lo = first - 1
        sel = want[(want >= lo) & (want < lo + block.shape[-1])]
        if len(sel):
            parts.append(block[..., sel - lo])
    return np.concatenate(parts, axis=-1)
