"""Dependence classes built over a Peng-independent driver.

Every model is a map from driver paths xi_1, xi_2, ... to the observed
sequence X_1..X_n. Independence, m-dependence and blockwise m-dependence
are obtained by construction from disjointness of driver windows, which
the envelope model turns into exact independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from sublaw.errors import (EnumerationCapExceeded, OutOfHorizon, SchemeUnavailable,
                           WindowMismatch)
from sublaw.expectation import (DEFAULT_CAP, DiscreteDistribution, RandomFunctional,
                                ScenarioSet, Selector, enumeration_grid, induct,
                                lower_expectation, simulate_driver, simulate_paths,
                                upper_expectation_exact)
from sublaw.expectation.selectors import CHUNK_CELLS

# ----------------------------------------------------------------------
# block structures
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class BlockStructure:
    """Cut points 1 = n_1 < n_2 < ...; block i is [n_i, n_{i+1}), 1-based.

    The last listed cut point opens a block that never ends. Cut points
    beyond ``horizon`` are kept so dyadic windows straddling the horizon
    are still described correctly.
    """

    cut_points: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.cut_points)
        if not cuts or cuts[0] != 1:
            raise ValueError("cut points must start at 1")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError("cut points must be strictly increasing")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        object.__setattr__(self, "cut_points", cuts)

    @classmethod
    def powers_of_two(cls, horizon: int) -> "BlockStructure":
        cuts, c = [], 1
        while c <= 2 * horizon + 1:
            cuts.append(c)
            c *= 2
        cuts.append(c)
        return cls(tuple(cuts), horizon)

    @classmethod
    def unit(cls, horizon: int) -> "BlockStructure":
        return cls(tuple(range(1, 2 * horizon + 3)), horizon)

    @classmethod
    def from_cuts(cls, cuts: Sequence[int], horizon: int) -> "BlockStructure":
        return cls(tuple(cuts), horizon)

    def block_of(self, n: int) -> int:
        """1-based index i of the block holding n."""
        return int(np.searchsorted(self.cut_points, n, side="right"))

    def bounds(self, i: int) -> tuple[int, float]:
        lo = self.cut_points[i - 1]
        hi = self.cut_points[i] if i < len(self.cut_points) else math.inf
        return lo, hi

    def blocks_in_horizon(self) -> list[tuple[int, int]]:
        """(first, length) of every block clipped to 1..horizon."""
        out = []
        for i in range(1, self.block_of(self.horizon) + 1):
            lo, hi = self.bounds(i)
            out.append((lo, int(min(hi, self.horizon + 1)) - lo))
        return out


@dataclass(frozen=True)
class DyadicBlockReport:
    k: int
    I_k: tuple[int, ...]
    v_k: int
    intervals: tuple[tuple[int, int], ...]             # [l, r) pieces of [2^k, 2^(k+1))
    intervals_in_horizon: tuple[tuple[int, int], ...]  # same, clipped to 1..horizon


def dyadic_blocks(blocks: BlockStructure, k: int) -> DyadicBlockReport:
    """Blocks meeting [2^k, 2^(k+1)) and the pieces they cut it into."""
    if k < 0 or 2**k > blocks.horizon:
        raise OutOfHorizon(f"2^{k} exceeds horizon {blocks.horizon}")
    lo, hi = 2**k, 2**(k + 1)
    first, last = blocks.block_of(lo), blocks.block_of(hi - 1)
    ids, pieces = [], []
    for i in range(first, last + 1):
        b_lo, b_hi = blocks.bounds(i)
        ids.append(i)
        pieces.append((max(lo, b_lo), int(min(hi, b_hi))))
    clipped = tuple((l, min(r, blocks.horizon + 1)) for l, r in pieces if l <= blocks.horizon)
    return DyadicBlockReport(k, tuple(ids), len(ids), tuple(pieces), clipped)


def phi(blocks: BlockStructure, n: int) -> int:
    """max of v_j over j = 0..floor(log2 n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    top = n.bit_length() - 1
    return max(dyadic_blocks(replace(blocks, horizon=max(blocks.horizon, n)), j).v_k
               for j in range(top + 1))


def phi_profile(blocks: BlockStructure, n: int) -> np.ndarray:
    """Phi(1..n) as an array, computed with one pass over dyadic levels."""
    b = replace(blocks, horizon=max(blocks.horizon, n))
    top = n.bit_length() - 1
    v = np.array([dyadic_blocks(b, j).v_k for j in range(top + 1)])
    run = np.maximum.accumulate(v)
    levels = np.repeat(np.arange(top + 1), [min(2**j, n + 1 - 2**j) for j in range(top + 1)])
    return run[levels]


# ----------------------------------------------------------------------
# coordinate maps
# ----------------------------------------------------------------------


class CoordinateMap:
    """Map from driver coordinates to X_1..X_horizon."""

    horizon: int
    driver_horizon: int

    def functional(self, k: int) -> RandomFunctional:
        raise NotImplementedError

    def law_key(self, k: int):
        """Equal keys promise equal marginal laws of X_k."""
        return ("k", k)

    def stream(self, driver: ScenarioSet, pool: Sequence[Selector], replications: int,
               seed: int) -> Iterator[tuple[int, np.ndarray]]:
        raise NotImplementedError


def _window_view(buf: np.ndarray, idx: np.ndarray, width: int) -> np.ndarray:
    return buf[..., idx[:, None] + np.arange(width)]


@dataclass(frozen=True, eq=False)
class SlidingMap(CoordinateMap):
    """X_k = scale_k * g(xi_{s_k}, ..., xi_{s_k + w - 1})."""

    template: RandomFunctional
    starts: np.ndarray
    scales: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.template.coords != tuple(range(1, len(self.template.coords) + 1)):
            raise WindowMismatch("window template must read coordinates 1..w")
        starts = np.asarray(self.starts, dtype=np.int64)
        if len(starts) == 0 or starts[0] < 1 or np.any(np.diff(starts) < 1):
            raise ValueError("window starts must be positive and strictly increasing")
        object.__setattr__(self, "starts", starts)
        if self.scales is not None:
            scales = np.asarray(self.scales, dtype=float)
            if scales.shape != starts.shape:
                raise ValueError("one scale per coordinate")
            object.__setattr__(self, "scales", scales)

    @property
    def width(self) -> int:
        return len(self.template.coords)

    @property
    def horizon(self) -> int:
        return len(self.starts)

    @property
    def driver_horizon(self) -> int:
        return int(self.starts[-1]) + self.width - 1

    def scale(self, k: int) -> float:
        return 1.0 if self.scales is None else float(self.scales[k - 1])

    def functional(self, k):
        f = self.template.shifted(int(self.starts[k - 1]) - 1)
        s = self.scale(k)
        f = f if s == 1.0 else f * s
        return RandomFunctional(f.coords, f.fn, f.lipschitz, f"X{k}")

    def law_key(self, k):
        return ("scale", self.scale(k))

    def stream(self, driver, pool, replications, seed):
        w, starts = self.width, self.starts
        ends = starts + w - 1
        P, R = len(pool), replications
        per_step = max(1, P * R * w)
        chunk = max(1, CHUNK_CELLS // per_step)
        buf = np.empty((P, R, 0))
        buf_first = 1
        next_k = 1
        for first, block in simulate_driver(driver, pool, self.driver_horizon, R, seed, chunk):
            buf = np.concatenate((buf, block), axis=-1)
            available = first + block.shape[-1] - 1
            k_hi = int(np.searchsorted(ends, available, side="right"))
            while next_k <= k_hi:
                top = min(k_hi, next_k + chunk - 1)
                idx = starts[next_k - 1:top] - buf_first
                vals = self.template(_window_view(buf, idx, w))
                if self.scales is not None:
                    vals = vals * self.scales[next_k - 1:top]
                yield next_k, vals
                next_k = top + 1
            if next_k > self.horizon:
                return
            cut = int(starts[next_k - 1]) - buf_first
            if cut > 0:
                buf = buf[..., cut:]
                buf_first += cut


@dataclass(frozen=True, eq=False)
class HaarMap(CoordinateMap):
    """Haar system on 2^v points driven by v fair sign bits.

    X_1 = 1; for k - 1 = 2^j + p (0 <= p < 2^j),
    X_k = 2^(j/2) * xi_{j+1} * 1{bits xi_1..xi_j spell p in binary}.
    """

    levels: int

    @property
    def horizon(self):
        return 2**self.levels

    @property
    def driver_horizon(self):
        return max(1, self.levels)

    @staticmethod
    def split(k: int) -> tuple[int, int]:
        j = (k - 1).bit_length() - 1
        return j, k - 1 - 2**j

    def functional(self, k):
        if k == 1:
            return RandomFunctional((1,), lambda x: np.ones(x.shape[:-1]), None, "X1")
        j, pos = self.split(k)
        weights = 2 ** np.arange(j - 1, -1, -1)
        amp = 2.0 ** (j / 2)

        def fn(x):
            code = ((x[..., :j] > 0).astype(np.int64) * weights).sum(axis=-1)
            return amp * x[..., j] * (code == pos)

        return RandomFunctional(tuple(range(1, j + 2)), fn, None, f"X{k}")

    def law_key(self, k):
        return ("level", self.split(k)[0] if k > 1 else -1)

    def stream(self, driver, pool, replications, seed):
        P, R = len(pool), replications
        bits = simulate_paths(driver, pool, self.driver_horizon, R, seed)
        b = (bits > 0).astype(np.int64)
        codes = np.zeros((P, R, self.levels + 1), dtype=np.int64)
        for j in range(1, self.levels + 1):
            codes[..., j] = 2 * codes[..., j - 1] + b[..., j - 1]
        chunk = max(1, CHUNK_CELLS // max(1, P * R))
        for first in range(1, self.horizon + 1, chunk):
            ks = np.arange(first, min(self.horizon, first + chunk - 1) + 1)
            out = np.empty((P, R, len(ks)))
            for i, k in enumerate(ks):
                if k == 1:
                    out[..., i] = 1.0
                    continue
                j, pos = self.split(int(k))
                out[..., i] = 2.0 ** (j / 2) * bits[..., j] * (codes[..., j] == pos)
            yield first, out


# ----------------------------------------------------------------------
# models
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PairCheck:
    i: int
    j: int
    upper: float       # E^[X_i X_j]
    lower: float       # lower expectation of X_i X_j
    bound: float

    @property
    def violation(self) -> float:
        return abs(self.upper) - self.bound


@dataclass(frozen=True)
class OrthogonalityCertificate:
    pairs: tuple[PairCheck, ...]
    f: tuple[float, ...]
    strict: bool            # orthogonal: lower expectations must vanish as well

    @property
    def max_violation(self) -> float:
        if not self.pairs:
            return 0.0
        worst = max(p.violation for p in self.pairs)
        if self.strict:
            worst = max(worst, max(abs(p.lower) - p.bound for p in self.pairs))
        return float(worst)

    def passes(self, tol: float = 1e-12) -> bool:
        return self.max_violation <= tol

    @property
    def inflation(self) -> float:
        """1 + 2 * sum_{j>=1} f(j)."""
        return 1.0 + 2.0 * math.fsum(self.f[1:])


@dataclass(frozen=True, eq=False)
class SequenceModel:
    driver: ScenarioSet
    cmap: CoordinateMap
    m: int
    kind: str
    blocks: Optional[BlockStructure] = None
    certificate: Optional[OrthogonalityCertificate] = None
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def horizon(self) -> int:
        return self.cmap.horizon

    @property
    def driver_horizon(self) -> int:
        return self.cmap.driver_horizon

    def X(self, k: int) -> RandomFunctional:
        if not 1 <= k <= self.horizon:
            raise OutOfHorizon(f"coordinate {k} outside 1..{self.horizon}")
        return self.cmap.functional(k)

    def vector(self, ks: Sequence[int]) -> tuple[tuple[int, ...], Callable]:
        """Union driver coordinates of X_k, k in ks, and a map to their values."""
        fs = [self.X(k) for k in ks]
        coords = tuple(sorted(set().union(*(f.coords for f in fs))))
        pos = [[coords.index(c) for c in f.coords] for f in fs]

        def fn(x):
            return np.stack([f(x[..., p]) for f, p in zip(fs, pos)], axis=-1)

        return coords, fn

    def combination(self, ks: Sequence[int], weights: Optional[Sequence[float]] = None,
                    label: str = "") -> RandomFunctional:
        coords, vec = self.vector(ks)
        w = np.ones(len(ks)) if weights is None else np.asarray(weights, dtype=float)
        return RandomFunctional(coords, lambda x: vec(x) @ w, None, label or "sum")

    def partial_sum(self, n: int) -> RandomFunctional:
        return self.combination(range(1, n + 1), label=f"S{n}")

    def product(self, i: int, j: int) -> RandomFunctional:
        coords, vec = self.vector([i, j])
        return RandomFunctional(coords, lambda x: vec(x).prod(axis=-1), None, f"X{i}X{j}")

    def _marginal(self, k: int, what: str) -> float:
        key = (what, self.cmap.law_key(k))
        if key not in self._cache:
            x = self.X(k)
            if what == "upper":
                self._cache[key] = upper_expectation_exact(self.driver, x)
            elif what == "lower":
                self._cache[key] = lower_expectation(self.driver, x)
            elif what == "square":
                self._cache[key] = upper_expectation_exact(self.driver, x * x)
            elif what == "bound":
                grid = enumeration_grid(self.driver, len(x.coords))
                self._cache[key] = float(np.abs(x(grid)).max())
        return self._cache[key]

    def upper_mean(self, k: int) -> float:
        return self._marginal(k, "upper")

    def lower_mean(self, k: int) -> float:
        return self._marginal(k, "lower")

    def second_moment(self, k: int) -> float:
        return self._marginal(k, "square")

    def bound(self, k: int) -> float:
        """sup |X_k| over the support."""
        return self._marginal(k, "bound")

    def upper_means(self, n: Optional[int] = None) -> np.ndarray:
        return np.array([self.upper_mean(k) for k in range(1, (n or self.horizon) + 1)])

    def lower_means(self, n: Optional[int] = None) -> np.ndarray:
        return np.array([self.lower_mean(k) for k in range(1, (n or self.horizon) + 1)])

    def second_moments(self, n: Optional[int] = None) -> np.ndarray:
        return np.array([self.second_moment(k) for k in range(1, (n or self.horizon) + 1)])

    def sup_bound(self) -> float:
        return max(self.bound(k) for k in range(1, self.horizon + 1))

    def simulate(self, pool: Sequence[Selector], replications: int,
                 seed: int) -> Iterator[tuple[int, np.ndarray]]:
        """Yield (first k, X values of shape (P, R, C)) in increasing k."""
        return self.cmap.stream(self.driver, pool, replications, seed)

    def simulate_sums(self, pool: Sequence[Selector], replications: int, seed: int,
                      n: Optional[int] = None) -> Iterator[tuple[int, np.ndarray]]:
        """Yield (first k, partial sums S_k of shape (P, R, C)) up to ``n``."""
        n = n or self.horizon
        carry = None
        for first, block in self.simulate(pool, replications, seed):
            if first > n:
                return
            block = block[..., :n - first + 1]
            sums = np.cumsum(block, axis=-1)
            if carry is not None:
                sums += carry[..., None]
            carry = sums[..., -1]
            yield first, sums

    def paths(self, pool: Sequence[Selector], replications: int, seed: int) -> np.ndarray:
        return np.concatenate([b for _, b in self.simulate(pool, replications, seed)], axis=-1)

    def with_certificate(self, cert: OrthogonalityCertificate) -> "SequenceModel":
        return replace(self, certificate=cert, _cache=self._cache)

    def is_enumerable(self, cap: int = DEFAULT_CAP) -> bool:
        return len(self.driver.support) ** self.driver_horizon <= cap


# ----------------------------------------------------------------------
# window functions
# ----------------------------------------------------------------------


def window_function(name: str, m: int) -> RandomFunctional:
    """Named window templates on m+1 driver coordinates."""
    w = m + 1
    if name == "identity":
        if m != 0:
            raise WindowMismatch("identity window has width 1")
        return RandomFunctional.template(lambda x: x[..., 0], 1, "id")
    if name == "average":
        return RandomFunctional.template(lambda x: x.mean(axis=-1), w, "avg")
    if name == "normalized_sum":
        return RandomFunctional.template(lambda x: x.sum(axis=-1) / math.sqrt(w), w, "nsum")
    if name == "sum":
        return RandomFunctional.template(lambda x: x.sum(axis=-1), w, "sum")
    if name == "product":
        return RandomFunctional.template(lambda x: x.prod(axis=-1), w, "prod")
    if name == "difference":
        if m < 1:
            raise WindowMismatch("difference window needs m >= 1")
        return RandomFunctional.template(lambda x: x[..., -1] - x[..., 0], w, "diff")
    raise KeyError(f"unknown window function {name!r}")


WINDOW_FUNCTIONS = ("identity", "average", "normalized_sum", "sum", "product", "difference")


# ----------------------------------------------------------------------
# constructors
# ----------------------------------------------------------------------


def _check_template(g: RandomFunctional, m: int):
    if m < 0:
        raise ValueError("m must be >= 0")
    if len(g.coords) != m + 1:
        raise WindowMismatch(f"window of width {len(g.coords)} does not match m + 1 = {m + 1}")


def make_independent_sequence(theta: ScenarioSet, horizon: int,
                              scales: Optional[Sequence[float]] = None) -> SequenceModel:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    cmap = SlidingMap(window_function("identity", 0), np.arange(1, horizon + 1), scales)
    return SequenceModel(theta, cmap, 0, "independent", description="independent")


def make_m_dependent(theta: ScenarioSet, g: RandomFunctional, m: int, horizon: int,
                     scales: Optional[Sequence[float]] = None) -> SequenceModel:
    """Y_n = g(xi_n, ..., xi_{n+m})."""
    _check_template(g, m)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    cmap = SlidingMap(g, np.arange(1, horizon + 1), scales)
    return SequenceModel(theta, cmap, m, "m_dependent", description=f"{m}-dependent {g.label}")


GLUES = ("fresh_driver_per_block", "shared_boundary")


def make_blockwise_m_dependent(blocks: BlockStructure, theta: ScenarioSet, g: RandomFunctional,
                               m: int, glue: str = "fresh_driver_per_block") -> SequenceModel:
    """Sliding windows inside each block; blocks use consecutive driver stretches.

    ``fresh_driver_per_block`` leaves blocks on disjoint stretches;
    ``shared_boundary`` lets adjacent stretches share one driver coordinate.
    """
    _check_template(g, m)
    if glue not in GLUES:
        raise ValueError(f"glue must be one of {GLUES}")
    starts = []
    offset = 1
    for _, length in blocks.blocks_in_horizon():
        starts.extend(range(offset, offset + length))
        offset += length + m
        if glue == "shared_boundary":
            offset -= 1
    cmap = SlidingMap(g, np.array(starts))
    return SequenceModel(theta, cmap, m, "blockwise", blocks,
                         description=f"blockwise {m}-dependent {g.label} ({glue})")


def unit_variance_pair() -> ScenarioSet:
    """Two sign-symmetric laws with variance 1 and different shapes."""
    r2 = math.sqrt(2.0)
    return ScenarioSet.of(DiscreteDistribution.uniform([-1.0, 1.0]),
                          DiscreteDistribution(((-r2, 0.25), (0.0, 0.5), (r2, 0.25))))


def signs() -> ScenarioSet:
    return ScenarioSet.of(DiscreteDistribution.uniform([-1.0, 1.0]))


def _is_symmetric(d: DiscreteDistribution) -> bool:
    atoms = dict(d.atoms)
    return all(abs(atoms.get(-v, -1.0) - p) <= 1e-12 for v, p in d.atoms)


SCHEMES = ("symmetric_signs", "haar_like")


def make_orthogonal(horizon: int, scheme: str = "symmetric_signs",
                    theta: Optional[ScenarioSet] = None,
                    scales: Optional[Sequence[float]] = None,
                    pair_cap: Optional[int] = 256) -> SequenceModel:
    """Orthogonal sequence with an attached exact certificate.

    symmetric_signs: X_k = scale_k * xi_k with every scenario sign-symmetric,
    so each selector gives E[X_i X_j] = 0 for i != j.
    haar_like: Haar functions of fair bits; needs a power-of-two horizon.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    if scheme == "symmetric_signs":
        theta = theta or signs()
        if not all(_is_symmetric(d) for d in theta.scenarios):
            raise ValueError("symmetric_signs needs sign-symmetric scenarios")
        model = make_independent_sequence(theta, horizon, scales)
        model = replace(model, kind="orthogonal", description="symmetric signs")
    elif scheme == "haar_like":
        if horizon & (horizon - 1):
            raise SchemeUnavailable(f"haar_like needs a power-of-two horizon, got {horizon}")
        if theta is not None or scales is not None:
            raise SchemeUnavailable("haar_like uses its own fair-bit driver")
        model = SequenceModel(signs(), HaarMap(horizon.bit_length() - 1), 0, "orthogonal",
                              description="haar")
    else:
        raise SchemeUnavailable(f"unknown orthogonal scheme {scheme!r}")
    return model.with_certificate(orthogonality_certificate(model, pair_cap))


# ----------------------------------------------------------------------
# certificates
# ----------------------------------------------------------------------


def _pairs_in_prefix(n: int, cap: Optional[int], diagonal: bool) -> Iterator[tuple[int, int]]:
    """All pairs i <= j of a growing prefix, ordered by j, until ``cap`` pairs."""
    count = 0
    for j in range(1, n + 1):
        for i in range(j if diagonal else j - 1, 0, -1):
            if cap is not None and count >= cap:
                return
            yield i, j
            count += 1


def _pair_check(model: SequenceModel, i: int, j: int, f: Sequence[float],
                cap: int) -> PairCheck:
    prod = model.product(i, j)
    up = upper_expectation_exact(model.driver, prod, cap=cap)
    lo = -upper_expectation_exact(model.driver, -prod, cap=cap)
    lag = j - i
    weight = f[lag] if lag < len(f) else 0.0
    bound = math.sqrt(model.second_moment(i)) * math.sqrt(model.second_moment(j)) * weight
    return PairCheck(i, j, up, lo, bound)


def quasi_orthogonal_certificate(model: SequenceModel, f: Sequence[float],
                                 pair_cap: Optional[int] = 256,
                                 cap: int = DEFAULT_CAP) -> OrthogonalityCertificate:
    """Check |E^[X_k X_l]| <= sqrt(E^[X_k^2] E^[X_l^2]) f(|k-l|) exactly.

    Every pair inside a growing prefix is checked (diagonal included)
    until ``pair_cap`` is reached; f is zero beyond the supplied prefix.
    Violations are reported, never raised.
    """
    f = tuple(float(v) for v in f)
    if any(v < 0 for v in f):
        raise ValueError("f must be nonnegative")
    pairs = tuple(_pair_check(model, i, j, f, cap)
                  for i, j in _pairs_in_prefix(model.horizon, pair_cap, diagonal=True))
    return OrthogonalityCertificate(pairs, f, strict=False)


def orthogonality_certificate(model: SequenceModel, pair_cap: Optional[int] = 256,
                              cap: int = DEFAULT_CAP) -> OrthogonalityCertificate:
    """Both E^[X_i X_j] and its lower counterpart vanish for i != j."""
    pairs = tuple(_pair_check(model, i, j, (0.0,), cap)
                  for i, j in _pairs_in_prefix(model.horizon, pair_cap, diagonal=False))
    return OrthogonalityCertificate(pairs, (1.0,), strict=True)


@dataclass(frozen=True)
class IndependenceCheck:
    direct: float      # E^[phi(past, future)]
    iterated: float    # E^[E^[phi(x, future)] at x = past]

    @property
    def gap(self) -> float:
        return abs(self.direct - self.iterated)


def independence_certificate(model: SequenceModel, past: Sequence[int], future: Sequence[int],
                             phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
                             cap: int = DEFAULT_CAP) -> IndependenceCheck:
    """Compare both sides of the iterated-expectation identity exactly.

    The inner expectation runs over an independent copy of the future
    block, so overlapping driver windows show up as a gap.
    """
    p_coords, p_vec = model.vector(past)
    f_coords, f_vec = model.vector(future)
    u = len(model.driver.support)
    if u ** (len(p_coords) + len(f_coords)) > cap:
        raise EnumerationCapExceeded(u ** (len(p_coords) + len(f_coords)), cap)
    np_, nf = len(p_coords), len(f_coords)
    pg = enumeration_grid(model.driver, np_, cap)
    fg = enumeration_grid(model.driver, nf, cap)
    xs = p_vec(pg)[(...,) + (None,) * nf + (slice(None),)]
    ys = f_vec(fg)[(None,) * np_]
    inner, _ = induct(phi(xs, ys), model.driver, nf)
    iterated, _ = induct(inner, model.driver, np_)

    coords = tuple(sorted(set(p_coords) | set(f_coords)))
    grid = enumeration_grid(model.driver, len(coords), cap)
    xd = p_vec(grid[..., [coords.index(c) for c in p_coords]])
    yd = f_vec(grid[..., [coords.index(c) for c in f_coords]])
    direct, _ = induct(phi(xd, yd), model.driver, len(coords))
    return IndependenceCheck(float(direct), float(iterated))
