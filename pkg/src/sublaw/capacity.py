"""Capacities induced by scenario families, and Choquet integrals.

The implemented upper capacity is V(A) = sup_P P(A) over the admissible
laws, computed as the upper expectation of the indicator of A. It
satisfies E[f] <= V(A) <= E[g] whenever f <= 1_A <= g, which is all the
limit theorems need from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from sublaw.errors import NonMeasurableEvent, UnboundedSupport
from sublaw.expectation import (DEFAULT_CAP, MCPlan, RandomFunctional, ScenarioSet,
                                enumeration_grid, induct, simulate_paths,
                                upper_expectation_exact)

# ----------------------------------------------------------------------
# events
# ----------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.hi < self.lo:
            raise ValueError(f"empty interval bounds {self.lo} > {self.hi}")

    @property
    def is_empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: np.ndarray) -> np.ndarray:
        lo, hi = float(self.lo), float(self.hi)
        left = x >= lo if self.lo_closed else x > lo
        right = x <= hi if self.hi_closed else x < hi
        return left & right

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        if self.lo > other.lo or (self.lo == other.lo and not self.lo_closed):
            lo, lo_c = self.lo, self.lo_closed
        else:
            lo, lo_c = other.lo, other.lo_closed
        if self.hi < other.hi or (self.hi == other.hi and not self.hi_closed):
            hi, hi_c = self.hi, self.hi_closed
        else:
            hi, hi_c = other.hi, other.hi_closed
        if hi < lo:
            return None
        iv = Interval(lo, hi, lo_c, hi_c)
        return None if iv.is_empty else iv

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo},{self.hi}{']' if self.hi_closed else ')'}"


def _canonical(intervals: Sequence[Interval]) -> tuple[Interval, ...]:
    ivs = sorted(iv for iv in intervals if not iv.is_empty)
    out: list[Interval] = []
    for iv in ivs:
        if out:
            last = out[-1]
            touches = iv.lo < last.hi or (iv.lo == last.hi and (last.hi_closed or iv.lo_closed))
            if touches:
                if iv.hi > last.hi or (iv.hi == last.hi and iv.hi_closed):
                    out[-1] = Interval(last.lo, iv.hi, last.lo_closed,
                                       iv.hi_closed if iv.hi > last.hi else last.hi_closed or iv.hi_closed)
                continue
        out.append(iv)
    return tuple(out)


@dataclass(frozen=True)
class IntervalEvent:
    """{X_coordinate in union of intervals}; canonical: disjoint and sorted."""

    intervals: tuple[Interval, ...]
    coordinate: int = 1
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "intervals", _canonical(self.intervals))

    @classmethod
    def closed(cls, lo, hi, coordinate: int = 1) -> "IntervalEvent":
        return cls((Interval(lo, hi),), coordinate, f"[{lo},{hi}]")

    @classmethod
    def point(cls, x, coordinate: int = 1) -> "IntervalEvent":
        return cls((Interval(x, x),), coordinate, f"{{{x}}}")

    @classmethod
    def empty(cls, coordinate: int = 1) -> "IntervalEvent":
        return cls((), coordinate, "empty")

    def union(self, other: "IntervalEvent") -> "IntervalEvent":
        return IntervalEvent(self.intervals + other.intervals, self.coordinate)

    def intersect(self, other: "IntervalEvent") -> "IntervalEvent":
        parts = [a.intersect(b) for a in self.intervals for b in other.intervals]
        return IntervalEvent(tuple(p for p in parts if p is not None), self.coordinate)

    def complement(self, omega: Interval) -> "IntervalEvent":
        """Complement inside ``omega``."""
        pieces = []
        lo, lo_closed = omega.lo, omega.lo_closed
        for iv in self.intervals:
            gap = Interval(lo, max(lo, iv.lo), lo_closed, not iv.lo_closed) if iv.lo >= lo else None
            if gap is not None:
                g = gap.intersect(omega)
                if g is not None:
                    pieces.append(g)
            if iv.hi > lo or (iv.hi == lo and iv.hi_closed):
                lo, lo_closed = iv.hi, not iv.hi_closed
        tail = Interval(lo, max(lo, omega.hi), lo_closed, omega.hi_closed) if omega.hi >= lo else None
        if tail is not None:
            g = tail.intersect(omega)
            if g is not None:
                pieces.append(g)
        return IntervalEvent(tuple(pieces), self.coordinate, f"complement({self.description})")

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for iv in self.intervals:
            out |= iv.contains(x)
        return out

    def covers(self, other: "IntervalEvent", omega: Interval) -> bool:
        return not other.intersect(self.complement(omega)).intervals

    def indicator(self) -> RandomFunctional:
        return RandomFunctional((self.coordinate,), lambda x: self.contains(x[..., 0]).astype(float),
                                None, f"1{{X{self.coordinate} in {self}}}")

    def __str__(self):
        return " U ".join(str(iv) for iv in self.intervals) or "{}"


@dataclass(frozen=True, eq=False)
class PathEvent:
    """Event given by a 0/1 functional of the path."""

    indicator: RandomFunctional
    description: str = ""

    @classmethod
    def where(cls, f: RandomFunctional, op: str, t: float) -> "PathEvent":
        return cls(f.indicator(op, t), f"{f.label} {op} {t:g}")

    def complement(self) -> "PathEvent":
        return PathEvent(1.0 - self.indicator, f"not({self.description})")


Event = Union[IntervalEvent, PathEvent]

# stand-in for the real line when complementing events of discrete models
REAL_LINE = Interval(Fraction(-10**18), Fraction(10**18))

# ----------------------------------------------------------------------
# continuous regression model
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class UniformMixtureModel:
    """Finite family of normalized Lebesgue measures on subintervals of omega.

    Interval probabilities are exact rationals; endpoints carry no mass.
    """

    omega: Interval
    supports: tuple[Interval, ...]

    def __post_init__(self):
        for s in self.supports:
            if s.length <= 0:
                raise ValueError("each measure needs a support of positive length")
            if s.intersect(self.omega) != s:
                raise ValueError(f"support {s} not inside omega {self.omega}")

    def probability(self, i: int, event: IntervalEvent) -> Fraction:
        s = self.supports[i]
        mass = Fraction(0)
        for iv in event.intervals:
            part = iv.intersect(s)
            if part is not None:
                mass += part.length
        return mass / s.length


def counterexample_model() -> UniformMixtureModel:
    """Omega = [0,2] with the uniform laws on [0,1] and on [1,2]."""
    return UniformMixtureModel(Interval(0, 2), (Interval(0, 1), Interval(1, 2)))


ContinuousTwoMeasureModel = UniformMixtureModel

# ----------------------------------------------------------------------
# capacities
# ----------------------------------------------------------------------


def upper_capacity(model, event: Event, horizon: Optional[int] = None,
                   cap: int = DEFAULT_CAP) -> float:
    """V(A) = sup of the admissible probabilities of A."""
    if isinstance(model, UniformMixtureModel):
        if not isinstance(event, IntervalEvent):
            raise NonMeasurableEvent("continuous model only measures interval events")
        return float(max(model.probability(i, event) for i in range(len(model.supports))))
    if isinstance(model, ScenarioSet):
        if isinstance(event, IntervalEvent):
            return upper_expectation_exact(model, event.indicator(), horizon, cap)
        if isinstance(event, PathEvent):
            return upper_expectation_exact(model, event.indicator, horizon, cap)
    raise NonMeasurableEvent(f"cannot evaluate {type(event).__name__} under "
                             f"{type(model).__name__}")


def _complement(model, event: Event) -> Event:
    if isinstance(event, PathEvent):
        return event.complement()
    if isinstance(model, UniformMixtureModel):
        return event.complement(model.omega)
    return event.complement(REAL_LINE)


def lower_capacity(model, event: Event, horizon: Optional[int] = None) -> float:
    """v(A) = 1 - V(A^c)."""
    return 1.0 - upper_capacity(model, _complement(model, event), horizon)


def outer_capacity(model, event: Event, cover: Sequence[Event],
                   horizon: Optional[int] = None) -> float:
    """min(V(A), sum of V over a finite cover of A).

    For a finite family of countably additive laws sup_P P is already
    countably sub-additive, so this equals V(A); the cover term only
    matters as a check.
    """
    if not cover:
        raise ValueError("cover must be nonempty")
    if isinstance(model, UniformMixtureModel) and all(isinstance(c, IntervalEvent) for c in cover):
        union = cover[0]
        for c in cover[1:]:
            union = union.union(c)
        if not union.covers(event, model.omega):
            raise ValueError("cover does not contain the event")
    direct = upper_capacity(model, event, horizon)
    return min(direct, sum(upper_capacity(model, c, horizon) for c in cover))


# ----------------------------------------------------------------------
# survival functions
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepSurvival:
    """Exact t -> V(X >= t) of a finitely valued X.

    ``points`` are the values of X (increasing), ``levels[i] = V(X >= points[i])``.
    The function is 1 up to points[0], equals levels[i] on
    (points[i-1], points[i]], and 0 beyond the last point.
    """

    points: np.ndarray
    levels: np.ndarray

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.points, t, side="left")
        ext = np.append(self.levels, 0.0)
        return ext[i]

    def strict(self, t) -> np.ndarray:
        """t -> V(X > t)."""
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.points, t, side="right")
        return np.append(self.levels, 0.0)[i]

    def integrate(self, a: float, b: float) -> float:
        """Exact integral of V(X >= t) over [a, b] (finite a <= b)."""
        if b < a:
            raise ValueError("need a <= b")
        edges = np.concatenate(([-np.inf], self.points, [np.inf]))
        vals = np.concatenate(([1.0], self.levels[1:], [0.0]))
        lo = np.clip(edges[:-1], a, b)
        hi = np.clip(edges[1:], a, b)
        return float(np.sum(vals * (hi - lo)))

    @property
    def support(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])


@dataclass(frozen=True, eq=False)
class GridSurvival:
    """V(X >= t) sampled (or estimated) on an increasing grid."""

    t: np.ndarray
    levels: np.ndarray
    upper_tail: Optional[float] = None   # bound on the integral beyond t[-1]
    lower_tail: Optional[float] = None   # bound on the integral of 1 - V below t[0]

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if t.shape != lv.shape or t.ndim != 1:
            raise ValueError("grid and levels must be 1-d arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any((lv < 0) | (lv > 1)):
            raise ValueError("survival levels must lie in [0, 1]")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "levels", lv)


SurvivalFunction = Union[StepSurvival, GridSurvival]


@dataclass(frozen=True)
class Quadrature:
    value: float
    error_bound: float = 0.0


def survival_function(driver: ScenarioSet, f: RandomFunctional, horizon: Optional[int] = None,
                      cap: int = DEFAULT_CAP) -> StepSurvival:
    """Exact step survival t -> V(f >= t) under the scenario envelope."""
    if horizon is not None:
        f.check_horizon(horizon)
    grid = enumeration_grid(driver, len(f.coords), cap)
    values = f(grid)
    points = np.unique(values)
    n = len(f.coords)
    levels = np.empty(len(points))
    batch = max(1, int(5e7 // max(1, values.size)))
    for s in range(0, len(points), batch):
        ts = points[s:s + batch]
        ind = (values[None, ...] >= ts.reshape((-1,) + (1,) * values.ndim)).astype(float)
        v, _ = induct(ind, driver, n)
        levels[s:s + batch] = v
    return StepSurvival(points, np.minimum(levels, 1.0))


def sample_survival(step: StepSurvival, t: np.ndarray, convention: str = "mid") -> GridSurvival:
    """Sample an exact step survival on a grid.

    ``mid`` stores the average of the left and right limits at each grid
    point, which makes the trapezoid rule exact when every jump sits on a
    grid point; ``left`` stores V(X >= t) itself.
    """
    t = np.asarray(t, dtype=float)
    if convention == "left":
        lv = step(t)
    elif convention == "mid":
        lv = 0.5 * (step(t) + step.strict(t))
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return GridSurvival(t, lv)


def estimate_survival(driver: ScenarioSet, f: RandomFunctional, t: np.ndarray,
                      plan: MCPlan) -> GridSurvival:
    """Pool-max empirical frequencies of {f >= t}: a pointwise lower bound of V."""
    pool = plan.pool(driver)
    paths = simulate_paths(driver, pool, f.last, plan.replications, plan.seed, keep=f.coords)
    vals = f(paths)                                   # (P, R)
    t = np.asarray(t, dtype=float)
    freq = (vals[..., None] >= t).mean(axis=1)        # (P, T)
    return GridSurvival(t, freq.max(axis=0))


def survival_grid(lo: float, hi: float, n: int = 4096, geometric_fraction: float = 0.25) -> np.ndarray:
    """Grid spanning [lo, hi] and 0: geometric near 0, linear elsewhere."""
    if n < 16:
        raise ValueError("survival grids need at least 16 points")
    sides = []
    for end in (hi, -lo):
        if end <= 0:
            continue
        knee = end / 16
        n_side = n // (2 if lo < 0 < hi else 1)
        n_geo = max(2, int(n_side * geometric_fraction))
        geo = np.geomspace(knee * 1e-6, knee, n_geo, endpoint=False)
        lin = np.linspace(knee, end, n_side - n_geo)
        sides.append((end == hi, np.concatenate((geo, lin))))
    pts = [np.zeros(1)]
    for positive, side in sides:
        pts.append(side if positive else -side)
    return np.unique(np.concatenate(pts))


def linear_grid(lo: float, hi: float, intervals: int) -> np.ndarray:
    return np.unique(np.concatenate((np.linspace(lo, hi, intervals + 1), [0.0])))


def _trapezoid(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    h = np.diff(t)
    value = float(np.sum(h * (y[1:] + y[:-1]) / 2))
    error = float(np.sum(h * np.abs(np.diff(y)) / 2))
    return value, error


def choquet_integral(survival: SurvivalFunction,
                     negative_part: Optional[SurvivalFunction] = None) -> Quadrature:
    """C_V[X] = int_0^inf V(X>=t) dt + int_-inf^0 (V(X>=t) - 1) dt.

    Step survivals are integrated exactly. Grid survivals use the
    trapezoid rule; the error bound sum h_i |dV_i| / 2 is valid because V
    is monotone, plus any declared tail bounds. ``negative_part``, when
    given, supplies V on t <= 0 and ``survival`` is read on t >= 0 only.
    """
    if negative_part is not None:
        pos = _integrate_side(survival, positive=True)
        neg = _integrate_side(negative_part, positive=False)
        return Quadrature(pos.value + neg.value, pos.error_bound + neg.error_bound)
    if isinstance(survival, StepSurvival):
        p, lv = survival.points, survival.levels
        return Quadrature(float(p[0] + np.sum(lv[1:] * np.diff(p))), 0.0)
    pos = _integrate_side(survival, positive=True)
    neg = _integrate_side(survival, positive=False)
    return Quadrature(pos.value + neg.value, pos.error_bound + neg.error_bound)


def _integrate_side(s: SurvivalFunction, positive: bool) -> Quadrature:
    if isinstance(s, StepSurvival):
        lo, hi = s.support
        if positive:
            return Quadrature(s.integrate(0.0, max(hi, 0.0)))
        a = min(lo, 0.0)
        return Quadrature(s.integrate(a, 0.0) - (0.0 - a))
    t, v = s.t, s.levels
    if len(t) < 16:
        raise ValueError("grid survival needs at least 16 points")
    if t[0] < 0 < t[-1] and not np.any(t == 0.0):
        raise ValueError("grid straddling 0 must contain 0")
    if positive:
        mask = t >= 0
        value = error = 0.0
        if not mask.any():
            if v[-1] < 1.0:
                raise UnboundedSupport("grid ends below 0 before the survival reaches 1")
            raise UnboundedSupport("grid does not reach the positive half-line")
        tp, vp = t[mask], v[mask]
        if tp[0] > 0:
            if vp[0] < 1.0:
                raise UnboundedSupport("grid starts inside the support; add points down to 0")
            value += tp[0]
        if len(tp) > 1:
            val, err = _trapezoid(tp, vp)
            value += val
            error += err
        if vp[-1] > 0:
            if s.upper_tail is None:
                raise UnboundedSupport("survival has not vanished at the grid end; "
                                       "extend the grid or supply upper_tail")
            error += s.upper_tail
        return Quadrature(value, error)
    mask = t <= 0
    if not mask.any():
        return Quadrature(0.0, 0.0) if v[0] >= 1.0 else _unbounded_below(s)
    tn, vn = t[mask], v[mask]
    value, error = (0.0, 0.0)
    if len(tn) > 1:
        value, error = _trapezoid(tn, vn - 1.0)
    if vn[0] < 1.0:
        if s.lower_tail is None:
            return _unbounded_below(s)
        error += s.lower_tail
    return Quadrature(value, error)


def _unbounded_below(s):
    raise UnboundedSupport("survival is below 1 at the grid start; extend the grid "
                           "or supply lower_tail")


@dataclass(frozen=True)
class MomentResult:
    moment: float            # C_V[|f|^r]
    tail_integral: float     # int_1^inf V(|f| >= m) dm
    error_bound: float = 0.0


def choquet_moment(driver: ScenarioSet, f: RandomFunctional, r: float,
                   grid: Optional[np.ndarray] = None, horizon: Optional[int] = None) -> MomentResult:
    """C_V[|f|^r] together with the tail integral it dominates."""
    if r < 1:
        raise ValueError("moment order r must be >= 1")
    step = survival_function(driver, abs(f) ** r, horizon)
    if grid is None:
        q = choquet_integral(step)
    else:
        q = choquet_integral(sample_survival(step, grid))
    abs_step = survival_function(driver, abs(f), horizon)
    lo, hi = abs_step.support
    tail = abs_step.integrate(1.0, max(hi, 1.0))
    if q.value + q.error_bound < tail - 1e-12:
        raise ArithmeticError(f"moment {q.value} fell below its tail integral {tail}")
    return MomentResult(q.value, tail, q.error_bound)


def truncated_capacity_integral(driver: ScenarioSet, f: RandomFunctional, c: float,
                                horizon: Optional[int] = None) -> float:
    """int_0^c V(|f| > x) dx, exactly (equals the >= version off a null set)."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    step = survival_function(driver, abs(f), horizon)
    return step.integrate(0.0, c)
