"""Numerical checks of the truncation, maximal and Rademacher-Mensov inequalities.

Capacities on the left-hand sides are estimated as the maximum over a
finite selector pool of empirical frequencies. Each selector realizes an
admissible law, so these are lower bounds: a reported violation is a real
one, up to sampling error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from sublaw.capacity import survival_function
from sublaw.errors import CenteringUnavailable, MissingCertificate
from sublaw.expectation import (DEFAULT_CAP, MCPlan, RandomFunctional, ScenarioSet,
                                enumeration_grid, induct, simulate_paths,
                                upper_expectations_exact)
from sublaw.expectation.montecarlo import Z_95
from sublaw.sequences import SequenceModel

EXACT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InequalityReport:
    statistic: str
    x_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    constant_used: float
    kind: str                              # "exact" or "lower_bound_mc"
    n: int = 0
    tolerance: float = 0.0
    ci_high: Optional[np.ndarray] = None   # upper end of the lhs interval (MC only)
    selector_ids: tuple[str, ...] = ()
    seed: int = 0

    @property
    def passed(self) -> np.ndarray:
        return self.lhs <= self.rhs + self.tolerance

    @property
    def all_pass(self) -> bool:
        return bool(np.all(self.passed))

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.rhs > 0, self.lhs / self.rhs,
                            np.where(self.lhs > 0, np.inf, 0.0))


def _driver_of(model) -> ScenarioSet:
    return model.driver if isinstance(model, SequenceModel) else model


# ----------------------------------------------------------------------
# truncation bound
# ----------------------------------------------------------------------


def verify_truncation_bound(model, f: RandomFunctional, c_grid: Sequence[float],
                            plan: Optional[MCPlan] = None,
                            cap: int = DEFAULT_CAP) -> InequalityReport:
    """E^[|f| ^ c] <= int_0^c V(|f| > x) dx on every c in the grid.

    Exact on enumerable instances. Otherwise both sides are computed from
    the same simulated paths: lhs is the pool maximum of empirical means
    and rhs a left-endpoint Riemann sum of the pool maximum of empirical
    exceedance frequencies, which can only overshoot the integral.
    """
    driver = _driver_of(model)
    c = np.asarray(c_grid, dtype=float)
    if np.any(c < 0) or np.any(np.diff(c) <= 0):
        raise ValueError("c grid must be nonnegative and increasing")
    absf = abs(f)
    u = len(driver.support)
    if u ** len(f.coords) <= cap:
        lhs = upper_expectations_exact(driver, [absf.map(lambda v, cc=cc: np.minimum(v, cc))
                                                for cc in c], cap)
        step = survival_function(driver, absf, cap=cap)
        rhs = np.array([step.integrate(0.0, cc) for cc in c])
        return InequalityReport("truncation", c, lhs, rhs, 1.0, "exact", tolerance=EXACT_TOL)
    if plan is None:
        raise ValueError("instance is not enumerable and no sampling plan was given")
    pool = plan.pool(driver)
    vals = absf(simulate_paths(driver, pool, f.last, plan.replications, plan.seed,
                               keep=f.coords))                      # (P, R)
    R = vals.shape[1]
    lhs, hi, ids, rhs = [], [], [], []
    for cc in c:
        clipped = np.minimum(vals, cc)
        means = clipped.mean(axis=1)
        b = int(np.argmax(means))
        lhs.append(means[b])
        hi.append(means[b] + Z_95 * clipped[b].std(ddof=1) / math.sqrt(R))
        ids.append(pool[b].id)
        x = np.linspace(0.0, cc, 4097)[:-1]
        h = cc / 4096
        freq = (vals[..., None] > x).mean(axis=1).max(axis=0)
        rhs.append(float(h * freq.sum()))
    return InequalityReport("truncation", c, np.array(lhs), np.array(rhs), 1.0,
                            "lower_bound_mc", ci_high=np.array(hi), selector_ids=tuple(ids),
                            seed=plan.seed)


# ----------------------------------------------------------------------
# maximal statistics
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MaximalStatistic:
    values: np.ndarray           # (P, R): max_{k<=n} (S_k - centering_k)
    n: int
    centering: str
    selector_ids: tuple[str, ...]


def partial_sum_centering(model: SequenceModel, n: int, centering: str,
                          cap: int = DEFAULT_CAP) -> np.ndarray:
    """E^[S_k] (upper) or its lower counterpart for k = 1..n.

    Additive when every X_k has E^ = lower expectation (or the model is
    independent); the exact oracle is used otherwise.
    """
    if centering == "none":
        return np.zeros(n)
    if centering not in ("upper", "lower"):
        raise ValueError(f"unknown centering {centering!r}")
    up, lo = model.upper_means(n), model.lower_means(n)
    certain = np.all(np.abs(up - lo) <= EXACT_TOL)
    if certain or model.kind == "independent":
        return np.cumsum(up if centering == "upper" else lo)
    if not model.is_enumerable(cap):
        raise CenteringUnavailable(
            "partial-sum expectations of a dependent, mean-uncertain model need the "
            "exact oracle, which exceeds the enumeration cap")
    sign = 1.0 if centering == "upper" else -1.0
    coords, vec = model.vector(range(1, n + 1))
    grid = enumeration_grid(model.driver, len(coords), cap)
    sums = np.cumsum(vec(grid), axis=-1)                 # (u,)*d + (n,)
    batch = np.moveaxis(sign * sums, -1, 0)
    v, _ = induct(batch, model.driver, len(coords))
    return sign * np.asarray(v)


def max_partial_sum_stats(model: SequenceModel, plan: MCPlan, centering: str = "upper",
                          n: Optional[int] = None) -> MaximalStatistic:
    n = n or model.horizon
    center = partial_sum_centering(model, n, centering)
    pool = plan.pool(model.driver)
    best = None
    for first, sums in model.simulate_sums(pool, plan.replications, plan.seed, n):
        cols = sums - center[first - 1:first - 1 + sums.shape[-1]]
        m = cols.max(axis=-1)
        best = m if best is None else np.maximum(best, m)
    return MaximalStatistic(best, n, centering, tuple(s.id for s in pool))


def maximal_constant(m: int, n: int, base: float = 1.0) -> float:
    """Constant of the m-dependent maximal inequality built from ``base``.

    (m+1)(m+2)(2m+3)/6 when n < m+1, otherwise base * (m+1)^2, where base
    is the constant of the independent case (1 classically).
    """
    if n < m + 1:
        return (m + 1) * (m + 2) * (2 * m + 3) / 6
    return base * (m + 1) ** 2


def _pool_max_frequency(events: np.ndarray, pool) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """events (P, R, X) -> pool max frequency, its upper 95% end, best selector."""
    R = events.shape[1]
    freq = events.mean(axis=1)                      # (P, X)
    best = np.argmax(freq, axis=0)
    top = freq[best, np.arange(freq.shape[1])]
    hi = top + Z_95 * np.sqrt(top * (1 - top) / R)
    return top, hi, [pool[b].id for b in best]


def verify_kolmogorov_maximal(model: SequenceModel, plan: MCPlan,
                              x_grid: Optional[Sequence[float]] = None,
                              constant: Optional[float] = None, n: Optional[int] = None,
                              base_constant: float = 1.0) -> InequalityReport:
    """V(max_k sum_{i<=k} (X_i - E^[X_i]) >= x) <= C x^-2 sum E^[X_i^2]."""
    n = n or model.horizon
    B2 = float(model.second_moments(n).sum())
    if x_grid is None:
        x = np.array([1.0, 1.5, 2.0, 2.5]) * math.sqrt(B2)
    else:
        x = np.asarray(x_grid, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x grid must be positive")
    C = maximal_constant(model.m, n, base_constant) if constant is None else float(constant)
    center = np.cumsum(model.upper_means(n))
    pool = plan.pool(model.driver)
    run = None
    for first, sums in model.simulate_sums(pool, plan.replications, plan.seed, n):
        m = (sums - center[first - 1:first - 1 + sums.shape[-1]]).max(axis=-1)
        run = m if run is None else np.maximum(run, m)
    lhs, hi, ids = _pool_max_frequency(run[..., None] >= x, pool)
    rhs = C * B2 / x**2
    return InequalityReport("kolmogorov_maximal", x, lhs, rhs, C, "lower_bound_mc", n,
                            ci_high=hi, selector_ids=tuple(ids), seed=plan.seed)


def normalized_exceedance(report: InequalityReport, B2: float) -> np.ndarray:
    """lhs * x^2 / sum E^[X_i^2]: flat in n when the constant does not grow."""
    return report.lhs * report.x_grid**2 / B2


# ----------------------------------------------------------------------
# Rademacher-Mensov
# ----------------------------------------------------------------------


def rademacher_mensov_bound(c: Sequence[float], quasi_f: Optional[Sequence[float]] = None) -> float:
    """(log2 4n)^2 sum c_j^2, times 1 + 2 sum_{j>=1} f(j) when f is given."""
    c = np.asarray(c, dtype=float)
    n = len(c)
    bound = math.log2(4 * n) ** 2 * float(np.sum(c * c))
    if quasi_f is not None:
        bound *= 1.0 + 2.0 * math.fsum(float(v) for v in list(quasi_f)[1:])
    return bound


def _exact_rm(model: SequenceModel, C: np.ndarray, cap: int) -> np.ndarray:
    n = C.shape[1]
    coords, vec = model.vector(range(1, n + 1))
    grid = enumeration_grid(model.driver, len(coords), cap)
    X = vec(grid)                                                  # (u,)*d + (n,)
    sums = np.cumsum(X[..., None, :] * C, axis=-1)                 # (..., V, n)
    stat = np.moveaxis((sums**2).max(axis=-1), -1, 0)              # (V, (u,)*d)
    v, _ = induct(stat, model.driver, len(coords))
    return np.asarray(v, dtype=float)


def verify_rademacher_mensov(model: SequenceModel, coefficients, plan: Optional[MCPlan] = None,
                             quasi_f: Optional[Sequence[float]] = None,
                             cap: int = DEFAULT_CAP, max_cells: int = 1 << 22) -> InequalityReport:
    """E^[max_k (sum_{j<=k} c_j X_j)^2] against (log2 4n)^2 sum c_j^2.

    ``coefficients`` is one vector or a (V, n) stack; the x grid of the
    report indexes the vectors. Exact when the driver is enumerable,
    otherwise the pool maximum of empirical means.
    """
    if model.certificate is None:
        raise MissingCertificate("model carries no orthogonality certificate")
    if not model.certificate.passes():
        raise MissingCertificate(f"certificate fails with violation "
                                 f"{model.certificate.max_violation:.3g}")
    C = np.atleast_2d(np.asarray(coefficients, dtype=float))
    V, n = C.shape
    if n > model.horizon:
        raise ValueError(f"{n} coefficients for a horizon of {model.horizon}")
    rhs = np.array([rademacher_mensov_bound(c, quasi_f) for c in C])
    idx = np.arange(V, dtype=float)
    if model.is_enumerable(cap) and len(model.driver.support) ** model.driver_horizon * V * n <= 4 * cap:
        lhs = _exact_rm(model, C, cap)
        return InequalityReport("rademacher_mensov", idx, lhs, rhs, 1.0, "exact", n,
                                tolerance=EXACT_TOL)
    if plan is None:
        raise ValueError("instance is not enumerable and no sampling plan was given")
    pool = plan.pool(model.driver)
    P, R = len(pool), plan.replications
    sums = np.zeros((P * R, V))
    run = np.zeros((P * R, V))
    width = 16
    rows = max(1, max_cells // (V * width))
    tri = np.triu(np.ones((width, width)))
    for first, block in model.simulate(pool, R, plan.seed):
        if first > n:
            break
        X = block[..., :n - first + 1].reshape(P * R, -1)
        for s in range(0, X.shape[1], width):
            xs = X[:, s:s + width]
            w = xs.shape[1]
            coef = C[:, first - 1 + s:first - 1 + s + w]                    # (V, w)
            # T[j, k, v] = c_vj 1{j <= k}: one product gives every running sum
            T = (tri[:w, :w, None] * coef.T[:, None, :]).reshape(w, w * V)
            for r0 in range(0, P * R, rows):
                S = (xs[r0:r0 + rows] @ T).reshape(-1, w, V)
                S += sums[r0:r0 + rows, None, :]
                top = np.maximum(S.max(axis=1) ** 2, S.min(axis=1) ** 2)
                np.maximum(run[r0:r0 + rows], top, out=run[r0:r0 + rows])
                sums[r0:r0 + rows] = S[:, -1, :]
    run = run.reshape(P, R, V).transpose(2, 0, 1)                 # (V, P, R)
    means = run.mean(axis=2)                                  # (V, P)
    best = np.argmax(means, axis=1)
    lhs = means[np.arange(V), best]
    sd = run[np.arange(V), best].std(axis=1, ddof=1)
    hi = lhs + Z_95 * sd / math.sqrt(R)
    return InequalityReport("rademacher_mensov", idx, lhs, rhs, 1.0, "lower_bound_mc", n,
                            ci_high=hi, selector_ids=tuple(pool[b].id for b in best),
                            seed=plan.seed)
