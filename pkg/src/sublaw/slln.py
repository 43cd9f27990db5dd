"""Finite-horizon evidence for strong laws under sublinear expectations.

A finite run cannot see a limit. Each runner first checks the hypotheses
of the corresponding limit theorem (raising HypothesisUnmet when one
fails), then tracks the worst normalized deviation over a selector pool
at dyadic checkpoints. The verdict is "consistent" when that worst value
ends below a calibrated band and is strictly decreasing over the last
three checkpoints.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional, Sequence

import numpy as np

from sublaw.capacity import choquet_moment, survival_function
from sublaw.errors import HypothesisUnmet
from sublaw.expectation import (Divergent, MCPlan, RandomFunctional, ScenarioSet,
                                extended_expectation, truncate, upper_expectation_exact)
from sublaw.inequalities import EXACT_TOL
from sublaw.seq_analysis import epsilon_sequence
from sublaw.sequences import (BlockStructure, OrthogonalityCertificate, SequenceModel,
                              phi_profile, quasi_orthogonal_certificate)

VERDICTS = ("consistent", "inconclusive", "violated")

# ----------------------------------------------------------------------
# normalizers and summability
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizerSpec:
    """a_n = n (linear), n^exponent (power), given values (custom) or n^(1/r) Phi(n)."""

    kind: str = "linear"
    exponent: float = 1.0
    values: tuple[float, ...] = ()
    r: float = 1.0
    blocks: Optional[BlockStructure] = None

    def __post_init__(self):
        if self.kind not in ("linear", "power", "custom", "power_phi"):
            raise ValueError(f"unknown normalizer kind {self.kind!r}")
        if self.kind == "power" and self.exponent <= 0:
            raise ValueError("power normalizer needs a positive exponent")
        if self.kind == "power_phi":
            if not 1 <= self.r < 2:
                raise ValueError("r must lie in [1,2)")
            if self.blocks is None:
                raise ValueError("power_phi normalizer needs a block structure")
        if self.kind == "custom":
            a = np.asarray(self.values, dtype=float)
            if len(a) == 0 or np.any(a < 1) or np.any(np.diff(a) < 0):
                raise ValueError("custom normalizer must satisfy 1 <= a_n, nondecreasing")

    def __call__(self, n: int) -> np.ndarray:
        k = np.arange(1, n + 1, dtype=float)
        if self.kind == "linear":
            return k
        if self.kind == "power":
            return k**self.exponent
        if self.kind == "custom":
            if n > len(self.values):
                raise ValueError(f"custom normalizer has {len(self.values)} values, need {n}")
            return np.asarray(self.values[:n], dtype=float)
        return k ** (1.0 / self.r) * phi_profile(self.blocks, n)

    @property
    def power(self) -> Optional[float]:
        """alpha with a_n = n^alpha, when the normalizer has that form."""
        return {"linear": 1.0, "power": self.exponent}.get(self.kind)


def power_tail(N: int, p: float) -> float:
    """Upper bound on sum_{k>N} k^-p for p > 1."""
    if p <= 1:
        return math.inf
    return N ** (1 - p) / (p - 1)


def power_log_tail(N: int, p: float) -> float:
    """Upper bound on sum_{k>N} k^-p (log2 k)^2 for p > 1 (integral test)."""
    if p <= 1:
        return math.inf
    if math.log(N) < 2 / p:
        raise ValueError("integral test needs N >= e^(2/p)")
    L, q = math.log(N), p - 1
    return N ** (1 - p) * (L * L / q + 2 * L / q**2 + 2 / q**3) / math.log(2) ** 2


@dataclass(frozen=True, eq=False)
class SummabilityResult:
    partial_sums: np.ndarray
    tail_bound: Optional[float]
    verdict: str                     # converged, diverging or unknown

    @property
    def prefix_sum(self) -> float:
        return float(self.partial_sums[-1]) if len(self.partial_sums) else 0.0

    @property
    def upper_estimate(self) -> float:
        return self.prefix_sum + (self.tail_bound if self.tail_bound is not None else math.inf)


def check_summability(terms: Sequence[float], weights: Optional[Sequence[float]] = None,
                      tail_bound: Optional[float] = None) -> SummabilityResult:
    """Partial sums of terms * weights and a verdict.

    converged: a finite tail bound is supplied (or the prefix is all zero);
    diverging: dyadic block sums do not decrease over the last three blocks;
    unknown otherwise.
    """
    t = np.asarray(terms, dtype=float)
    if weights is not None:
        t = t * np.asarray(weights, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("terms must be finite and nonnegative")
    sums = np.cumsum(t)
    if tail_bound is not None and math.isfinite(tail_bound):
        return SummabilityResult(sums, float(tail_bound), "converged")
    if not np.any(t):
        return SummabilityResult(sums, 0.0, "converged")
    blocks = [t[2**k - 1:2**(k + 1) - 1].sum() for k in range(len(t).bit_length() - 1)]
    if len(blocks) >= 3 and blocks[-1] >= blocks[-2] >= blocks[-3] > 0:
        return SummabilityResult(sums, None, "diverging")
    return SummabilityResult(sums, None, "unknown")


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: Optional[bool]       # None: could not be decided on the prefix
    value: float = 0.0
    bound: float = 0.0
    detail: str = ""


@dataclass(frozen=True)
class DiagnosticRow:
    statistic: str
    n: int
    value: float
    bound: float                 # math.inf for purely informational rows
    selector_id: str = ""

    @property
    def passed(self) -> bool:
        return self.value <= self.bound


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    experiment: str
    checkpoints: tuple[int, ...]
    upper: np.ndarray             # max over paths of (S_n - upper centering) / a_n
    lower: np.ndarray             # min over paths of (S_n - lower centering) / a_n
    band: float
    conditions: tuple[ConditionResult, ...]
    upper_ids: tuple[str, ...] = ()
    lower_ids: tuple[str, ...] = ()
    diagnostics: tuple[DiagnosticRow, ...] = ()
    seed: int = 0
    replications: int = 0

    @property
    def worst(self) -> np.ndarray:
        return np.maximum(np.maximum(self.upper, 0.0), np.maximum(-self.lower, 0.0))

    @property
    def verdict(self) -> str:
        w = self.worst
        tail = w[-3:]
        decreasing = len(tail) == 3 and bool(np.all(np.diff(tail) < 0))
        if any(c.passed is None for c in self.conditions):
            return "inconclusive"
        if w[-1] < self.band and (decreasing or w[-1] == 0.0):
            return "consistent"
        if w[-1] >= self.band and not decreasing:
            return "violated"
        return "inconclusive"


@dataclass(frozen=True, eq=False)
class ScenarioVariable:
    """A random variable given by a functional under its own scenario family."""

    driver: ScenarioSet
    f: RandomFunctional


@dataclass(frozen=True, eq=False)
class DominationCheck:
    t_grid: np.ndarray
    lhs: np.ndarray               # max over n of (1/n) sum_{k<=n} V(|X_k| > t)
    rhs: np.ndarray               # C V(|Z| > t)
    C: float
    worst_n: np.ndarray
    moment: Optional[float] = None   # C_V[|Z|^r]
    r: Optional[float] = None

    @property
    def passed(self) -> np.ndarray:
        return self.lhs <= self.rhs + EXACT_TOL

    @property
    def all_pass(self) -> bool:
        return bool(np.all(self.passed))


# ----------------------------------------------------------------------
# golden bands
# ----------------------------------------------------------------------


def golden_bands() -> dict:
    text = resources.files("sublaw.data").joinpath("golden_bands.json").read_text()
    return json.loads(text)


def golden_band(name: str) -> float:
    return float(golden_bands()[name]["band"])


def dyadic_checkpoints(lo: int, hi: int) -> tuple[int, ...]:
    return tuple(2**k for k in range(lo, hi + 1))


# ----------------------------------------------------------------------
# hypothesis checks
# ----------------------------------------------------------------------


def _require(cond: ConditionResult) -> ConditionResult:
    if cond.passed is False:
        raise HypothesisUnmet(cond.name, cond.detail)
    return cond


def _centered_zero(model: SequenceModel, n: int, both: bool) -> ConditionResult:
    up = model.upper_means(n)
    worst = float(np.max(np.abs(up)))
    if both:
        worst = max(worst, float(np.max(np.abs(model.lower_means(n)))))
    what = "upper and lower means" if both else "upper means"
    return ConditionResult("zero_mean", worst <= EXACT_TOL, worst, EXACT_TOL,
                           f"largest |mean| over {what} is {worst:.3g}")


def _summability(name: str, terms: np.ndarray, tail: Optional[float]) -> ConditionResult:
    res = check_summability(terms, tail_bound=tail)
    passed = {"converged": True, "diverging": False}.get(res.verdict)
    return ConditionResult(name, passed, res.upper_estimate, math.inf,
                           f"{res.verdict}: prefix sum {res.prefix_sum:.6g}, tail bound "
                           f"{res.tail_bound if res.tail_bound is not None else 'unavailable'}")


def _variance_envelope(sigma2: np.ndarray, growth: float) -> float:
    k = np.arange(1, len(sigma2) + 1, dtype=float)
    return float(np.max(sigma2 / k**growth))


def check_domination(model: SequenceModel, Z: ScenarioVariable, C: float,
                     t_grid: Sequence[float], r: Optional[float] = None,
                     n: Optional[int] = None) -> DominationCheck:
    """(1/n) sum_{k<=n} V(|X_k| > t) <= C V(|Z| > t) for every n and grid t."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t grid must be positive")
    n = n or model.horizon
    by_law: dict = {}
    rows = np.empty((n, len(t)))
    for k in range(1, n + 1):
        key = model.cmap.law_key(k)
        if key not in by_law:
            by_law[key] = survival_function(model.driver, abs(model.X(k))).strict(t)
        rows[k - 1] = by_law[key]
    avg = np.cumsum(rows, axis=0) / np.arange(1, n + 1)[:, None]
    worst_n = np.argmax(avg, axis=0) + 1
    lhs = avg.max(axis=0)
    rhs = C * survival_function(Z.driver, abs(Z.f)).strict(t)
    moment = choquet_moment(Z.driver, Z.f, r).moment if r is not None else None
    return DominationCheck(t, lhs, rhs, float(C), worst_n, moment, r)


# ----------------------------------------------------------------------
# simulation core
# ----------------------------------------------------------------------


class _Tracker:
    """Hook fed with (first k, X block, S block) during a run."""

    def update(self, first: int, X: np.ndarray, S: np.ndarray) -> None:
        pass

    def rows(self) -> list[DiagnosticRow]:
        return []


def _trajectory(model: SequenceModel, plan: MCPlan, checkpoints: Sequence[int],
                upper_center: np.ndarray, lower_center: np.ndarray, norm: np.ndarray,
                trackers: Sequence[_Tracker] = ()):
    n = checkpoints[-1]
    pool = plan.pool(model.driver)
    ups, los, up_ids, lo_ids = [], [], [], []
    cps = list(checkpoints)
    carry = None
    for first, X in model.simulate(pool, plan.replications, plan.seed):
        if first > n:
            break
        X = X[..., :n - first + 1]
        S = np.cumsum(X, axis=-1)
        if carry is not None:
            S += carry[..., None]
        carry = S[..., -1]
        for tr in trackers:
            tr.update(first, X, S)
        last = first + X.shape[-1] - 1
        while cps and cps[0] <= last:
            c = cps.pop(0)
            vals = S[..., c - first]
            u = (vals - upper_center[c - 1]) / norm[c - 1]
            l = (vals - lower_center[c - 1]) / norm[c - 1]
            iu, il = np.unravel_index(np.argmax(u), u.shape), np.unravel_index(np.argmin(l), l.shape)
            ups.append(float(u[iu]))
            los.append(float(l[il]))
            up_ids.append(pool[iu[0]].id)
            lo_ids.append(pool[il[0]].id)
    return np.array(ups), np.array(los), tuple(up_ids), tuple(lo_ids)


def _check_checkpoints(model: SequenceModel, checkpoints: Sequence[int]) -> tuple[int, ...]:
    cps = tuple(int(c) for c in checkpoints)
    if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
        raise ValueError("checkpoints must be positive and strictly increasing")
    if cps[-1] > model.horizon:
        raise ValueError(f"last checkpoint {cps[-1]} beyond horizon {model.horizon}")
    return cps


# ----------------------------------------------------------------------
# Theorem runners
# ----------------------------------------------------------------------

M_DEPENDENT_KINDS = ("independent", "m_dependent", "orthogonal")


def run_theorem41(model: SequenceModel, normalizer: NormalizerSpec, plan: MCPlan,
                  checkpoints: Sequence[int], band: float, variance_growth: float = 0.0,
                  tail_bound: Optional[float] = None) -> ConvergenceReport:
    """S_n / a_n for an m-dependent sequence with E^[X_n] = lower mean = 0.

    The summability tail is bounded assuming E^[X_k^2] <= K k^variance_growth
    beyond the horizon (K read off the horizon) unless ``tail_bound`` is given.
    """
    cps = _check_checkpoints(model, checkpoints)
    n = cps[-1]
    conds = []
    conds.append(_require(ConditionResult(
        "m_dependent", model.kind in M_DEPENDENT_KINDS and model.blocks is None,
        model.m, 0, f"model kind {model.kind!r}")))
    conds.append(_require(_centered_zero(model, model.horizon, both=True)))
    a = normalizer(model.horizon)
    if a[0] < 1 or np.any(np.diff(a) < 0):
        raise HypothesisUnmet("normalizer", "need 1 <= a_n nondecreasing")
    sigma2 = model.second_moments()
    if tail_bound is None and normalizer.power is not None:
        K = _variance_envelope(sigma2, variance_growth)
        tail_bound = K * power_tail(model.horizon, 2 * normalizer.power - variance_growth)
    conds.append(_require(_summability("summability", sigma2 / a**2, tail_bound)))
    zero = np.zeros(n)
    up, lo, uid, lid = _trajectory(model, plan, cps, zero, zero, a[:n])
    return ConvergenceReport("thm41", cps, up, lo, band, tuple(conds), uid, lid,
                             seed=plan.seed, replications=plan.replications)


def extended_means(model: SequenceModel, n: int, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Upper and lower extended means of X_1..X_n along the truncation schedule."""
    up, lo = np.empty(n), np.empty(n)
    cache: dict = {}
    for k in range(1, n + 1):
        key = model.cmap.law_key(k)
        if key not in cache:
            B = model.bound(k)
            levels = sorted({2.0**j * k ** (1 / r) for j in range(7)} | {B, 2 * B, 2 * B + 1})
            x = model.X(k)
            hi = extended_expectation(model.driver, x, levels, tol=1e-6)
            neg = extended_expectation(model.driver, -x, levels, tol=1e-6)
            if isinstance(hi, Divergent) or isinstance(neg, Divergent):
                raise HypothesisUnmet("extended_mean", f"truncated means of X{k} do not settle")
            cache[key] = (hi, -neg)
        up[k - 1], lo[k - 1] = cache[key]
    return up, lo


class _TruncationTracker(_Tracker):
    """Counts X_k different from its truncation at k^(1/r)."""

    def __init__(self, r: float, index: int):
        self.r, self.index = r, index
        self.total = 0
        self.beyond = 0

    def update(self, first, X, S):
        k = np.arange(first, first + X.shape[-1])
        hit = np.abs(X) > k ** (1 / self.r)
        self.total += int(hit.sum())
        self.beyond += int(hit[..., k >= self.index].sum())

    def rows(self):
        return [DiagnosticRow("truncation_events", self.index, float(self.total), math.inf),
                DiagnosticRow("truncation_events_beyond_index", self.index,
                              float(self.beyond), 0.0)]


def run_theorem42(model: SequenceModel, Z: ScenarioVariable, r: float, plan: MCPlan,
                  checkpoints: Sequence[int], band: float, C: float = 1.0,
                  blocks: Optional[BlockStructure] = None,
                  t_grid: Optional[Sequence[float]] = None) -> ConvergenceReport:
    """(S_n - sum E-bar[X_k]) / (n^(1/r) Phi(n)) for a blockwise m-dependent sequence."""
    if not 1 <= r < 2:
        raise HypothesisUnmet("r_range", f"r = {r} outside [1,2)")
    cps = _check_checkpoints(model, checkpoints)
    n = cps[-1]
    blocks = blocks or model.blocks
    if blocks is None:
        raise HypothesisUnmet("blockwise", "no block structure attached to the model")
    conds = []
    B = model.sup_bound()
    if t_grid is None:
        t_grid = np.linspace(0.05, 1.05, 21) * max(B, Z.driver.bound)
    dom = check_domination(model, Z, C, t_grid, r, model.horizon)
    worst = float(np.max(dom.lhs - dom.rhs))
    conds.append(_require(ConditionResult("domination", dom.all_pass, worst, EXACT_TOL,
                                          f"max lhs - rhs over grid is {worst:.3g}")))
    conds.append(_require(ConditionResult("choquet_moment", math.isfinite(dom.moment),
                                          dom.moment, math.inf, f"C_V[|Z|^{r:g}]")))
    norm = NormalizerSpec("power_phi", r=r, blocks=blocks)(n)
    up_mean, lo_mean = extended_means(model, n, r)
    index = math.ceil(B**r)
    tracker = _TruncationTracker(r, index)
    up, lo, uid, lid = _trajectory(model, plan, cps, np.cumsum(up_mean), np.cumsum(lo_mean),
                                   norm, [tracker])
    diags = tracker.rows()
    # drift between extended means of X_k and of its truncation, k < index
    drift = np.zeros(n)
    cache: dict = {}
    for k in range(1, min(index, n + 1)):
        key = (model.cmap.law_key(k), k ** (1 / r))
        if key not in cache:
            cache[key] = upper_expectation_exact(model.driver, truncate(model.X(k), k ** (1 / r)))
        drift[k - 1] = up_mean[k - 1] - cache[key]
    cum = np.cumsum(drift)
    for c in cps:
        diags.append(DiagnosticRow("truncation_drift", c, float(abs(cum[c - 1]) / c ** (1 / r)),
                                   math.inf))
    diags.append(DiagnosticRow("phi", n, float(norm[-1] / n ** (1 / r)), math.inf))
    return ConvergenceReport("thm42", cps, up, lo, band, tuple(conds), uid, lid, tuple(diags),
                             plan.seed, plan.replications)


class _BlockIncrementTracker(_Tracker):
    """max_{2^k < j <= 2^(k+1)} |S_j - S_{2^k}| per path, against eps_{2^k} 2^(k+1)."""

    def __init__(self, pool, eps: np.ndarray, sigma2: np.ndarray, inflation: float, n: int):
        self.pool, self.eps, self.sigma2, self.inflation, self.n = pool, eps, sigma2, inflation, n
        self.base = None
        self.run = None
        self.out: list[DiagnosticRow] = []

    def _close(self, k: int):
        top = 2 ** (k + 1)
        eps = float(self.eps[2**k - 1])
        thr = eps * top
        worst = self.run.max()
        freq = (self.run >= thr).mean(axis=1)
        b = int(np.argmax(freq))
        var = float(self.sigma2[2**k:top].sum())
        bound = self.inflation * (k + 2) ** 2 * var / thr**2 if thr > 0 else math.inf
        self.out.append(DiagnosticRow("block_increment", top, float(worst / top), math.inf))
        self.out.append(DiagnosticRow("block_threshold", top, eps, math.inf))
        self.out.append(DiagnosticRow("block_exceedance", top, float(freq[b]), bound,
                                      self.pool[b].id))

    def update(self, first, X, S):
        last = first + S.shape[-1] - 1
        j = first
        while j <= last:
            if j == 1:
                self.base = S[..., 0].copy()
                self.run = np.zeros_like(self.base)
                j += 1
                continue
            k = (j - 1).bit_length() - 1
            end = min(last, 2 ** (k + 1))
            seg = S[..., j - first:end - first + 1]
            np.maximum(self.run, np.abs(seg - self.base[..., None]).max(axis=-1), out=self.run)
            if end == 2 ** (k + 1):
                self._close(k)
                self.base = seg[..., -1].copy()
                self.run = np.zeros_like(self.base)
            j = end + 1

    def rows(self):
        return self.out


def _orthogonal_runner(name: str, model: SequenceModel, plan: MCPlan,
                       checkpoints: Sequence[int], band: float,
                       cert_cond: ConditionResult, inflation: float,
                       variance_growth: float, tail_bound: Optional[float]) -> ConvergenceReport:
    cps = _check_checkpoints(model, checkpoints)
    n = cps[-1]
    conds = [_require(cert_cond), _require(_centered_zero(model, model.horizon, both=False))]
    sigma2 = model.second_moments()
    k = np.arange(1, model.horizon + 1, dtype=float)
    terms = sigma2 * np.log2(k) ** 2 / k**2
    if tail_bound is None:
        K = _variance_envelope(sigma2, variance_growth)
        tail_bound = K * power_log_tail(model.horizon, 2 - variance_growth)
    conds.append(_require(_summability("summability", terms, tail_bound)))
    eps = epsilon_sequence(terms, tail_bound).epsilon
    pool = plan.pool(model.driver)
    tracker = _BlockIncrementTracker(pool, eps, sigma2, inflation, n)
    zero = np.zeros(n)
    up, lo, uid, lid = _trajectory(model, plan, cps, zero, zero, k[:n], [tracker])
    return ConvergenceReport(name, cps, up, lo, band, tuple(conds), uid, lid,
                             tuple(tracker.rows()), plan.seed, plan.replications)


def run_theorem43(model: SequenceModel, plan: MCPlan, checkpoints: Sequence[int], band: float,
                  variance_growth: float = 0.0,
                  tail_bound: Optional[float] = None) -> ConvergenceReport:
    """S_n / n for an orthogonal sequence with E^[X_n] = 0."""
    cert = model.certificate
    if cert is None or not cert.strict:
        cond = ConditionResult("orthogonal", False, detail="no orthogonality certificate")
    else:
        cond = ConditionResult("orthogonal", cert.passes(), cert.max_violation, EXACT_TOL,
                               f"{len(cert.pairs)} pairs checked")
    return _orthogonal_runner("thm43", model, plan, checkpoints, band, cond, 1.0,
                              variance_growth, tail_bound)


def run_corollary41(model: SequenceModel, f: Sequence[float], plan: MCPlan,
                    checkpoints: Sequence[int], band: float, variance_growth: float = 0.0,
                    tail_bound: Optional[float] = None,
                    pair_cap: Optional[int] = 256) -> ConvergenceReport:
    """As run_theorem43 for a quasi-orthogonal sequence with weight sequence f."""
    cert = quasi_orthogonal_certificate(model, f, pair_cap)
    cond = ConditionResult("quasi_orthogonal", cert.passes(), cert.max_violation, EXACT_TOL,
                           f"{len(cert.pairs)} pairs checked")
    return _orthogonal_runner("cor41", model, plan, checkpoints, band, cond, cert.inflation,
                              variance_growth, tail_bound)


# ----------------------------------------------------------------------
# Kronecker lemma
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KroneckerReport:
    series: np.ndarray          # s_k = sum_{j<=k} x_j / a_j
    normalized: np.ndarray      # (1/a_k) sum_{j<=k} x_j
    oscillation: float          # max |s_k - s_N| over the second half of the prefix
    hypothesis_met: bool
    bound: float                # Abel-summation bound on |normalized[-1]|

    @property
    def passed(self) -> Optional[bool]:
        if not self.hypothesis_met:
            return None
        return abs(float(self.normalized[-1])) <= self.bound + EXACT_TOL


def kronecker_check(x: Sequence[float], a: Sequence[float], tol: float = 1e-3) -> KroneckerReport:
    """Numerical Kronecker lemma on a finite prefix.

    From sum_{k<=n} x_k = a_n s_n - sum_{k<n} (a_{k+1} - a_k) s_k,
    |(1/a_n) sum x_k| <= a_1 |s_n| / a_n + min over M of
    [(a_M - a_1) max_{k<M} |s_k - s_n| + (a_n - a_M) max_{M<=k<n} |s_k - s_n|] / a_n.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if x.shape != a.shape or len(a) < 2:
        raise ValueError("x and a need the same length >= 2")
    if np.any(a <= 0) or np.any(np.diff(a) <= 0):
        raise ValueError("a must be positive and increasing")
    s = np.cumsum(x / a)
    normalized = np.cumsum(x) / a
    N = len(a)
    dev = np.abs(s - s[-1])
    oscillation = float(dev[N // 2:].max())
    met = oscillation < tol
    head = np.maximum.accumulate(dev[:-1])                       # max_{k<=M-1}, M = 2..N
    tail = np.maximum.accumulate(dev[:-1][::-1])[::-1]           # max_{M-1<=k<N}
    M = np.arange(2, N + 1)
    parts = [(a[M[i] - 1] - a[0]) * head[i] + (a[-1] - a[M[i] - 1]) * tail[i + 1]
             if i + 1 < len(tail) else (a[M[i] - 1] - a[0]) * head[i]
             for i in range(len(M))]
    bound = a[0] * abs(s[-1]) / a[-1] + min(parts) / a[-1]
    return KroneckerReport(s, normalized, oscillation, met, float(bound))
