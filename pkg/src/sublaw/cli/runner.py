"""Build models from configs and turn each experiment into report rows."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from sublaw.capacity import (IntervalEvent, PathEvent, choquet_integral, choquet_moment,
                             counterexample_model, linear_grid, lower_capacity, outer_capacity,
                             sample_survival, survival_function, upper_capacity)
from sublaw.cli.config import ExperimentConfig, ModelSpec
from sublaw.cli.expressions import parse_expression
from sublaw.cli.reporting import NO_BOUND, ReportRow
from sublaw.expectation import (DiscreteDistribution, MCPlan, ScenarioSet, lower_expectation,
                                scenario_set, upper_expectation_exact)
from sublaw.expectation.axioms import (AXIOMS, AxiomInstance, additivity_gap, axiom_violations,
                                       random_instance, random_table)
from sublaw.inequalities import (EXACT_TOL, normalized_exceedance, verify_kolmogorov_maximal,
                                 verify_rademacher_mensov)
from sublaw.seq_analysis import epsilon_sequence, wittmann_subsequence
from sublaw.sequences import (BlockStructure, OrthogonalityCertificate, SequenceModel, signs,
                              make_blockwise_m_dependent, make_independent_sequence,
                              make_m_dependent, make_orthogonal, quasi_orthogonal_certificate,
                              unit_variance_pair, window_function)
from sublaw.slln import (ConvergenceReport, NormalizerSpec, ScenarioVariable, run_corollary41,
                         run_theorem41, run_theorem42, run_theorem43)

# ----------------------------------------------------------------------
# model construction
# ----------------------------------------------------------------------


def build_driver(spec: ModelSpec) -> ScenarioSet:
    if spec.scenarios is not None:
        return ScenarioSet(tuple(DiscreteDistribution(s) for s in spec.scenarios))
    if spec.preset == "signs":
        return signs()
    if spec.preset == "unit_variance_pair":
        return unit_variance_pair()
    if spec.preset == "two_point":
        return scenario_set([(0, 0.5), (2, 0.5)], [(1, 1.0)])
    raise ValueError(f"preset {spec.preset!r} does not describe a discrete driver")


def build_blocks(spec: ModelSpec) -> Optional[BlockStructure]:
    b = spec.blocks
    if b is None:
        return None
    if b["kind"] == "powers_of_two":
        return BlockStructure.powers_of_two(spec.horizon)
    if b["kind"] == "unit":
        return BlockStructure.unit(spec.horizon)
    return BlockStructure.from_cuts(b["cuts"], spec.horizon)


def build_model(spec: ModelSpec, pair_cap: Optional[int] = 256) -> SequenceModel:
    scales = None
    if spec.scales is not None:
        scales = np.arange(1, spec.horizon + 1, dtype=float) ** spec.scales["exponent"]
    if spec.kind == "orthogonal":
        theta = None if spec.scheme == "haar_like" else build_driver(spec)
        return make_orthogonal(spec.horizon, spec.scheme, theta, scales, pair_cap)
    theta = build_driver(spec)
    if spec.kind == "independent":
        return make_independent_sequence(theta, spec.horizon, scales)
    g = window_function(spec.window, spec.m)
    if spec.kind == "m_dependent":
        return make_m_dependent(theta, g, spec.m, spec.horizon, scales)
    return make_blockwise_m_dependent(build_blocks(spec), theta, g, spec.m, spec.glue)


def _plan(cfg: ExperimentConfig) -> MCPlan:
    return MCPlan(cfg.plan.replications, cfg.seed, cfg.plan.pool_size)


class _Rows:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.rows: list[ReportRow] = []

    def point(self, n, statistic, value, bound=NO_BOUND, selector_id=""):
        self.rows.append(ReportRow.point(self.cfg.experiment, n, statistic, value, bound,
                                         self.cfg.seed, selector_id))

    def interval(self, n, statistic, value, lo, hi, bound, selector_id=""):
        bound = NO_BOUND if not math.isfinite(bound) else bound
        self.rows.append(ReportRow(self.cfg.experiment, n, statistic, value, lo, hi, bound,
                                   self.cfg.seed, selector_id))

    def equal(self, n, statistic, value, expected, tol=0.0):
        """A value row plus an absolute-error row that must stay within ``tol``."""
        self.point(n, statistic, value)
        self.point(n, f"{statistic}:error", abs(value - expected), tol)


# ----------------------------------------------------------------------
# experiments
# ----------------------------------------------------------------------


def run_axioms(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    rng = np.random.default_rng(cfg.seed)
    count = int(cfg.params.get("instances", 100))
    coords = int(cfg.params.get("coords", 3))
    worst = dict.fromkeys(AXIOMS, 0.0)
    gap = 0.0
    for _ in range(count):
        if cfg.model is None:
            inst = random_instance(rng)
        else:
            d = build_driver(cfg.model)
            inst = AxiomInstance(d, coords, random_table(rng, d, coords), random_table(rng, d, coords),
                                 float(rng.uniform(-5, 5)), float(rng.uniform(0, 4)))
        for name, v in axiom_violations(inst).items():
            worst[name] = max(worst[name], v)
        gap = max(gap, additivity_gap(inst.driver, inst.n_coords))
    for name in AXIOMS:
        out.point(count, name, worst[name], EXACT_TOL)
    out.point(count, "independence_additivity", gap, EXACT_TOL)
    return out.rows


def run_capacity(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    if cfg.model is None or cfg.model.preset == "counterexample":
        model = counterexample_model()
        left, right = IntervalEvent.closed(0, 1), IntervalEvent.closed(1, 2)
        point = IntervalEvent.point(1)
        out.equal(1, "upper_capacity[0,1]", upper_capacity(model, left), 1.0)
        out.equal(1, "upper_capacity[1,2]", upper_capacity(model, right), 1.0)
        out.equal(1, "upper_capacity{1}", upper_capacity(model, left.intersect(right)), 0.0)
        out.equal(1, "lower_capacity[0,1]", lower_capacity(model, left), 0.0)
        eps = Fraction(1, 10)
        cover = [IntervalEvent.closed(1 - eps, 1 + eps)]
        out.equal(1, "outer_capacity{1}", outer_capacity(model, point, cover), 0.0)
        whole = IntervalEvent.closed(0, 2)
        out.point(1, "sub_additivity[0,2]",
                  upper_capacity(model, whole) - upper_capacity(model, left)
                  - upper_capacity(model, right), 0.0)
        return out.rows
    driver = build_driver(cfg.model)
    for text in cfg.params.get("events", ["X1 >= 0"]):
        ev = PathEvent(parse_expression(text), text)
        n = ev.indicator.last
        up, lo = upper_capacity(driver, ev), lower_capacity(driver, ev)
        out.point(n, f"upper_capacity[{text}]", up)
        out.point(n, f"lower_capacity[{text}]", lo)
        out.point(n, f"lower_minus_upper[{text}]", lo - up, EXACT_TOL)
        out.point(n, f"sandwich_gap[{text}]",
                  abs(up - upper_expectation_exact(driver, ev.indicator)), EXACT_TOL)
    return out.rows


def run_choquet(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    driver = build_driver(cfg.model)
    intervals = int(cfg.params.get("intervals", 4096))
    for text in cfg.params.get("expressions", ["X1"]):
        f = parse_expression(text)
        n = f.last
        step = survival_function(driver, f)
        exact = choquet_integral(step).value
        lo, hi = step.support
        span = max(hi - lo, 1.0)
        grid = linear_grid(min(lo, 0.0) - span / 8, max(hi, 0.0) + span / 8, intervals)
        q = choquet_integral(sample_survival(step, grid))
        out.point(n, f"choquet_exact[{text}]", exact)
        out.point(n, f"choquet_grid[{text}]", q.value)
        out.point(n, f"choquet_grid_error[{text}]", abs(q.value - exact), q.error_bound + EXACT_TOL)
        upper = upper_expectation_exact(driver, f)
        out.point(n, f"upper_expectation[{text}]", upper)
        if len(driver) == 1:
            out.point(n, f"classical_mean_error[{text}]", abs(exact - upper), EXACT_TOL)
        for r in cfg.params.get("moments", [1, 2]):
            mom = choquet_moment(driver, f, float(r))
            out.point(n, f"choquet_moment_r{r:g}[{text}]", mom.moment)
            out.point(n, f"tail_minus_moment_r{r:g}[{text}]", mom.tail_integral - mom.moment,
                      mom.error_bound + EXACT_TOL)
    return out.rows


def run_maximal(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    model = build_model(cfg.model)
    plan = _plan(cfg)
    ns = [int(n) for n in cfg.params.get("ns", [32, 64, 128])]
    base = float(cfg.params.get("base_constant", 1.0))
    ratios = []
    for n in ns:
        rep = verify_kolmogorov_maximal(model, plan, n=n, base_constant=base)
        B2 = float(model.second_moments(n).sum())
        for i, x in enumerate(rep.x_grid):
            z = x / math.sqrt(B2)
            out.interval(n, f"maximal_exceedance[z={z:g}]", rep.lhs[i], rep.lhs[i], rep.ci_high[i],
                         rep.rhs[i], rep.selector_ids[i])
        norm = normalized_exceedance(rep, B2)
        ratios.append(norm)
        for i, x in enumerate(rep.x_grid):
            out.point(n, f"normalized_exceedance[z={x / math.sqrt(B2):g}]", norm[i])
        out.point(n, "constant_used", rep.constant_used)
    R = np.array(ratios)
    spread = np.where(R.min(axis=0) > 0, R.max(axis=0) / np.maximum(R.min(axis=0), 1e-300), 1.0)
    out.point(ns[-1], "normalized_exceedance_spread", float(spread.max()),
              float(cfg.params.get("max_spread", 2.0)))
    return out.rows


def _coefficients(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    C = rng.standard_normal((count, n))
    C[0] = 1.0
    return C


def run_rademacher_mensov(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    model = build_model(cfg.model)
    quasi = bool(cfg.params.get("quasi", False))
    f = cfg.f if quasi else None
    if quasi:
        model = model.with_certificate(quasi_orthogonal_certificate(model, cfg.f))
    rng = np.random.default_rng(cfg.seed)
    count = int(cfg.params.get("vectors", 20))
    plan = _plan(cfg)
    for n in cfg.params.get("ns", [4, 16, 64, 256, 1024]):
        C = _coefficients(rng, count, int(n))
        rep = verify_rademacher_mensov(model, C, plan, f)
        hi = rep.ci_high if rep.ci_high is not None else rep.lhs
        for v in range(count):
            sid = rep.selector_ids[v] if rep.selector_ids else ""
            out.interval(int(n), f"rademacher_mensov[v={v}]", rep.lhs[v], rep.lhs[v], hi[v],
                         rep.rhs[v], sid)
    return out.rows


def _convergence_rows(out: _Rows, rep: ConvergenceReport) -> list[ReportRow]:
    for c in rep.conditions:
        out.point(0, f"condition:{c.name}", 0.0 if c.passed else 1.0,
                  0.0 if c.passed is not None else 1.0)
    worst = rep.worst
    last = len(rep.checkpoints) - 1
    for i, n in enumerate(rep.checkpoints):
        out.point(n, "upper_ratio", rep.upper[i], selector_id=rep.upper_ids[i])
        out.point(n, "lower_ratio", rep.lower[i], selector_id=rep.lower_ids[i])
        out.point(n, "worst_ratio", worst[i], rep.band if i == last else NO_BOUND)
    tail = worst[-3:]
    rises = float(np.sum(np.diff(tail) >= 0)) if len(tail) == 3 else 1.0
    out.point(rep.checkpoints[-1], "worst_ratio_nondecreasing_steps", rises,
              0.0 if worst[-1] > 0 else NO_BOUND)
    for d in rep.diagnostics:
        out.point(d.n, d.statistic, d.value, d.bound, d.selector_id)
    out.point(rep.checkpoints[-1], f"verdict:{rep.verdict}",
              0.0 if rep.verdict == "consistent" else 1.0, 0.0)
    return out.rows


def _certificate_rows(out: _Rows, cert: Optional[OrthogonalityCertificate], name: str) -> bool:
    """Rows for failing certificate pairs; True when the certificate holds."""
    if cert is None:
        return True
    if cert.passes():
        return True
    for p in cert.pairs:
        if p.violation > EXACT_TOL:
            out.point(p.j - p.i, f"{name}[{p.i},{p.j}]", max(abs(p.upper), abs(p.lower)), p.bound)
    out.point(0, f"{name}:max_violation", cert.max_violation, EXACT_TOL)
    return False


def run_slln(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    pair_cap = cfg.params.get("pair_cap", 256)
    model = build_model(cfg.model, pair_cap)
    plan = _plan(cfg)
    cps = cfg.plan.checkpoints
    exp = cfg.experiment
    if exp == "thm41":
        norm = NormalizerSpec(cfg.normalizer["kind"], float(cfg.normalizer.get("exponent", 1.0)),
                              tuple(cfg.normalizer.get("values", ())))
        rep = run_theorem41(model, norm, plan, cps, cfg.band, cfg.variance_growth)
    elif exp == "thm42":
        if cfg.Z is None:
            Z = ScenarioVariable(model.driver, model.X(1))
        else:
            zm = build_model(cfg.Z)
            Z = ScenarioVariable(zm.driver, zm.X(1))
        rep = run_theorem42(model, Z, cfg.r, plan, cps, cfg.band, cfg.C, build_blocks(cfg.model))
    elif exp == "thm43":
        if not _certificate_rows(out, model.certificate, "orthogonality"):
            return out.rows
        rep = run_theorem43(model, plan, cps, cfg.band, cfg.variance_growth)
    else:
        cert = quasi_orthogonal_certificate(model, cfg.f, pair_cap)
        if not _certificate_rows(out, cert, "quasi_orthogonality"):
            return out.rows
        rep = run_corollary41(model, cfg.f, plan, cps, cfg.band, cfg.variance_growth,
                              pair_cap=pair_cap)
    return _convergence_rows(out, rep)


_SEQUENCES: dict[str, Callable[[int], int]] = {
    "n": lambda n: n, "n2": lambda n: n * n, "2n": lambda n: 2**n,
}


def run_seq_lemma(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    length = int(cfg.params.get("length", 200))
    for name in cfg.params.get("sequences", ["n", "n2", "2n"]):
        a = [_SEQUENCES[name](k) for k in range(1, length + 1)]
        for M in cfg.params.get("M", [1.5, 2, 4]):
            sub = wittmann_subsequence(a, M)
            Mf = Fraction(M)
            bad = sum(not (Mf * a[i - 1] <= a[j - 1] <= Mf**3 * a[i])
                      for i, j in zip(sub.indices, sub.indices[1:]))
            out.point(length, f"wittmann_length[a={name},M={M:g}]", len(sub.indices))
            out.point(length, f"wittmann_failing_pairs[a={name},M={M:g}]", bad, 0.0)
    N = int(cfg.params.get("epsilon_length", 40))
    k = np.arange(1, N + 1, dtype=float)
    cases = {"geometric": (4.0**-k, 4.0**-N / 3), "polynomial": (1 / k**2, 1 / N)}
    for name, (a, tail) in cases.items():
        eps = epsilon_sequence(a, tail)
        root = np.sqrt(eps.tails)
        tele = np.abs(np.cumsum(eps.b) - (root[0] - root[1:]))
        out.point(N, f"epsilon_telescoping_error[{name}]", float(tele.max()), 1e-12)
        out.point(N, f"epsilon_ratio_increases[{name}]",
                  float(np.sum(np.diff(eps.ratios) > 0)), 0.0)
        out.point(N, f"epsilon_total[{name}]", eps.total)
    return out.rows


def run_oracle(cfg: ExperimentConfig) -> list[ReportRow]:
    out = _Rows(cfg)
    driver = build_driver(cfg.model)
    for text in cfg.params.get("expressions", ["X1"]):
        f = parse_expression(text)
        out.point(f.last, f"upper_expectation[{text}]", upper_expectation_exact(driver, f))
        out.point(f.last, f"lower_expectation[{text}]", lower_expectation(driver, f))
        out.point(f.last, f"choquet[{text}]", choquet_integral(survival_function(driver, f)).value)
    return out.rows


RUNNERS: dict[str, Callable[[ExperimentConfig], list[ReportRow]]] = {
    "axioms": run_axioms, "capacity": run_capacity, "choquet": run_choquet,
    "maximal": run_maximal, "rademacher_mensov": run_rademacher_mensov,
    "thm41": run_slln, "thm42": run_slln, "thm43": run_slln, "cor41": run_slln,
    "seq_lemma": run_seq_lemma, "oracle": run_oracle,
}


def run_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    return RUNNERS[cfg.experiment](cfg)
