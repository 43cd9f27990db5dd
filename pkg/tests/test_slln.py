import math

import numpy as np
import pytest

from sublaw.errors import HypothesisUnmet
from sublaw.expectation import (DiscreteDistribution, MCPlan, RandomFunctional, ScenarioSet,
                                coordinate, scenario_set)
from sublaw.sequences import (BlockStructure, make_blockwise_m_dependent,
                              make_independent_sequence, make_m_dependent, make_orthogonal,
                              quasi_orthogonal_certificate, signs, unit_variance_pair,
                              window_function)
from sublaw.slln import (ConditionResult, ConvergenceReport, NormalizerSpec, ScenarioVariable,
                         check_domination, check_summability, dyadic_checkpoints, golden_band,
                         golden_bands, kronecker_check, power_log_tail, power_tail,
                         run_corollary41, run_theorem41, run_theorem42, run_theorem43)

X1 = coordinate(1)
PLAN = MCPlan(40, seed=11, pool_size=8)


def _report(worst, band=0.1, conditions=()):
    w = np.asarray(worst, dtype=float)
    return ConvergenceReport("t", tuple(range(1, len(w) + 1)), w, -w / 2, band, tuple(conditions))


# -- summability -----------------------------------------------------------------

def test_summability_examples():
    N = 10**4
    k = np.arange(1, N + 1, dtype=float)
    res = check_summability(np.ones(N), 1 / k**2, power_tail(N, 2.0))
    assert res.verdict == "converged"
    assert abs(res.prefix_sum - math.pi**2 / 6) <= 1e-4
    assert res.prefix_sum <= math.pi**2 / 6 <= res.upper_estimate
    # harmonic dyadic blocks shrink towards log 2, so the prefix cannot decide
    harmonic = check_summability(k, 1 / k**2)
    assert harmonic.verdict == "unknown" and harmonic.upper_estimate == math.inf
    assert check_summability(k**2, 1 / k**2).verdict == "diverging"
    zero = check_summability(np.zeros(50))
    assert zero.verdict == "converged" and zero.prefix_sum == 0.0
    assert check_summability(1 / k**2).verdict == "unknown"
    with pytest.raises(ValueError):
        check_summability([1.0, -1.0])


@pytest.mark.parametrize("N,p", [(50, 1.5), (200, 2.0), (1000, 1.2)])
def test_tail_bounds_dominate_direct_sums(N, p):
    k = np.arange(N + 1, 2 * 10**6, dtype=float)
    assert power_tail(N, p) >= np.sum(k**-p)
    assert power_log_tail(N, p) >= np.sum(k**-p * np.log2(k) ** 2)
    assert power_tail(N, 1.0) == math.inf and power_log_tail(N, 0.9) == math.inf


def test_normalizers():
    assert list(NormalizerSpec()(4)) == [1, 2, 3, 4]
    assert list(NormalizerSpec("power", 0.5)(4)) == [1, math.sqrt(2), math.sqrt(3), 2]
    assert list(NormalizerSpec("custom", values=(1, 1, 5))(3)) == [1, 1, 5]
    pow2 = NormalizerSpec("power_phi", r=1.0, blocks=BlockStructure.powers_of_two(64))
    assert np.array_equal(pow2(64), np.arange(1, 65, dtype=float))
    unit = NormalizerSpec("power_phi", r=1.0, blocks=BlockStructure.unit(8))
    assert list(unit(5)) == [1, 4, 6, 16, 20]
    for bad in (dict(kind="custom", values=(0.5, 1)), dict(kind="custom", values=(2, 1)),
                dict(kind="power_phi", r=2.0, blocks=BlockStructure.unit(4)),
                dict(kind="power", exponent=0.0), dict(kind="nope")):
        with pytest.raises(ValueError):
            NormalizerSpec(**bad)


# -- verdicts ----------------------------------------------------------------------

def test_verdict_rules():
    assert _report([0.3, 0.2, 0.05]).verdict == "consistent"
    assert _report([0.3, 0.02, 0.05]).verdict == "inconclusive"
    assert _report([0.3, 0.2, 0.15]).verdict == "inconclusive"
    assert _report([0.1, 0.2, 0.3]).verdict == "violated"
    assert _report([0.0, 0.0, 0.0]).verdict == "consistent"
    undecided = ConditionResult("summability", None)
    assert _report([0.3, 0.2, 0.05], conditions=[undecided]).verdict == "inconclusive"


def test_golden_bands_are_pilot_derived():
    bands = golden_bands()
    for name in ("thm41", "thm42", "thm43", "cor41", "thm43_growing"):
        entry = bands[name]
        assert entry["band"] == math.ceil(entry["factor"] * entry["pilot_worst"] * 1000) / 1000
        assert golden_band(name) == entry["band"]
    assert dyadic_checkpoints(2, 4) == (4, 8, 16)


# -- domination --------------------------------------------------------------------

def test_domination_examples():
    d = unit_variance_pair()
    model = make_independent_sequence(d, 16)
    t = [0.25, 0.5, 1.0, 1.2, 1.5, 2.0]
    same = check_domination(model, ScenarioVariable(d, X1), 1.0, t, r=1.5)
    assert np.array_equal(same.lhs, same.rhs) and same.all_pass
    assert same.moment is not None and same.r == 1.5
    bounded = check_domination(make_independent_sequence(signs(), 8),
                               ScenarioVariable(signs(), X1), 1.0, [1.5, 3.0])
    assert np.all(bounded.lhs == 0) and np.all(bounded.rhs == 0)
    alternating = make_independent_sequence(signs(), 16, scales=[1.0, 0.5] * 8)
    heavy = ScenarioVariable(ScenarioSet.of(DiscreteDistribution.uniform([-2, 2])), X1)
    mixed = check_domination(alternating, heavy, 1.0, np.linspace(0.1, 2.5, 25))
    assert mixed.all_pass
    light = ScenarioVariable(ScenarioSet.of(DiscreteDistribution.uniform([-0.5, 0.5])), X1)
    assert not check_domination(alternating, light, 1.0, [0.75]).all_pass


# -- Theorem 4.1 --------------------------------------------------------------------

def test_thm41_zero_model():
    model = make_independent_sequence(scenario_set([(0, 1.0)]), 64)
    rep = run_theorem41(model, NormalizerSpec(), PLAN, [16, 32, 64], 0.01)
    assert np.all(rep.worst == 0.0) and rep.verdict == "consistent"


def test_thm41_telescoping_window():
    n = 256
    model = make_m_dependent(signs(), window_function("difference", 1), 1, n)
    cps = dyadic_checkpoints(3, 8)
    rep = run_theorem41(model, NormalizerSpec(), MCPlan(200, seed=5), cps, 0.5)
    bound = 2.0 / np.array(cps)
    assert np.all(rep.upper <= bound) and np.all(rep.lower >= -bound)
    assert all(c.passed for c in rep.conditions)


def test_thm41_sign_flip_symmetry():
    n = 512
    avg = window_function("average", 1)
    neg = RandomFunctional.template(lambda x: -x.mean(axis=-1), 2, "-avg")
    plan = MCPlan(50, seed=9, pool_size=8)
    cps = dyadic_checkpoints(5, 9)
    a = run_theorem41(make_m_dependent(unit_variance_pair(), avg, 1, n), NormalizerSpec(),
                      plan, cps, 1.0)
    b = run_theorem41(make_m_dependent(unit_variance_pair(), neg, 1, n), NormalizerSpec(),
                      plan, cps, 1.0)
    assert np.array_equal(a.upper, -b.lower) and np.array_equal(a.lower, -b.upper)
    assert np.array_equal(a.worst, b.worst)


def test_thm41_hypotheses_are_enforced():
    model = make_independent_sequence(signs(), 1024)
    with pytest.raises(HypothesisUnmet) as exc:
        run_theorem41(model, NormalizerSpec("power", 0.4), PLAN, [512, 1024], 1.0)
    assert exc.value.condition == "summability"
    drift = make_independent_sequence(scenario_set([(0, 0.5), (1, 0.5)]), 64)
    with pytest.raises(HypothesisUnmet):
        run_theorem41(drift, NormalizerSpec(), PLAN, [64], 1.0)
    blockwise = make_blockwise_m_dependent(BlockStructure.powers_of_two(64), signs(),
                                           window_function("identity", 0), 0)
    with pytest.raises(HypothesisUnmet):
        run_theorem41(blockwise, NormalizerSpec(), PLAN, [64], 1.0)


def test_thm41_summability_unknown_is_inconclusive():
    # a_n = n^0.8: sum n^-1.6 converges but no tail bound is derivable from a custom list
    n = 256
    model = make_independent_sequence(signs(), n)
    norm = NormalizerSpec("custom", values=tuple(np.arange(1, n + 1) ** 0.8))
    rep = run_theorem41(model, norm, PLAN, [64, 128, 256], 10.0)
    assert rep.conditions[-1].passed is None
    assert rep.verdict == "inconclusive"


# -- Theorem 4.2 --------------------------------------------------------------------

def test_thm42_powers_of_two_reduce_to_linear():
    n = 1024
    blocks = BlockStructure.powers_of_two(n)
    model = make_blockwise_m_dependent(blocks, unit_variance_pair(),
                                       window_function("identity", 0), 0)
    Z = ScenarioVariable(unit_variance_pair(), X1)
    rep = run_theorem42(model, Z, 1.0, PLAN, dyadic_checkpoints(6, 10), 1.0)
    diags = {d.statistic: d for d in rep.diagnostics}
    assert diags["phi"].value == 1.0
    assert diags["truncation_events_beyond_index"].value == 0.0
    assert diags["truncation_events_beyond_index"].n == math.ceil(math.sqrt(2))
    ind = make_independent_sequence(unit_variance_pair(), n)
    ref = run_theorem41(ind, NormalizerSpec(), PLAN, dyadic_checkpoints(6, 10), 1.0)
    assert np.array_equal(rep.upper, ref.upper) and np.array_equal(rep.lower, ref.lower)


def test_thm42_bounded_truncation_index():
    n = 512
    blocks = BlockStructure.powers_of_two(n)
    model = make_blockwise_m_dependent(blocks, scenario_set([(-3, 0.5), (3, 0.5)]),
                                       window_function("identity", 0), 0)
    Z = ScenarioVariable(scenario_set([(-3, 0.5), (3, 0.5)]), X1)
    rep = run_theorem42(model, Z, 1.5, PLAN, [128, 256, 512], 1.0)
    diags = {d.statistic: d for d in rep.diagnostics}
    assert diags["truncation_events_beyond_index"].n == math.ceil(3**1.5)
    assert diags["truncation_events_beyond_index"].value == 0.0
    assert diags["truncation_events"].value > 0


def test_thm42_unit_blocks():
    n = 4096
    model = make_blockwise_m_dependent(BlockStructure.unit(n), signs(),
                                       window_function("identity", 0), 0)
    rep = run_theorem42(model, ScenarioVariable(signs(), X1), 1.0, MCPlan(100, seed=21),
                        dyadic_checkpoints(8, 12), 1.0)
    assert rep.worst[-1] < 0.01
    assert {d.statistic: d.value for d in rep.diagnostics}["phi"] == 4096.0


def test_thm42_hypotheses():
    model = make_blockwise_m_dependent(BlockStructure.powers_of_two(64), unit_variance_pair(),
                                       window_function("identity", 0), 0)
    Z = ScenarioVariable(unit_variance_pair(), X1)
    with pytest.raises(HypothesisUnmet):
        run_theorem42(model, Z, 2.0, PLAN, [64], 1.0)
    small = ScenarioVariable(ScenarioSet.of(DiscreteDistribution.uniform([-0.5, 0.5])), X1)
    with pytest.raises(HypothesisUnmet) as exc:
        run_theorem42(model, small, 1.0, PLAN, [64], 1.0)
    assert exc.value.condition == "domination"
    with pytest.raises(HypothesisUnmet):
        run_theorem42(make_independent_sequence(signs(), 64), Z, 1.0, PLAN, [64], 1.0)


# -- Theorem 4.3 and Corollary 4.1 ---------------------------------------------------

def test_thm43_zero_and_certificate():
    zero = make_orthogonal(64, theta=scenario_set([(0, 1.0)]))
    rep = run_theorem43(zero, PLAN, [16, 32, 64], 0.01)
    assert np.all(rep.worst == 0.0)
    with pytest.raises(HypothesisUnmet):
        run_theorem43(make_independent_sequence(signs(), 64), PLAN, [64], 1.0)


def test_thm43_block_increment_rows():
    n = 1024
    rep = run_theorem43(make_orthogonal(n, theta=unit_variance_pair()), PLAN,
                        dyadic_checkpoints(6, 10), 1.0)
    rows = [d for d in rep.diagnostics if d.statistic == "block_exceedance"]
    assert [d.n for d in rows] == [2**k for k in range(1, 11)]
    assert all(d.passed for d in rows)
    thr = [d.value for d in rep.diagnostics if d.statistic == "block_threshold"]
    assert np.all(np.diff(thr) <= 0)


def test_thm43_growing_variance():
    # sigma_k = k^0.4: the ratio decays like n^-0.1, slower than the sampling noise
    n = 2**14
    model = make_orthogonal(n, theta=signs(), scales=np.arange(1, n + 1) ** 0.4)
    rep = run_theorem43(model, MCPlan(2000, seed=33), dyadic_checkpoints(10, 14),
                        golden_band("thm43_growing"), variance_growth=0.8)
    assert all(c.passed for c in rep.conditions)
    assert rep.worst[-1] < rep.band and rep.worst[-1] < rep.worst[0]
    assert rep.verdict != "violated"


def test_cor41_degenerate_weights_match_thm43():
    model = make_orthogonal(512, theta=unit_variance_pair())
    a = run_theorem43(model, PLAN, dyadic_checkpoints(7, 9), 1.0)
    b = run_corollary41(model, [1.0], PLAN, dyadic_checkpoints(7, 9), 1.0)
    assert np.array_equal(a.upper, b.upper) and np.array_equal(a.lower, b.lower)
    assert [d.bound for d in a.diagnostics] == [d.bound for d in b.diagnostics]


def test_cor41_window_model_and_inflation():
    n = 1024
    model = make_m_dependent(unit_variance_pair(), window_function("average", 1), 1, n)
    rep = run_corollary41(model, [1.0, 1.0], MCPlan(100, seed=44), dyadic_checkpoints(8, 10), 0.2)
    assert all(c.passed for c in rep.conditions)
    geo = [2.0**-j for j in range(40)]
    assert quasi_orthogonal_certificate(model, geo).inflation == pytest.approx(3.0, abs=1e-11)
    orth = make_orthogonal(n, theta=unit_variance_pair())
    plain = run_theorem43(orth, PLAN, [256], 1.0)
    inflated = run_corollary41(orth, [1.0] + geo[1:], PLAN, [256], 1.0)
    for a, b in zip(plain.diagnostics, inflated.diagnostics):
        if a.statistic == "block_exceedance":
            assert b.bound == pytest.approx(3.0 * a.bound, rel=1e-11)
    with pytest.raises(HypothesisUnmet):
        run_corollary41(model, [1.0], PLAN, [256], 1.0)


# -- Kronecker -------------------------------------------------------------------------

def test_kronecker_examples():
    k = np.arange(1, 10**5 + 1, dtype=float)
    alt = kronecker_check((-1) ** k / k, k)
    assert alt.hypothesis_met and alt.passed
    assert abs(alt.normalized[-1]) <= alt.bound
    zero = kronecker_check(np.zeros(100), np.arange(1, 101, dtype=float))
    assert zero.passed and zero.normalized[-1] == 0.0
    div = kronecker_check(k[:1000], k[:1000])
    assert not div.hypothesis_met and div.passed is None
    with pytest.raises(ValueError):
        kronecker_check([1.0, 2.0], [2.0, 1.0])
