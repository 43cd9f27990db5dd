from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import classical_mean, recursive_upper
from sublaw.capacity import (Interval, IntervalEvent, PathEvent, GridSurvival, StepSurvival,
                             choquet_integral, choquet_moment, counterexample_model,
                             linear_grid, lower_capacity, outer_capacity, sample_survival,
                             survival_function, survival_grid, truncated_capacity_integral,
                             upper_capacity)
from sublaw.errors import NonMeasurableEvent, UnboundedSupport
from sublaw.expectation import (DiscreteDistribution, ScenarioSet, coordinate, enumeration_grid,
                                scenario_set,
                                truncate, upper_expectation_exact)
from sublaw.expectation.axioms import random_scenario_set, random_table

X1, X2 = coordinate(1), coordinate(2)
SIGNS = scenario_set([(-1, 0.5), (1, 0.5)])
TWO = scenario_set([(0, 0.5), (2, 0.5)], [(1, 1.0)])
CE = counterexample_model()


def step_choquet_oracle(driver, f):
    """Choquet sum from V(f >= v) at each attained value, in Fractions."""
    values = sorted(set(float(v) for v in np.ravel(f(enumeration_grid(driver, len(f.coords))))))
    total = Fraction(values[0])
    for lo, hi in zip(values, values[1:]):
        v = recursive_upper(driver, f.indicator(">=", hi))
        total += Fraction(v) * (Fraction(hi) - Fraction(lo))
    return float(total)


# -- capacities -------------------------------------------------------------

def test_counterexample_values():
    assert upper_capacity(CE, IntervalEvent.closed(0, 1)) == 1.0
    assert upper_capacity(CE, IntervalEvent.closed(1, 2)) == 1.0
    assert upper_capacity(CE, IntervalEvent.point(1)) == 0.0
    meet = IntervalEvent.closed(0, 1).intersect(IntervalEvent.closed(1, 2))
    assert meet.intervals == IntervalEvent.point(1).intervals
    assert upper_capacity(CE, meet) == 0.0


def test_lower_capacity_examples():
    assert lower_capacity(CE, IntervalEvent.closed(0, 1)) == 0.0
    assert lower_capacity(CE, IntervalEvent.closed(0, 2)) == 1.0
    assert lower_capacity(CE, IntervalEvent.empty()) == 0.0
    assert upper_capacity(CE, IntervalEvent.empty()) == 0.0


def test_discrete_capacity_examples():
    ge0 = PathEvent.where(X1, ">=", 0)
    assert upper_capacity(SIGNS, ge0) == 0.5
    d = scenario_set([(-1, 0.5), (1, 0.5)], [(1, 1.0)])
    assert upper_capacity(d, PathEvent.where(X1, ">=", 1)) == 1.0
    assert upper_capacity(d, IntervalEvent.closed(1, 5)) == 1.0
    assert lower_capacity(d, IntervalEvent.closed(1, 5)) == 0.5


def test_outer_capacity_examples():
    a = IntervalEvent.closed(0, 1)
    assert outer_capacity(CE, a, [a]) == upper_capacity(CE, a)
    assert outer_capacity(CE, IntervalEvent.point(1),
                          [IntervalEvent.closed(Fraction(9, 10), Fraction(11, 10))]) == 0.0
    parts = [IntervalEvent.closed(0, Fraction(1, 2)), IntervalEvent.closed(Fraction(1, 2), 1)]
    assert outer_capacity(CE, a, parts) <= sum(upper_capacity(CE, p) for p in parts)
    with pytest.raises(ValueError):
        outer_capacity(CE, a, [IntervalEvent.closed(0, Fraction(1, 2))])


def test_continuous_model_rejects_path_events():
    with pytest.raises(NonMeasurableEvent):
        upper_capacity(CE, PathEvent.where(X1, ">=", 0))


def test_interval_canonical_form():
    ev = IntervalEvent((Interval(2, 3), Interval(0, 1), Interval(1, 2, False, True)))
    assert ev.intervals == (Interval(0, 3),)
    comp = IntervalEvent.closed(0, 1).complement(Interval(0, 2))
    assert comp.intervals == (Interval(1, 2, False, True),)


@given(st.integers(0, 2**32 - 1))
def test_capacity_axioms_on_enumerable_models(seed):
    rng = np.random.default_rng(seed)
    d = random_scenario_set(rng)
    a, b = sorted(rng.integers(-6, 7, 2) / 2)
    c = float(rng.integers(-6, 7)) / 2
    A = IntervalEvent.closed(a, b)
    B = IntervalEvent.closed(min(a, c), max(b, c))         # contains A
    C = IntervalEvent.closed(c, c + 1)
    vA, vB = upper_capacity(d, A), upper_capacity(d, B)
    assert vA <= vB + 1e-12
    assert upper_capacity(d, A.union(C)) <= vA + upper_capacity(d, C) + 1e-12
    assert upper_capacity(d, IntervalEvent.empty()) == 0.0
    assert upper_capacity(d, IntervalEvent.closed(-10, 10)) == 1.0
    # sandwich with f = 1_A - 1/2 and g = 1_A + |X1| / 10
    ind = A.indicator()
    assert upper_expectation_exact(d, ind - 0.5) <= vA + 1e-12
    assert vA <= upper_expectation_exact(d, ind + abs(X1) / 10) + 1e-12


# -- Choquet ----------------------------------------------------------------

def test_choquet_examples():
    ev = IntervalEvent.closed(1, 2)
    assert choquet_integral(survival_function(TWO, ev.indicator())).value == \
        upper_capacity(TWO, ev)
    uni = ScenarioSet.of(DiscreteDistribution.uniform([0, 1, 2]))
    assert choquet_integral(survival_function(uni, X1)).value == 1.0
    s = survival_function(TWO, X1)
    assert list(s(np.array([0.5, 1.0, 1.5, 2.0, 2.5]))) == [1.0, 1.0, 0.5, 0.5, 0.0]
    assert choquet_integral(s).value == 1.5
    assert step_choquet_oracle(TWO, X1) == 1.5


def test_choquet_is_not_the_upper_expectation():
    # C_V can exceed E-hat: for TWO the upper mean is 1 while C_V = 1.5
    assert upper_expectation_exact(TWO, X1) == 1.0


def test_choquet_moment_examples():
    res = choquet_moment(SIGNS, X1, 3.0)
    assert res.tail_integral == 0.0 and res.moment == 1.0
    uni = ScenarioSet.of(DiscreteDistribution.uniform([0, 1, 2]))
    assert choquet_moment(uni, X1, 1.0).moment == 1.0
    sq = choquet_moment(TWO, X1, 2.0)
    # V(X^2 >= m): 1 on (0,1], 0.5 on (1,4] -> 1 + 1.5
    assert sq.moment == 2.5
    assert sq.moment == step_choquet_oracle(TWO, X1 * X1)
    assert sq.tail_integral == 0.5
    with pytest.raises(ValueError):
        choquet_moment(TWO, X1, 0.5)


def test_grid_choquet_requires_bracketing():
    s = survival_function(TWO, X1)
    g = sample_survival(s, np.linspace(0.5, 1.5, 32))
    with pytest.raises(UnboundedSupport):
        choquet_integral(g)
    # a declared tail bound makes the same grid usable, at the cost of a wider error
    q = choquet_integral(GridSurvival(g.t, g.levels, upper_tail=1.0))
    assert abs(q.value - 1.5) <= q.error_bound and q.error_bound >= 1.0
    with pytest.raises(ValueError):
        choquet_integral(sample_survival(s, np.linspace(-1, 3, 8)))


def test_grid_choquet_error_bound_covers_offgrid_jumps():
    s = survival_function(TWO, X1 * 1.0 + 0.123)
    g = sample_survival(s, survival_grid(-1, 3, 256), convention="left")
    q = choquet_integral(g)
    exact = choquet_integral(s).value
    assert abs(q.value - exact) <= q.error_bound + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_step_choquet_matches_enumeration_oracle(seed):
    rng = np.random.default_rng(seed)
    d = random_scenario_set(rng, max_atoms=3)
    f = random_table(rng, d, int(rng.integers(1, 3)))
    assert choquet_integral(survival_function(d, f)).value == \
        pytest.approx(step_choquet_oracle(d, f), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_singleton_choquet_is_classical(seed):
    rng = np.random.default_rng(seed)
    law = random_scenario_set(rng, max_scenarios=1).scenarios[0]
    d = ScenarioSet.of(law)
    f = random_table(rng, d, 2)
    step = survival_function(d, f)
    assert choquet_integral(step).value == pytest.approx(classical_mean(law, f, 2), abs=1e-12)
    lo, hi = step.support
    grid = linear_grid(lo - 1, hi + 1, 4096)
    q = choquet_integral(sample_survival(step, grid, convention="left"))
    assert abs(q.value - classical_mean(law, f, 2)) <= q.error_bound + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_truncated_tail_integral_dominates(seed):
    rng = np.random.default_rng(seed)
    d = random_scenario_set(rng)
    f = random_table(rng, d, int(rng.integers(1, 3)))
    for c in (0.0, 0.3, 0.5, 1.0, 2.2, 4.0, 7.5, 20.0):
        lhs = upper_expectation_exact(d, truncate(abs(f), c))
        assert lhs <= truncated_capacity_integral(d, f, c) + 1e-12


def test_step_survival_integrate():
    s = StepSurvival(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.75, 0.25]))
    assert s.integrate(0.0, 2.0) == 0.75 + 0.25
    assert s.integrate(-1.0, 0.0) == 1.0
    assert s.integrate(2.0, 5.0) == 0.0
