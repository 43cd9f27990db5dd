"""Random enumerable instances and the defining properties of an upper expectation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sublaw.expectation.exact import lower_expectation, upper_expectation_exact
from sublaw.expectation.functionals import RandomFunctional, coordinate, partial_sum
from sublaw.expectation.laws import DiscreteDistribution, ScenarioSet

AXIOMS = ("monotonicity", "constant_preserving", "sub_additivity", "positive_homogeneity",
          "cash_translatability", "lower_below_upper")


def random_scenario_set(rng: np.random.Generator, max_scenarios: int = 3,
                        max_atoms: int = 4) -> ScenarioSet:
    """Up to ``max_scenarios`` laws on half-integer supports with sixteenth masses.

    Dyadic atoms and masses keep every expectation exact in binary floating point.
    """
    laws = []
    for _ in range(int(rng.integers(1, max_scenarios + 1))):
        k = int(rng.integers(1, max_atoms + 1))
        values = rng.choice(np.arange(-6, 7) / 2, size=k, replace=False)
        cuts = np.sort(rng.choice(np.arange(1, 16), size=k - 1, replace=False))
        probs = np.diff(np.concatenate([[0], cuts, [16]])) / 16
        laws.append(DiscreteDistribution(tuple(zip(values.tolist(), probs.tolist()))))
    return ScenarioSet(tuple(laws))


def random_table(rng: np.random.Generator, driver: ScenarioSet, n_coords: int,
                 scale: float = 5.0) -> RandomFunctional:
    """A functional of coordinates 1..n_coords given by a random lookup table."""
    shape = (len(driver.support),) * n_coords
    table = rng.uniform(-scale, scale, size=shape)
    return RandomFunctional.table(range(1, n_coords + 1), driver.support, table, "table")


@dataclass(frozen=True)
class AxiomInstance:
    driver: ScenarioSet
    n_coords: int
    X: RandomFunctional
    Y: RandomFunctional
    c: float
    lam: float


def random_instance(rng: np.random.Generator, max_scenarios: int = 3, max_coords: int = 4,
                    max_atoms: int = 4) -> AxiomInstance:
    driver = random_scenario_set(rng, max_scenarios, max_atoms)
    n = int(rng.integers(1, max_coords + 1))
    return AxiomInstance(driver, n, random_table(rng, driver, n), random_table(rng, driver, n),
                         float(rng.uniform(-5, 5)), float(rng.uniform(0, 4)))


def axiom_violations(inst: AxiomInstance) -> dict[str, float]:
    """Amount by which each defining property fails (0 when it holds exactly)."""
    d, X, Y, c, lam = inst.driver, inst.X, inst.Y, inst.c, inst.lam
    E = lambda f: upper_expectation_exact(d, f)  # noqa: E731
    eX, eY = E(X), E(Y)
    dominating = X + abs(Y)
    return {
        "monotonicity": max(0.0, eX - E(dominating)),
        "constant_preserving": abs(E(RandomFunctional.constant(c)) - c),
        "sub_additivity": max(0.0, E(X + Y) - eX - eY),
        "positive_homogeneity": abs(E(X * lam) - lam * eX),
        "cash_translatability": abs(E(X + c) - eX - c),
        "lower_below_upper": max(0.0, lower_expectation(d, X) - eX),
    }


def additivity_gap(driver: ScenarioSet, n_coords: int) -> float:
    """|E[X_1 + ... + X_n] - sum E[X_i]| for an independent driver sequence."""
    whole = upper_expectation_exact(driver, partial_sum(n_coords))
    parts = sum(upper_expectation_exact(driver, coordinate(k)) for k in range(1, n_coords + 1))
    return abs(whole - parts)
