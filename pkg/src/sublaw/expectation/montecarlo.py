"""Monte Carlo lower-bound estimation of upper expectations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from sublaw.expectation.exact import DEFAULT_CAP, enumeration_grid, induct
from sublaw.expectation.functionals import RandomFunctional
from sublaw.expectation.laws import ScenarioSet
from sublaw.expectation.selectors import (Selector, TableSelector, default_pool,
                                          simulate_paths)

Z_95 = 1.959963984540054


@dataclass(frozen=True)
class EstimateWithCI:
    value: float
    ci_low: float
    ci_high: float
    replications: int
    seed: int
    kind: str                     # "exact" or "lower_bound_mc"
    selector_id: str = ""

    def __post_init__(self):
        if self.kind not in ("exact", "lower_bound_mc"):
            raise ValueError(f"unknown estimate kind {self.kind!r}")
        if not self.ci_low <= self.value <= self.ci_high:
            raise ValueError("estimate must lie inside its interval")
        if self.kind == "exact" and not self.ci_low == self.value == self.ci_high:
            raise ValueError("exact estimates carry a degenerate interval")

    @classmethod
    def exact(cls, value: float) -> "EstimateWithCI":
        return cls(value, value, value, 0, 0, "exact")

    @property
    def half_width(self) -> float:
        return self.ci_high - self.value


@dataclass(frozen=True)
class MCPlan:
    replications: int
    seed: int
    pool_size: int = 32
    selectors: Optional[tuple[Selector, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if self.selectors is not None and not self.selectors:
            raise ValueError("explicit selector pool must be nonempty")

    def pool(self, driver: ScenarioSet) -> list[Selector]:
        if self.selectors is not None:
            return list(self.selectors)
        return default_pool(driver, self.pool_size, self.seed)


def pool_max_mean(samples: np.ndarray, pool: Sequence[Selector], seed: int) -> EstimateWithCI:
    """Best selector's mean with a normal-approximation 95% interval.

    ``samples`` has shape (len(pool), replications).
    """
    R = samples.shape[1]
    means = samples.mean(axis=1)
    best = int(np.argmax(means))
    sd = float(samples[best].std(ddof=1))
    half = Z_95 * sd / float(np.sqrt(R))
    value = float(means[best])
    return EstimateWithCI(value, value - half, value + half, R, seed, "lower_bound_mc",
                          pool[best].id)


def upper_expectation_mc(driver: ScenarioSet, f: RandomFunctional, plan: MCPlan) -> EstimateWithCI:
    """Max over a finite selector pool of the empirical mean of ``f``.

    Every selector realizes one admissible law, so this estimates a lower
    bound of the upper expectation; the interval covers the chosen
    selector's mean only.
    """
    pool = plan.pool(driver)
    paths = simulate_paths(driver, pool, f.last, plan.replications, plan.seed, keep=f.coords)
    return pool_max_mean(f(paths), pool, plan.seed)


def optimal_selector(driver: ScenarioSet, f: RandomFunctional,
                     cap: int = DEFAULT_CAP) -> TableSelector:
    """The maximizing strategy found by backward induction, as a table."""
    grid = enumeration_grid(driver, len(f.coords), cap)
    _, policies = induct(f(grid), driver, len(f.coords), want_policy=True)
    support = driver.support
    by_coord = {}
    for i, c in enumerate(f.coords):
        table = {}
        for idx in np.ndindex(*policies[i].shape):
            key = tuple(float(support[j]) for j in idx)
            table[key] = int(policies[i][idx])
        by_coord[c] = table
    return TableSelector(by_coord, key_coords=f.coords, name=f"optimal[{f.label}]")
