"""Sublinear expectations realized as upper envelopes over scenario strategies."""

from sublaw.expectation.exact import (DEFAULT_CAP, Divergent, enumeration_grid,
                                      extended_expectation, induct, leaf_values,
                                      lower_expectation, upper_expectation_exact,
                                      upper_expectations_exact)
from sublaw.expectation.functionals import (LipschitzMeta, RandomFunctional, check_lipschitz,
                                            constant, coordinate, partial_sum, truncate)
from sublaw.expectation.laws import DiscreteDistribution, ScenarioSet, scenario_set
from sublaw.expectation.montecarlo import (EstimateWithCI, MCPlan, optimal_selector,
                                           pool_max_mean, upper_expectation_mc)
from sublaw.expectation.selectors import (ConstantSelector, GreedySelector, PathState,
                                          RandomizedSelector, Selector, TableSelector,
                                          default_pool, simulate_driver, simulate_paths)

__all__ = [
    "DEFAULT_CAP", "ConstantSelector", "DiscreteDistribution", "Divergent", "EstimateWithCI",
    "GreedySelector", "LipschitzMeta", "MCPlan", "PathState", "RandomFunctional",
    "RandomizedSelector", "ScenarioSet", "Selector", "TableSelector", "check_lipschitz",
    "constant", "coordinate", "default_pool", "enumeration_grid", "extended_expectation",
    "induct", "leaf_values", "lower_expectation", "optimal_selector", "partial_sum",
    "pool_max_mean", "scenario_set", "simulate_driver", "simulate_paths", "truncate",
    "upper_expectation_exact", "upper_expectation_mc", "upper_expectations_exact",
]
