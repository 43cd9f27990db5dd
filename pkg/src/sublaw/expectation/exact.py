"""Exact upper expectation by backward induction over scenario choices.

With a finite, discrete scenario family the supremum over all
history-dependent selectors equals the iterated one-step supremum taken
from the last coordinate backward. Coordinates the functional does not
read integrate out trivially, so only ``f.coords`` are enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from sublaw.errors import EnumerationCapExceeded, InvalidWindow
from sublaw.expectation.functionals import RandomFunctional, truncate
from sublaw.expectation.laws import ScenarioSet

DEFAULT_CAP = 10**7


def enumeration_grid(driver: ScenarioSet, n_coords: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All paths over the common support: shape (u,)*n_coords + (n_coords,)."""
    u = len(driver.support)
    leaves = u**n_coords
    if leaves > cap:
        raise EnumerationCapExceeded(leaves, cap)
    idx = np.indices((u,) * n_coords)
    return np.moveaxis(driver.support[idx], 0, -1)


def leaf_values(driver: ScenarioSet, f: RandomFunctional, horizon: Optional[int] = None,
                cap: int = DEFAULT_CAP) -> np.ndarray:
    if horizon is not None:
        f.check_horizon(horizon)
    grid = enumeration_grid(driver, len(f.coords), cap)
    return f(grid)


def induct(values: np.ndarray, driver: ScenarioSet, n_coords: int, want_policy: bool = False):
    """Fold the last ``n_coords`` axes of ``values`` by max over scenarios.

    Leading axes are batch axes. Returns (value, policies) where
    ``policies[i]`` holds the chosen scenario index for the i-th coordinate
    as a function of the earlier coordinates (ties -> lowest index).
    """
    probs_t = driver.prob_matrix.T
    v = values
    policies = []
    for _ in range(n_coords):
        scores = v @ probs_t
        if want_policy:
            policies.append(np.argmax(scores, axis=-1))
        v = scores.max(axis=-1)
    return v, policies[::-1]


def upper_expectation_exact(driver: ScenarioSet, f: RandomFunctional,
                            horizon: Optional[int] = None, cap: int = DEFAULT_CAP) -> float:
    """sup over all history-dependent selectors of E[f]."""
    values = leaf_values(driver, f, horizon, cap)
    v, _ = induct(values, driver, len(f.coords))
    return float(v)


def upper_expectations_exact(driver: ScenarioSet, fs: Sequence[RandomFunctional],
                             cap: int = DEFAULT_CAP) -> np.ndarray:
    """Batch version for functionals sharing the same coordinates."""
    coords = fs[0].coords
    if any(g.coords != coords for g in fs):
        raise InvalidWindow("batched functionals must share coordinates")
    grid = enumeration_grid(driver, len(coords), cap)
    values = np.stack([g(grid) for g in fs])
    v, _ = induct(values, driver, len(coords))
    return np.asarray(v, dtype=float)


def lower_expectation(driver: ScenarioSet, f: RandomFunctional,
                      horizon: Optional[int] = None, cap: int = DEFAULT_CAP) -> float:
    return -upper_expectation_exact(driver, -f, horizon, cap)


@dataclass(frozen=True)
class Divergent:
    """Truncated expectations did not settle along the schedule."""

    levels: tuple[float, ...]
    values: tuple[float, ...]

    def __bool__(self):
        return False


def extended_expectation(driver: ScenarioSet, f: RandomFunctional, c_schedule: Sequence[float],
                         tol: float = 1e-9, horizon: Optional[int] = None,
                         cap: int = DEFAULT_CAP):
    """Limit of E[f^(c)] as c grows, read off along ``c_schedule``.

    Returns the last truncated value once successive values differ by less
    than ``tol``; otherwise a :class:`Divergent` carrying the trajectory.
    """
    levels = [float(c) for c in c_schedule]
    if len(levels) < 3:
        raise ValueError("c_schedule needs at least 3 levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("c_schedule must be strictly increasing")
    if levels[0] < 0:
        raise ValueError("truncation levels must be nonnegative")
    values = leaf_values(driver, f, horizon, cap)
    n = len(f.coords)
    stack = np.stack([np.clip(values, -c, c) for c in levels])
    v, _ = induct(stack, driver, n)
    v = [float(x) for x in v]
    if abs(v[-1] - v[-2]) < tol:
        return v[-1]
    return Divergent(tuple(levels), tuple(v))


__all__ = [
    "DEFAULT_CAP", "Divergent", "enumeration_grid", "extended_expectation", "induct",
    "leaf_values", "lower_expectation", "truncate", "upper_expectation_exact",
    "upper_expectations_exact",
]
