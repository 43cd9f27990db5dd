"""Discrete base laws and the scenario families built from them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

PROB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported law on the real line.

    ``atoms`` is kept in canonical form: values strictly increasing,
    duplicate values merged, zero-mass atoms dropped.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        merged: dict[float, float] = {}
        for value, prob in self.atoms:
            value, prob = float(value), float(prob)
            if not np.isfinite(value):
                raise ValueError(f"atom value must be finite, got {value}")
            if prob < 0.0 or prob > 1.0:
                raise ValueError(f"atom probability {prob} outside [0, 1]")
            merged[value] = merged.get(value, 0.0) + prob
        atoms = tuple(sorted((v, p) for v, p in merged.items() if p > 0.0))
        if not atoms:
            raise ValueError("distribution needs at least one atom with positive mass")
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def point(cls, value: float) -> "DiscreteDistribution":
        return cls(((value, 1.0),))

    @classmethod
    def uniform(cls, values: Iterable[float]) -> "DiscreteDistribution":
        values = list(values)
        return cls(tuple((v, 1.0 / len(values)) for v in values))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "DiscreteDistribution":
        return cls(tuple((float(v), float(p)) for v, p in pairs))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    def expect(self, fn=None) -> float:
        vals = self.values if fn is None else np.asarray(fn(self.values), dtype=float)
        return float(np.dot(self.probs, vals))

    def __repr__(self):
        body = ", ".join(f"{v:g}:{p:g}" for v, p in self.atoms)
        return f"DiscreteDistribution({body})"


@dataclass(frozen=True)
class ScenarioSet:
    """Ordered, nonempty family of one-step laws.

    The driver of every model: at each coordinate a selector picks one of
    these laws, possibly depending on the history. Order matters only for
    tie-breaking (lowest index wins).
    """

    scenarios: tuple[DiscreteDistribution, ...]

    def __post_init__(self):
        scenarios = tuple(self.scenarios)
        if not scenarios:
            raise ValueError("scenario set must contain at least one law")
        for s in scenarios:
            if not isinstance(s, DiscreteDistribution):
                raise TypeError(f"expected DiscreteDistribution, got {type(s).__name__}")
        object.__setattr__(self, "scenarios", scenarios)

    @classmethod
    def of(cls, *laws: DiscreteDistribution) -> "ScenarioSet":
        return cls(tuple(laws))

    def __len__(self):
        return len(self.scenarios)

    def __getitem__(self, i):
        return self.scenarios[i]

    @cached_property
    def support(self) -> np.ndarray:
        """Sorted union of the atom values of all scenarios."""
        return np.array(sorted({v for s in self.scenarios for v, _ in s.atoms}))

    @cached_property
    def prob_matrix(self) -> np.ndarray:
        """(n_scenarios, n_support) probabilities on the common support."""
        index = {v: i for i, v in enumerate(self.support.tolist())}
        mat = np.zeros((len(self.scenarios), len(index)))
        for row, s in enumerate(self.scenarios):
            for v, p in s.atoms:
                mat[row, index[v]] = p
        return mat

    @cached_property
    def cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.prob_matrix, axis=1)
        # pin every row to exactly 1 from its last charged atom onward
        for row, probs in enumerate(self.prob_matrix):
            last = np.flatnonzero(probs)[-1]
            cdf[row, last:] = 1.0
        return cdf

    @cached_property
    def means(self) -> np.ndarray:
        return self.prob_matrix @ self.support

    @cached_property
    def second_moments(self) -> np.ndarray:
        return self.prob_matrix @ self.support**2

    @property
    def bound(self) -> float:
        return float(np.abs(self.support).max())

    def sample(self, index: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        """Inverse-CDF draw: scenario ``index[i]`` driven by ``uniforms[i]``."""
        cdf = self.cdf
        pos = np.zeros(np.shape(index), dtype=np.intp)
        for j in range(cdf.shape[1] - 1):
            pos += uniforms >= cdf[:, j][index]
        return self.support[pos]

    def sample_fixed(self, scenario: int, uniforms: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.cdf[scenario], uniforms, side="right")
        return self.support[np.minimum(pos, len(self.support) - 1)]


def scenario_set(*atom_lists) -> ScenarioSet:
    """Build a ScenarioSet from plain ``[(value, prob), ...]`` lists."""
    return ScenarioSet(tuple(DiscreteDistribution.from_pairs(a) for a in atom_lists))
