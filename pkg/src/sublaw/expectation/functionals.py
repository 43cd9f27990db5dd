"""Random variables at finite horizon: real functions of a few path coordinates."""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from numbers import Real
from typing import Callable, Optional, Sequence

import numpy as np

from sublaw.errors import InvalidWindow, NegativeTruncationLevel

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LipschitzMeta:
    """Declared growth bound |f(x)-f(y)| <= C (1 + |x|^m + |y|^m) |x - y|."""

    C: float
    m: int


@dataclass(frozen=True, eq=False)
class RandomFunctional:
    """A real function of the driver coordinates listed in ``coords``.

    ``coords`` are 1-based, strictly increasing. ``fn`` receives an array
    whose last axis holds those coordinates in order and must be
    vectorized over every leading axis. The function must be pure.
    """

    coords: tuple[int, ...]
    fn: ArrayFn
    lipschitz: Optional[LipschitzMeta] = None
    label: str = field(default="f", compare=False)

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if not coords:
            raise InvalidWindow("a functional needs at least one coordinate")
        if any(c < 1 for c in coords):
            raise InvalidWindow(f"coordinates are 1-based, got {coords}")
        if any(b <= a for a, b in zip(coords, coords[1:])):
            raise InvalidWindow(f"coordinates must be strictly increasing, got {coords}")
        object.__setattr__(self, "coords", coords)

    # -- construction -------------------------------------------------

    @classmethod
    def coordinate(cls, k: int) -> "RandomFunctional":
        return cls((k,), lambda x: x[..., 0], LipschitzMeta(1.0, 0), f"X{k}")

    @classmethod
    def constant(cls, c: float, at: int = 1) -> "RandomFunctional":
        c = float(c)
        return cls((at,), lambda x: np.full(x.shape[:-1], c), LipschitzMeta(0.0, 0), repr(c))

    @classmethod
    def template(cls, fn: ArrayFn, width: int, label: str = "g") -> "RandomFunctional":
        """A window function on coordinates 1..width, to be shifted into place."""
        return cls(tuple(range(1, width + 1)), fn, None, label)

    @classmethod
    def table(cls, coords: Sequence[int], support: np.ndarray, table: np.ndarray,
              label: str = "table") -> "RandomFunctional":
        """Lookup table over ``support`` on every coordinate (shape (u,)*len(coords))."""
        support = np.asarray(support, dtype=float)
        table = np.asarray(table, dtype=float)

        def fn(x):
            idx = np.searchsorted(support, x)
            return table[tuple(np.moveaxis(idx, -1, 0))]

        return cls(tuple(coords), fn, None, label)

    # -- basic properties ---------------------------------------------

    @property
    def window(self) -> tuple[int, int]:
        return self.coords[0], self.coords[-1]

    @property
    def first(self) -> int:
        return self.coords[0]

    @property
    def last(self) -> int:
        return self.coords[-1]

    def __call__(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != len(self.coords):
            raise ValueError(f"expected last axis {len(self.coords)}, got {values.shape}")
        out = np.asarray(self.fn(values), dtype=float)
        return np.broadcast_to(out, values.shape[:-1])

    def on_path(self, path: np.ndarray) -> np.ndarray:
        """Evaluate on full paths whose last axis is coordinate 1, 2, ..."""
        path = np.asarray(path, dtype=float)
        if path.shape[-1] < self.last:
            raise InvalidWindow(f"path of length {path.shape[-1]} misses coordinate {self.last}")
        return self(path[..., [c - 1 for c in self.coords]])

    def shifted(self, offset: int) -> "RandomFunctional":
        return RandomFunctional(tuple(c + offset for c in self.coords), self.fn,
                                self.lipschitz, self.label)

    def check_horizon(self, horizon: int) -> None:
        if self.last > horizon:
            raise InvalidWindow(f"window {self.window} exceeds horizon {horizon}")

    # -- algebra ------------------------------------------------------

    def _restrict(self, coords: tuple[int, ...]) -> ArrayFn:
        if coords == self.coords:
            return self.fn
        pos = [coords.index(c) for c in self.coords]
        fn = self.fn
        return lambda x: fn(x[..., pos])

    def combine(self, other, op: Callable, label: str) -> "RandomFunctional":
        if isinstance(other, Real):
            c = float(other)
            fn = self.fn
            return RandomFunctional(self.coords, lambda x: op(fn(x), c), None, label)
        if not isinstance(other, RandomFunctional):
            return NotImplemented
        coords = tuple(sorted(set(self.coords) | set(other.coords)))
        f, g = self._restrict(coords), other._restrict(coords)
        return RandomFunctional(coords, lambda x: op(f(x), g(x)), None, label)

    def map(self, ufunc: Callable[[np.ndarray], np.ndarray], label: str = "") -> "RandomFunctional":
        fn = self.fn
        return RandomFunctional(self.coords, lambda x: ufunc(fn(x)), None,
                                label or f"map({self.label})")

    def __add__(self, other):
        return self.combine(other, operator.add, f"({self.label}+{_name(other)})")

    __radd__ = __add__

    def __sub__(self, other):
        return self.combine(other, operator.sub, f"({self.label}-{_name(other)})")

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self.combine(other, operator.mul, f"{self.label}*{_name(other)}")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Real):
            return NotImplemented
        return self * (1.0 / float(other))

    def __neg__(self):
        fn = self.fn
        meta = self.lipschitz
        return RandomFunctional(self.coords, lambda x: -fn(x), meta, f"-{self.label}")

    def __abs__(self):
        return self.map(np.abs, f"|{self.label}|")

    def __pow__(self, p):
        if not isinstance(p, Real):
            return NotImplemented
        p = float(p)
        return self.map(lambda v: v**p, f"{self.label}^{p:g}")

    def indicator(self, op: str, t: float) -> "RandomFunctional":
        """1{f op t} for op in <, <=, >, >=, ==."""
        cmp = {"<": np.less, "<=": np.less_equal, ">": np.greater,
               ">=": np.greater_equal, "==": np.equal}[op]
        t = float(t)
        return self.map(lambda v: cmp(v, t).astype(float), f"1{{{self.label}{op}{t:g}}}")


def _name(x) -> str:
    return x.label if isinstance(x, RandomFunctional) else f"{x:g}"


def coordinate(k: int) -> RandomFunctional:
    return RandomFunctional.coordinate(k)


def constant(c: float, at: int = 1) -> RandomFunctional:
    return RandomFunctional.constant(c, at)


def partial_sum(n: int, start: int = 1) -> RandomFunctional:
    """X_start + ... + X_n over driver coordinates."""
    coords = tuple(range(start, n + 1))
    return RandomFunctional(coords, lambda x: x.sum(axis=-1), LipschitzMeta(float(len(coords)), 0),
                            f"S[{start}..{n}]")


def truncate(f: RandomFunctional, c: float) -> RandomFunctional:
    """The clamp (-c) v f ^ c, same window as ``f``."""
    c = float(c)
    if c < 0 or np.isnan(c):
        raise NegativeTruncationLevel(f"truncation level must be >= 0, got {c}")
    fn = f.fn
    return RandomFunctional(f.coords, lambda x: np.clip(fn(x), -c, c), f.lipschitz,
                            f"{f.label}^({c:g})")


def check_lipschitz(f: RandomFunctional, rng: np.random.Generator, n_pairs: int = 1000,
                    scale: float = 10.0) -> float:
    """Spot-check the declared growth bound on random pairs.

    Returns the largest observed ratio |f(x)-f(y)| / (C (1+|x|^m+|y|^m) |x-y|);
    a value above 1 refutes the declaration. Never used as a gate.
    """
    if f.lipschitz is None:
        raise ValueError("functional declares no Lipschitz metadata")
    C, m = f.lipschitz.C, f.lipschitz.m
    w = len(f.coords)
    x = rng.uniform(-scale, scale, size=(n_pairs, w))
    y = rng.uniform(-scale, scale, size=(n_pairs, w))
    nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
    dist = np.linalg.norm(x - y, axis=1)
    bound = C * (1 + nx**m + ny**m) * dist
    diff = np.abs(f(x) - f(y))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, diff / bound, np.where(diff > 0, np.inf, 0.0))
    return float(ratio.max())
