"""Deterministic sequence constructions used by the convergence proofs."""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from sublaw.errors import NotFoundOnPrefix


@dataclass(frozen=True)
class Subsequence:
    indices: tuple[int, ...]      # 1-based, strictly increasing
    source_length: int
    M: float
    method: str                   # "greedy" or "longest_chain"


def _pair_ok(a: Sequence[Fraction], M: Fraction, i: int, j: int) -> bool:
    """M a_i <= a_j <= M^3 a_{i+1}, 1-based indices."""
    return M * a[i - 1] <= a[j - 1] <= M**3 * a[i]


def _greedy(a, M):
    n = len(a)
    idx = [1]
    stalled = False
    while True:
        i = idx[-1]
        j = bisect_left(a, M * a[i - 1], lo=i)  # 0-based position, so j+1 > i
        if j >= n:
            break
        if not _pair_ok(a, M, i, j + 1):
            stalled = True
            break
        idx.append(j + 1)
    return idx, stalled


def _longest_chain(a, M):
    """Longest chain under the double inequality; ties go to the smallest index.

    Successors of i form the contiguous range of j with
    M a_i <= a_j <= M^3 a_{i+1}; both ends move right with i, so a
    monotone deque gives the range maximum in linear time.
    """
    n = len(a)
    best = [1] * (n + 1)
    succ = [0] * (n + 1)
    window: deque[int] = deque()   # indices increasing left to right, best increasing too
    nxt = n                         # next index to offer, descending
    for i in range(n - 1, 0, -1):
        lo = max(i + 1, bisect_left(a, M * a[i - 1]) + 1)
        hi = bisect_right(a, M**3 * a[i])
        nxt = min(nxt, hi)
        while nxt >= lo:
            while window and best[window[0]] <= best[nxt]:
                window.popleft()
            window.appendleft(nxt)
            nxt -= 1
        while window and window[-1] > hi:
            window.pop()
        if window and lo <= hi:
            j = window[-1]
            best[i], succ[i] = best[j] + 1, j
    start = max(range(1, n + 1), key=lambda i: (best[i], -i))
    chain = [start]
    while succ[chain[-1]]:
        chain.append(succ[chain[-1]])
    return chain


def wittmann_subsequence(a: Sequence[float], M: float) -> Subsequence:
    """Indices n_1 < n_2 < ... with M a_{n_k} <= a_{n_{k+1}} <= M^3 a_{n_k + 1}.

    Greedy threshold search first; if the upper inequality blocks it, the
    longest chain over the whole prefix is used instead. Every returned
    pair is checked in exact rational arithmetic.
    """
    Mf = Fraction(M)
    if Mf <= 1:
        raise ValueError("M must exceed 1")
    seq = [Fraction(x) for x in a]
    if len(seq) < 2:
        raise NotFoundOnPrefix("prefix too short")
    if any(y < x for x, y in zip(seq, seq[1:])):
        raise ValueError("a must be nondecreasing")
    idx, stalled = _greedy(seq, Mf)
    method = "greedy"
    if stalled:
        chain = _longest_chain(seq, Mf)
        if len(chain) > len(idx):
            idx, method = chain, "longest_chain"
    if len(idx) < 2:
        raise NotFoundOnPrefix(f"no admissible pair on a prefix of length {len(seq)}")
    for i, j in zip(idx, idx[1:]):
        if not _pair_ok(seq, Mf, i, j):
            raise AssertionError(f"constructed pair ({i}, {j}) fails the double inequality")
    return Subsequence(tuple(idx), len(seq), float(M), method)


@dataclass(frozen=True)
class EpsilonSequence:
    b: np.ndarray          # b_n = sqrt(t_n) - sqrt(t_{n+1})
    ratios: np.ndarray     # a_n / b_n = sqrt(t_n) + sqrt(t_{n+1}); 0 once t_n = 0
    total: float           # sqrt(t_1), the sum of all b_n
    tails: np.ndarray      # t_1..t_{N+1}

    @property
    def epsilon(self) -> np.ndarray:
        """eps_n = sqrt(a_n / b_n): decreasing to 0 with sum a_n / eps_n^2 = sum b_n."""
        return np.sqrt(self.ratios)


def epsilon_sequence(a: Sequence[float], tail: float = 0.0) -> EpsilonSequence:
    """Square-root tail differences of a summable nonnegative sequence.

    ``tail`` is the sum of the terms beyond the supplied prefix.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError("terms must be finite and nonnegative")
    if tail < 0 or not math.isfinite(tail):
        raise ValueError("tail must be finite and nonnegative")
    t = np.empty(len(a) + 1)
    t[-1] = tail
    t[:-1] = np.cumsum(a[::-1])[::-1] + tail
    t = np.maximum.accumulate(t[::-1])[::-1]   # rounding must not break monotonicity
    root = np.sqrt(t)
    b = root[:-1] - root[1:]
    ratios = np.where(t[:-1] > 0, root[:-1] + root[1:], 0.0)
    b = np.where(t[:-1] > 0, b, 0.0)
    return EpsilonSequence(b, ratios, float(root[0]), t)
