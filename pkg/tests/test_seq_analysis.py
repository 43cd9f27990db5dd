import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sublaw.errors import NotFoundOnPrefix
from sublaw.seq_analysis import epsilon_sequence, wittmann_subsequence

SOURCES = {
    "n": lambda N: [n for n in range(1, N + 1)],
    "n2": lambda N: [n * n for n in range(1, N + 1)],
    "2n": lambda N: [2**n for n in range(1, N + 1)],
}


def check_double_inequality(a, M, idx):
    M = Fraction(M)
    a = [Fraction(x) for x in a]
    return all(M * a[i - 1] <= a[j - 1] <= M**3 * a[i] for i, j in zip(idx, idx[1:]))


def test_wittmann_examples():
    s = wittmann_subsequence(SOURCES["n"](64), 2)
    assert s.indices == (1, 2, 4, 8, 16, 32, 64)
    p = wittmann_subsequence(SOURCES["2n"](20), 2)
    assert p.indices == tuple(range(1, 21))


@pytest.mark.parametrize("name", sorted(SOURCES))
@pytest.mark.parametrize("M", [1.5, 2.0, 4.0])
def test_wittmann_double_inequality_exact(name, M):
    a = SOURCES[name](200)
    s = wittmann_subsequence(a, M)
    assert len(s.indices) >= 3
    assert all(y > x for x, y in zip(s.indices, s.indices[1:]))
    assert check_double_inequality(a, M, s.indices)


def test_wittmann_backtracks_past_a_jump():
    # greedy from 1 jumps straight to a huge value and stalls
    a = [1, 1, 1000, 1000, 2000, 4000, 8000]
    s = wittmann_subsequence(a, 2)
    assert s.method == "longest_chain"
    assert check_double_inequality(a, 2, s.indices)
    assert len(s.indices) >= 4


def test_wittmann_errors():
    with pytest.raises(NotFoundOnPrefix):
        wittmann_subsequence([1, 1, 1], 2)
    with pytest.raises(NotFoundOnPrefix):
        wittmann_subsequence([1], 2)
    with pytest.raises(ValueError):
        wittmann_subsequence([1, 2, 3], 1)
    with pytest.raises(ValueError):
        wittmann_subsequence([3, 2, 1], 2)


@given(st.lists(st.integers(0, 50), min_size=2, max_size=60), st.sampled_from([1.5, 2, 3]))
def test_wittmann_output_always_verifies(steps, M):
    a = list(np.cumsum([1] + steps))
    try:
        s = wittmann_subsequence(a, M)
    except NotFoundOnPrefix:
        return
    assert check_double_inequality(a, M, s.indices)


def test_epsilon_geometric_closed_form():
    N = 30
    a = [4.0**-n for n in range(1, N + 1)]
    eps = epsilon_sequence(a, tail=4.0**-N / 3)
    n = np.arange(1, N + 1)
    c = math.sqrt(4 / 3)
    assert np.allclose(eps.b, c * 2.0**(-n - 1), rtol=1e-12, atol=0)
    assert np.allclose(eps.ratios, c * (2.0**-n + 2.0**(-n - 1)), rtol=1e-12, atol=0)
    assert eps.total == pytest.approx(c / 2, abs=1e-15)


def test_epsilon_zero_sequence():
    eps = epsilon_sequence(np.zeros(5))
    assert np.all(eps.b == 0) and np.all(eps.ratios == 0) and eps.total == 0.0


def test_epsilon_zero_tail_convention():
    eps = epsilon_sequence([1.0, 2.0, 0.0, 0.0])
    assert list(eps.b[2:]) == [0.0, 0.0] and list(eps.ratios[2:]) == [0.0, 0.0]


def test_epsilon_rejects_bad_input():
    with pytest.raises(ValueError):
        epsilon_sequence([1.0, -1.0])
    with pytest.raises(ValueError):
        epsilon_sequence([1.0], tail=-1)


@pytest.mark.parametrize("kind", ["geometric", "polynomial"])
def test_epsilon_telescoping(kind):
    N = 500
    n = np.arange(1, N + 1, dtype=float)
    if kind == "geometric":
        a, tail = 0.9**n, 0.9**(N + 1) / 0.1
    else:
        a, tail = n**-2.0, 1.0 / N
    eps = epsilon_sequence(a, tail)
    root = np.sqrt(eps.tails)
    assert np.all(np.abs(np.cumsum(eps.b) - (root[0] - root[1:])) <= 1e-12)
    assert np.all(np.diff(eps.ratios) <= 0)
    assert np.allclose(a / eps.b, eps.ratios, rtol=1e-9)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=80), st.floats(0, 5))
def test_epsilon_invariants(a, tail):
    eps = epsilon_sequence(a, tail)
    assert np.all(eps.b >= 0)
    assert np.all(np.diff(eps.ratios) <= 0)
    root = np.sqrt(eps.tails)
    assert abs(eps.b.sum() + root[-1] - eps.total) <= 1e-12 * max(1.0, eps.total)
