"""End-to-end acceptance checks, one per criterion.

Each test prints a single ``PASS`` or ``FAIL`` line; run with ``-s`` to see them.
The shipped reference configs are run once per session and shared.
"""
import math
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

from oracles import classical_mean
from sublaw.capacity import (IntervalEvent, choquet_integral, counterexample_model, linear_grid,
                             sample_survival, survival_function, upper_capacity)
from sublaw.cli.main import main, shipped_configs
from sublaw.cli.reporting import parse
from sublaw.expectation import MCPlan, RandomFunctional, ScenarioSet
from sublaw.expectation.axioms import (AXIOMS, additivity_gap, axiom_violations,
                                       random_instance, random_scenario_set, random_table)
from sublaw.inequalities import (normalized_exceedance, verify_kolmogorov_maximal,
                                 verify_truncation_bound)
from sublaw.seq_analysis import epsilon_sequence, wittmann_subsequence
from sublaw.sequences import make_m_dependent, unit_variance_pair, window_function
from sublaw.slln import golden_band

SEED = 20240601
INSTANCES = 100


def verdict(number, title, ok, detail=""):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else ""))
    assert ok, detail


def instances():
    rng = np.random.default_rng(SEED)
    return [random_instance(rng) for _ in range(INSTANCES)]


@pytest.fixture(scope="session")
def shipped_runs(tmp_path_factory):
    """Run every shipped config once: name -> (exit code, output bytes, seconds)."""
    root = tmp_path_factory.mktemp("shipped")
    runs = {}
    for name, text in shipped_configs():
        cfg = root / name
        cfg.write_text(text)
        out = root / (name + ".csv")
        start = time.perf_counter()
        code = main(["run", "--config", str(cfg), "--out", str(out)])
        runs[name] = (code, out.read_bytes() if out.exists() else b"", time.perf_counter() - start)
    return runs


def rows_of(runs, name):
    code, data, _ = runs[name]
    assert code == 0, f"{name} exited {code}"
    return parse(data.decode())


# -- 1, 2: axioms and additivity --------------------------------------------------

def test_axiom_suite():
    start = time.perf_counter()
    worst = dict.fromkeys(AXIOMS, 0.0)
    for inst in instances():
        for k, v in axiom_violations(inst).items():
            worst[k] = max(worst[k], v)
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-12 for v in worst.values()) and elapsed < 60
    verdict(1, "sublinear axioms", ok, f"worst {max(worst.values()):.3g}, {elapsed:.1f}s")


def test_independent_additivity():
    gaps = [additivity_gap(inst.driver, inst.n_coords) for inst in instances()]
    verdict(2, "independent sums are additive", max(gaps) == 0.0, f"max gap {max(gaps):.3g}")


# -- 3: counterexample --------------------------------------------------------------

def test_counterexample_capacities():
    ce = counterexample_model()
    got = (upper_capacity(ce, IntervalEvent.closed(0, 1)),
           upper_capacity(ce, IntervalEvent.closed(1, 2)),
           upper_capacity(ce, IntervalEvent.point(1)))
    verdict(3, "counterexample capacities", got == (1.0, 1.0, 0.0), f"{got}")


# -- 4: Choquet ---------------------------------------------------------------------

def lattice_table(rng, driver, n_coords):
    # values on an eighth lattice so every jump of the survival lands on the grid
    shape = (len(driver.support),) * n_coords
    table = rng.integers(-40, 41, size=shape) / 8
    return RandomFunctional.table(range(1, n_coords + 1), driver.support, table, "lattice")


def test_choquet_equivalence():
    rng = np.random.default_rng(SEED + 4)
    grid = linear_grid(-8.0, 8.0, 2**12)
    quad_gap = 0.0
    for _ in range(50):
        d = random_scenario_set(rng)
        f = lattice_table(rng, d, int(rng.integers(1, 4)))
        step = survival_function(d, f)
        exact = choquet_integral(step).value
        quad = choquet_integral(sample_survival(step, grid, convention="mid")).value
        quad_gap = max(quad_gap, abs(exact - quad))
    classical_gap = 0.0
    for _ in range(50):
        law = random_scenario_set(rng, max_scenarios=1).scenarios[0]
        f = random_table(rng, ScenarioSet.of(law), 2)
        value = choquet_integral(survival_function(ScenarioSet.of(law), f)).value
        classical_gap = max(classical_gap, abs(value - classical_mean(law, f, 2)))
    ok = quad_gap <= 1e-6 and classical_gap <= 1e-12
    verdict(4, "Choquet step sum vs quadrature and classical mean", ok,
            f"quadrature gap {quad_gap:.3g}, classical gap {classical_gap:.3g}")


# -- 5: truncation --------------------------------------------------------------------

def test_truncation_bound():
    rng = np.random.default_rng(SEED + 5)
    worst = math.inf
    for inst in instances():
        rep = verify_truncation_bound(inst.driver, inst.X, np.sort(rng.uniform(0, 6, 8)))
        assert rep.kind == "exact"
        worst = min(worst, float(np.min(rep.rhs - rep.lhs)))
    verdict(5, "truncation bound", worst >= -1e-12, f"min slack {worst:.3g}")


# -- 6: Rademacher-Mensov ---------------------------------------------------------------

RM_CONFIGS = ("rm_signs.yaml", "rm_haar.yaml", "rm_two_scenario.yaml", "rm_quasi_m1.yaml")


def test_rademacher_mensov(shipped_runs):
    failures, count = [], 0
    for name in RM_CONFIGS:
        rows = rows_of(shipped_runs, name)
        assert {r.n for r in rows} == {4, 16, 64, 256, 1024}
        assert all(sum(r.n == n for r in rows) == 20 for n in (4, 16, 64, 256, 1024))
        count += len(rows)
        failures += [f"{name}:{r.n}:{r.statistic}" for r in rows if not r.value <= r.bound]
    elapsed = sum(shipped_runs[name][2] for name in RM_CONFIGS)
    ok = not failures and elapsed < 300
    verdict(6, "Rademacher-Mensov bound", ok,
            f"{count} rows, {len(failures)} over the bound, {elapsed:.1f}s")


# -- 7: maximal inequality stability ------------------------------------------------------

def test_maximal_ratio_is_flat():
    spreads = {}
    for m in (0, 1, 2):
        ratios = []
        for n in (32, 64, 128):
            model = make_m_dependent(unit_variance_pair(), window_function("average", m), m, n)
            rep = verify_kolmogorov_maximal(model, MCPlan(4000, seed=SEED + m, pool_size=16))
            assert rep.all_pass
            ratios.append(normalized_exceedance(rep, float(model.second_moments().sum())))
        R = np.array(ratios)
        assert np.all(R > 0)
        spreads[m] = float((R.max(axis=0) / R.min(axis=0)).max())
    ok = all(s < 2.0 for s in spreads.values())
    verdict(7, "maximal ratio stable in n", ok,
            ", ".join(f"m={m} spread {s:.3f}" for m, s in spreads.items()))


# -- 8: convergence runs -------------------------------------------------------------------

SLLN_CONFIGS = {"thm41": "thm41_reference.yaml", "thm42": "thm42_reference.yaml",
                "thm43": "thm43_reference.yaml", "cor41": "cor41_reference.yaml"}


def test_slln_reference_runs(shipped_runs):
    problems, notes = [], []
    for key, name in SLLN_CONFIGS.items():
        rows = rows_of(shipped_runs, name)
        worst = [r.value for r in sorted(rows, key=lambda r: r.n) if r.statistic == "worst_ratio"]
        band = golden_band(key)
        verdicts = [r.statistic for r in rows if r.statistic.startswith("verdict:")]
        if verdicts != ["verdict:consistent"]:
            problems.append(f"{key} verdict {verdicts}")
        if not worst[-1] < band:
            problems.append(f"{key} worst {worst[-1]:.4g} >= band {band}")
        if not worst[-3] > worst[-2] > worst[-1]:
            problems.append(f"{key} not decreasing over the last three checkpoints")
        if not all(r.passed for r in rows):
            problems.append(f"{key} has failing rows")
        notes.append(f"{key} {worst[-1]:.4f}<{band}")
    thm42 = rows_of(shipped_runs, "thm42_reference.yaml")
    if [r.value for r in thm42 if r.statistic == "phi"] != [1.0]:
        problems.append("thm42 normalizer is not n")
    beyond = [r.value for r in thm42 if r.statistic == "truncation_events_beyond_index"]
    if beyond != [0.0]:
        problems.append(f"thm42 truncation events beyond index {beyond}")
    elapsed = sum(shipped_runs[name][2] for name in SLLN_CONFIGS.values())
    if elapsed >= 600:
        problems.append(f"runtime {elapsed:.0f}s")
    verdict(8, "convergence reference runs", not problems,
            "; ".join(problems) or ", ".join(notes) + f", {elapsed:.0f}s")


# -- 9: sequence lemmas --------------------------------------------------------------------

def test_sequence_lemmas():
    problems = []
    N = 500
    n = np.arange(1, N + 1, dtype=float)
    for label, a, tail in (("geometric", 0.9**n, 0.9**(N + 1) / 0.1),
                           ("polynomial", n**-2.0, 1.0 / N)):
        eps = epsilon_sequence(a, tail)
        root = np.sqrt(eps.tails)
        gap = float(np.max(np.abs(np.cumsum(eps.b) - (root[0] - root[1:]))))
        if gap > 1e-12:
            problems.append(f"{label} telescoping gap {gap:.3g}")
        if np.any(np.diff(eps.ratios) > 0):
            problems.append(f"{label} ratios increase")
    sources = {"n": lambda k: k, "n^2": lambda k: k * k, "2^n": lambda k: 2**k}
    for label, term in sources.items():
        a = [term(k) for k in range(1, 201)]
        exact = [Fraction(x) for x in a]
        for M in (1.5, 2, 4):
            idx = wittmann_subsequence(a, M).indices
            Mf = Fraction(M)
            if not all(Mf * exact[i - 1] <= exact[j - 1] <= Mf**3 * exact[i]
                       for i, j in zip(idx, idx[1:])):
                problems.append(f"wittmann a={label} M={M}")
    verdict(9, "epsilon telescoping and subsequence inequality", not problems,
            "; ".join(problems))


# -- 10: determinism -------------------------------------------------------------------------

def _rerun(path):
    proc = subprocess.run([sys.executable, "-m", "sublaw.cli.main", "run", "--config", str(path)],
                          capture_output=True)
    return proc.returncode, proc.stdout


def test_determinism(shipped_runs, tmp_path):
    names = [name for name, _ in shipped_configs()]
    paths = []
    for name, text in shipped_configs():
        paths.append(tmp_path / name)
        paths[-1].write_text(text)
    with ThreadPoolExecutor(max_workers=4) as pool:
        again = dict(zip(names, pool.map(_rerun, paths)))
    differ = [name for name in names if again[name] != shipped_runs[name][:2]]
    verdict(10, "same seed, same bytes", not differ,
            f"{len(names)} configs" + (f", differing: {differ}" if differ else ""))
