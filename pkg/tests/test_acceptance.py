"""Acceptance suite: the four convergence studies plus solver and localization checks.

Each test prints one ``PASS``/``FAIL`` line with the measured quantities, then
asserts.  Run ``pytest tests/test_acceptance.py -v -s`` (or without ``-s``;
lines are printed with output capture disabled).
"""
import math
import time
import warnings

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from ocfem import analysis
from ocfem.checks import STUDIES
from ocfem.mesh import perturbed_mesh, third_aligned_mesh, uniform_mesh
from ocfem.problems import builtin, example_dirichlet, example_mixed, manufactured_unconstrained
from ocfem.study import build_qp, mesh_sequence, run_study, solve_on_mesh
from ocfem.vi_solver import MAX_BRUTEFORCE_ROWS, solve_bruteforce, solve_pdas

# reference H2 column of the mixed dyadic study, coarse to fine, one row per halving
MIXED_DYADIC_H2 = [2.070271e01, 1.379991e01, 8.047102e00, 4.073631e00,
                   2.081469e00, 1.037836e00, 5.212004e-01]
DIRICHLET_H2_128 = 5.040206e-04
TIME_BUDGET = 60.0


@pytest.fixture(scope="module")
def studies():
    start = time.perf_counter()
    tables = {}
    for key, (name, family, base, levels) in STUDIES.items():
        tables[key] = run_study(builtin(name), mesh_sequence(family, base, levels), family=family)
    tables["elapsed"] = time.perf_counter() - start
    return tables


@pytest.fixture
def report(capsys):
    def emit(criterion, passed, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
        assert passed, f"{criterion}: {detail}"
    return emit


def _last_rates(table, norm, count=3):
    return [r.eoc[norm] for r in table.records[-count:]]


def _within(values, target, tol):
    return all(abs(v - target) <= tol for v in values)


def _fmt(values):
    return "[" + ", ".join(f"{v:.3f}" for v in values) + "]"


def test_timing(studies, report):
    report("desk scale", studies["elapsed"] < TIME_BUDGET,
           f"four studies took {studies['elapsed']:.2f} s (budget {TIME_BUDGET:.0f} s)")


def test_criterion_1_dirichlet_dyadic(studies, report):
    t = studies["table1"]
    assert [r.elements for r in t.records] == [2, 4, 8, 16, 32, 64, 128]
    h2_rates, l2_rates = _last_rates(t, "H2"), _last_rates(t, "L2")
    h2_128 = t.records[-1].errors["H2"]
    h2_64 = t.records[-2].errors["H2"]
    ratio = h2_128 / DIRICHLET_H2_128
    ok_rate = _within(h2_rates, 2.0, 0.2)
    ok_value = 0.5 <= ratio <= 2.0
    ok_l2 = min(l2_rates) >= 3.5
    report("1 Dirichlet dyadic", ok_rate and ok_value and ok_l2,
           f"H2 EOC {_fmt(h2_rates)} (2.0 +- 0.2: {ok_rate}); "
           f"H2(n=128) = {h2_128:.6e}, ratio to {DIRICHLET_H2_128:.6e} = {ratio:.3f} "
           f"(within x2: {ok_value}; n=64 gives {h2_64:.6e}, ratio {h2_64 / DIRICHLET_H2_128:.5f}); "
           f"L2 EOC {_fmt(l2_rates)} (>= 3.5: {ok_l2})")


def test_criterion_2_dirichlet_perturbed(studies, report):
    t = studies["table2"]
    assert [r.elements for r in t.records] == [4, 8, 16, 32, 64, 128, 256]
    assert all(np.min(np.abs(lv.discrete.space.mesh.nodes)) > 0 for lv in t.levels)
    last = t.records[-1].eoc
    ok_h2 = abs(last["H2"] - 0.5) <= 0.25
    ok_low = all(abs(last[k] - 1.0) <= 0.3 for k in ("L2", "Linf", "H1"))
    report("2 Dirichlet perturbed", ok_h2 and ok_low,
           f"asymptotic EOC H2 {last['H2']:.3f} (0.5 +- 0.25), "
           f"L2 {last['L2']:.3f}, Linf {last['Linf']:.3f}, H1 {last['H1']:.3f} (1.0 +- 0.3)")


def _align(reference, table):
    """Power-of-two offset s pairing reference row i with the level of s * 2**i elements."""
    ours = {r.elements: r.errors["H2"] for r in table.records}
    best = None
    for m in range(-8, 9):
        pairs = [(p, ours[n]) for i, p in enumerate(reference)
                 if (n := 2.0**m * 2**i) in ours]
        if len(pairs) < 3:
            continue
        score = float(np.mean([abs(math.log(p / o)) for p, o in pairs]))
        if best is None or score < best[0]:
            best = (score, 2.0**m)
    return best


def test_criterion_3_mixed_dyadic(studies, report):
    t = studies["table3"]
    assert t.records[-1].elements == 256
    h2_rates, l2_rates = _last_rates(t, "H2"), _last_rates(t, "L2")
    score, s = _align(MIXED_DYADIC_H2, t)
    level = int(s * 2 ** (len(MIXED_DYADIC_H2) - 1))
    ours = {r.elements: r.errors["H2"] for r in t.records}[level]
    ratio = ours / MIXED_DYADIC_H2[-1]
    ok_rate = _within(h2_rates, 1.0, 0.1)
    ok_value = 0.5 <= ratio <= 2.0
    ok_l2 = _within(l2_rates, 2.0, 0.2)
    report("3 mixed dyadic", ok_rate and ok_value and ok_l2,
           f"H2 EOC {_fmt(h2_rates)} (1.0 +- 0.1: {ok_rate}); finest reference row aligns with "
           f"n={level} (mean |log ratio| {score:.4f}): H2 {ours:.6e} vs {MIXED_DYADIC_H2[-1]:.6e}, "
           f"ratio {ratio:.4f} (within x2: {ok_value}); L2 EOC {_fmt(l2_rates)} (2.0 +- 0.2: {ok_l2})")


def _at_equal_h(table, h, norm):
    hs = np.log([r.h for r in table.records])[::-1]
    es = np.log([r.errors[norm] for r in table.records])[::-1]
    return float(np.exp(np.interp(math.log(h), hs, es)))


def test_criterion_4_mixed_third_aligned(studies, report):
    third, dyadic = studies["table4"], studies["table3"]
    assert [r.elements for r in third.records] == [6, 12, 24, 48, 96, 192]
    h2_rates = _last_rates(third, "H2")
    ok_rate = _within(h2_rates, 1.0, 0.1)
    lo, hi = min(r.h for r in dyadic.records), max(r.h for r in dyadic.records)
    ratios = {k: [r.errors[k] / _at_equal_h(dyadic, r.h, k)
                  for r in third.records if lo <= r.h <= hi] for k in ("H2", "L2")}
    ok_smaller = all(q < 1.0 for q in ratios["H2"])
    report("4 mixed third-aligned", ok_rate and ok_smaller,
           f"H2 EOC {_fmt(h2_rates)} (1.0 +- 0.1: {ok_rate}); H2 third-aligned / dyadic at equal h "
           f"{_fmt(ratios['H2'])} (all < 1: {ok_smaller}); for reference L2 ratios {_fmt(ratios['L2'])}")


def _oracle_cases():
    cases = []
    for n in (2, 4, 8):
        cases.append((example_dirichlet(), uniform_mesh(n)))
    for n in (4, 8, 14):
        cases.append((example_dirichlet(), perturbed_mesh(n)))
    for n in (4, 8, 16):
        cases.append((example_mixed(), uniform_mesh(n)))
    for k in (0, 1, 2):
        cases.append((example_mixed(), third_aligned_mesh(k)))
    return cases


def test_criterion_5_oracle_equivalence(report):
    worst, mismatched, sizes = 0.0, [], []
    for problem, mesh in _oracle_cases():
        _, qp = build_qp(problem, mesh)
        assert len(qp.bounds) <= MAX_BRUTEFORCE_ROWS
        sizes.append(len(qp.bounds))
        a, b = solve_pdas(qp), solve_bruteforce(qp)
        worst = max(worst, float(np.max(np.abs(a.x - b.x))))
        if a.active != b.active:
            mismatched.append(f"{problem.name}/{mesh.family}/{mesh.n_elements}")
    report("5 oracle equivalence", worst <= 1e-10 and not mismatched,
           f"{len(sizes)} meshes with {min(sizes)}..{max(sizes)} bound rows; "
           f"max |x_pdas - x_brute| = {worst:.2e}; active-set mismatches: {mismatched or 'none'}")


def test_criterion_6_galerkin_exactness(report):
    x = Polynomial([0.0, 1.0])
    worst, active = 0.0, 0
    for bc, p in [("dirichlet", x**3 - x), ("mixed", (x + 1) * (x**2 - 5))]:
        problem = manufactured_unconstrained(p, bc)
        for mesh in (uniform_mesh(1), uniform_mesh(4), perturbed_mesh(6), third_aligned_mesh(2)):
            d = solve_on_mesh(problem, mesh)
            worst = max(worst, analysis.energy_error(d.y_h, problem.exact, problem.beta))
            active += len(d.sol.active)
    report("6 Galerkin exactness", worst <= 1e-10 and active == 0,
           f"max energy-norm error {worst:.2e}; active constraints {active}")


def test_criterion_7_kkt_residuals(studies, report):
    worst = dict(stationarity=0.0, feasibility=0.0, complementarity=0.0)
    min_lam, failing, count = 0.0, [], 0
    for key in STUDIES:
        for lv in studies[key].levels:
            r = lv.discrete.kkt
            count += 1
            worst["stationarity"] = max(worst["stationarity"], r.stationarity / (1 + r.b_scale))
            worst["feasibility"] = max(worst["feasibility"], r.feasibility)
            worst["complementarity"] = max(worst["complementarity"], r.complementarity)
            min_lam = min(min_lam, r.min_lambda)
            if not r.ok:
                failing.append(f"{key}/{lv.record.elements}")
    report("7 KKT residuals", not failing,
           f"{count} levels; stationarity/(1+|b|) {worst['stationarity']:.1e} (<= 1e-9), "
           f"feasibility {worst['feasibility']:.1e} (<= 1e-10), complementarity "
           f"{worst['complementarity']:.1e} (<= 1e-9), min lambda {min_lam:.1e} (>= -1e-12); "
           f"failing: {failing or 'none'}")


def test_criterion_8_active_set_localization(studies, report):
    bad = []
    for lv in studies["table1"].levels:
        nodes = lv.discrete.multipliers().active_nodes
        if nodes.tolist() != [0.0]:
            bad.append(f"table1/{lv.record.elements}: {nodes.tolist()}")
    for key in ("table3", "table4"):
        for lv in studies[key].levels:
            h = lv.discrete.space.mesh.h
            nodes = lv.discrete.multipliers().active_nodes
            if nodes.size and (nodes.max() > 1 / 3 + 2 * h or nodes.min() < -1):
                bad.append(f"{key}/{lv.record.elements}")
    d_mass = [r.mass for r in studies["table1"].records]
    m_mass = [r.mass for r in studies["table3"].records]
    exact_m = 27 * math.pi**2 / 4
    gaps = [abs(m - exact_m) for m in m_mass]
    trending = abs(d_mass[-1] - 1.0) <= 0.15 and gaps[-1] <= gaps[-3] and gaps[-1] <= 0.1 * exact_m
    if not trending:
        warnings.warn(f"multiplier masses not trending to their exact values: {d_mass[-1]}, {m_mass[-1]}")
    report("8 active-set localization", not bad,
           f"Dirichlet dyadic levels activate only x=0, mixed active nodes within [-1, 1/3 + 2h]; "
           f"off-target: {bad or 'none'}; mass diagnostic (warning-level) Dirichlet {d_mass[-1]:.6f} "
           f"-> 1, mixed {m_mass[-1]:.4f} -> {exact_m:.4f} (trending: {trending})")
