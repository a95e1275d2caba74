import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ocfem.mesh import perturbed_mesh, third_aligned_mesh, uniform_mesh
from ocfem.problems import example_dirichlet, example_mixed
from ocfem.space import interpolate
from ocfem.study import build_qp, mesh_sequence, solve_on_mesh
from ocfem.vi_solver import (MAX_BRUTEFORCE_ROWS, BoundQP, NoConvergence, QPSolution, TooLarge,
                             kkt_report, solve_bruteforce, solve_pdas)

HAND = [
    (2 * np.eye(2), [1.0, 4.0], [(1, 1.0)], [0.5, 1.0], [2.0]),
    (np.eye(2), [2.0, 2.0], [(0, 1.0), (1, 1.0)], [1.0, 1.0], [1.0, 1.0]),
]


@pytest.mark.parametrize("A, b, bounds, x, lam", HAND)
@pytest.mark.parametrize("solver", [solve_pdas, solve_bruteforce])
def test_hand_examples(A, b, bounds, x, lam, solver):
    sol = solver(BoundQP(A, b, bounds))
    np.testing.assert_allclose(sol.x, x, atol=1e-12)
    np.testing.assert_allclose(sol.lam, lam, atol=1e-12)
    r = kkt_report(BoundQP(A, b, bounds), sol)
    assert max(r.stationarity, r.feasibility, r.complementarity) <= 1e-12
    assert r.ok


@pytest.mark.parametrize("A, b, bounds, x, lam", HAND)
def test_perturbed_solution_has_large_stationarity_residual(A, b, bounds, x, lam):
    qp = BoundQP(A, b, bounds)
    sol = solve_pdas(qp)
    bad = QPSolution(sol.x + 1e-3, sol.lam, sol.active, 0)
    assert kkt_report(qp, bad).stationarity >= 1e-4


def test_unconstrained_is_one_linear_solve():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(5, 5))
    A = M @ M.T + 5 * np.eye(5)
    A = np.triu(np.tril(A, 3), -3)
    b = rng.normal(size=5)
    for solver in (solve_pdas, solve_bruteforce):
        sol = solver(BoundQP(A, b))
        np.testing.assert_allclose(sol.x, np.linalg.solve(A, b), rtol=1e-12)
        assert sol.lam.size == 0 and not sol.active
    assert solve_pdas(BoundQP(A, b)).iterations == 1


def test_bound_validation():
    with pytest.raises(ValueError):
        BoundQP(np.eye(2), [1.0, 1.0], [(0, 1.0), (0, 2.0)])
    with pytest.raises(ValueError):
        BoundQP(np.eye(2), [1.0, 1.0], [(2, 1.0)])
    with pytest.raises(ValueError):
        BoundQP(np.eye(2), [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        solve_pdas(BoundQP(np.eye(2), [1.0, 1.0]), gamma=0.0)


def test_example_dirichlet_oracle_on_four_elements():
    _, qp = build_qp(example_dirichlet(), uniform_mesh(4))
    a, b = solve_pdas(qp), solve_bruteforce(qp)
    assert np.max(np.abs(a.x - b.x)) <= 1e-10
    assert a.active == b.active


@pytest.mark.parametrize("problem, mesh", [
    (example_dirichlet(), uniform_mesh(8)),
    (example_dirichlet(), perturbed_mesh(8)),
    (example_dirichlet(), perturbed_mesh(14)),
    (example_mixed(), uniform_mesh(8)),
    (example_mixed(), uniform_mesh(16)),
    (example_mixed(), third_aligned_mesh(2)),
], ids=lambda v: getattr(v, "name", None) or f"{v.family}{v.n_elements}")
def test_pdas_matches_bruteforce_on_builtin_problems(problem, mesh):
    _, qp = build_qp(problem, mesh)
    assert len(qp.bounds) <= MAX_BRUTEFORCE_ROWS
    a, b = solve_pdas(qp), solve_bruteforce(qp)
    assert np.max(np.abs(a.x - b.x)) <= 1e-10
    assert np.max(np.abs(a.lam - b.lam)) <= 1e-10 * (1 + np.max(np.abs(qp.b)))
    assert a.active == b.active


def test_bruteforce_size_limit():
    n = MAX_BRUTEFORCE_ROWS + 1
    qp = BoundQP(np.eye(n), np.zeros(n), [(i, 1.0) for i in range(n)])
    with pytest.raises(TooLarge):
        solve_bruteforce(qp)


def test_no_convergence_carries_active_sets():
    _, qp = build_qp(example_mixed(), uniform_mesh(64))
    with pytest.raises(NoConvergence) as info:
        solve_pdas(qp, max_iter=1)
    assert isinstance(info.value.last, frozenset)
    assert "iterations" in str(info.value)


@st.composite
def banded_qps(draw):
    n = draw(st.integers(1, 9))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    M = np.triu(np.tril(rng.normal(size=(n, n)), 3), -3)
    A = M @ M.T
    A = np.triu(np.tril(A, 3), -3) + n * np.eye(n) * 2
    b = rng.normal(scale=3, size=n)
    rows = sorted(rng.choice(n, size=draw(st.integers(0, n)), replace=False).tolist())
    bounds = [(i, float(rng.normal())) for i in rows]
    return BoundQP(A, b, bounds)


@settings(max_examples=60, deadline=None)
@given(banded_qps())
def test_pdas_equals_bruteforce_on_random_qps(qp):
    a, b = solve_pdas(qp), solve_bruteforce(qp)
    assert np.max(np.abs(a.x - b.x)) <= 1e-10
    assert a.active == b.active
    assert kkt_report(qp, a).ok


def test_pdas_objective_below_projected_interpolant():
    for problem, mesh in [(example_dirichlet(), perturbed_mesh(16)), (example_mixed(), uniform_mesh(32))]:
        space, qp = build_qp(problem, mesh)
        sol = solve_pdas(qp)
        x_feas = interpolate(space, problem.exact.ybar).coefficients.copy()
        idx, c = qp.bound_index, qp.bound_value
        x_feas[idx] = np.minimum(x_feas[idx], c)
        assert qp.objective(sol.x) <= qp.objective(x_feas) + 1e-12


def test_iteration_count_regression_guard():
    for problem, family, base, levels in [(example_dirichlet(), "uniform", 2, 7),
                                          (example_dirichlet(), "perturbed", 4, 7),
                                          (example_mixed(), "uniform", 4, 7),
                                          (example_mixed(), "third-aligned", 1, 6)]:
        for mesh in mesh_sequence(family, base, levels):
            d = solve_on_mesh(problem, mesh)
            assert d.sol.iterations <= len(d.qp.bounds) + 2
            assert d.kkt.ok
