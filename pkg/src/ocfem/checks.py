"""Property checks behind ``ocfem verify``.

Each check returns a :class:`Check`; none of them raise on failure.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial

from . import analysis
from .mesh import perturbed_mesh, third_aligned_mesh, uniform_mesh
from .problems import example_dirichlet, example_mixed, manufactured_unconstrained
from .space import HermiteSpace, constraint_rows, interpolate
from .study import build_qp, mesh_sequence, solve_on_mesh
from .vi_solver import FEAS_TOL, solve_bruteforce, solve_pdas

ORACLE_TOL = 1e-10
GALERKIN_TOL = 1e-10

# the four benchmark convergence studies, coarse to fine
STUDIES = {
    "table1": ("example-dirichlet", "uniform", 2, 7),
    "table2": ("example-dirichlet", "perturbed", 4, 7),
    "table3": ("example-mixed", "uniform", 4, 7),
    "table4": ("example-mixed", "third-aligned", 1, 6),
}


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def manufactured_cubics():
    x = Polynomial([0.0, 1.0])
    return [("dirichlet", x**3 - x), ("mixed", (x + 1) * (x**2 - 5))]


def oracle_meshes():
    return [
        (example_dirichlet(), uniform_mesh(4)),
        (example_dirichlet(), uniform_mesh(8)),
        (example_dirichlet(), perturbed_mesh(8)),
        (example_mixed(), uniform_mesh(8)),
        (example_mixed(), uniform_mesh(16)),
        (example_mixed(), third_aligned_mesh(2)),
    ]


def check_oracle() -> Check:
    worst, mismatched = 0.0, []
    for problem, mesh in oracle_meshes():
        _, qp = build_qp(problem, mesh)
        a, b = solve_pdas(qp), solve_bruteforce(qp)
        worst = max(worst, float(np.max(np.abs(a.x - b.x))))
        if a.active != b.active:
            mismatched.append(f"{problem.name}/{mesh.n_elements}")
    ok = worst <= ORACLE_TOL and not mismatched
    return Check("oracle equivalence", ok,
                 f"max |x_pdas - x_brute| = {worst:.2e}, active-set mismatches: {mismatched or 'none'}")


def check_galerkin() -> Check:
    worst, active = 0.0, 0
    for bc, p in manufactured_cubics():
        problem = manufactured_unconstrained(p, bc)
        for n in (1, 3, 8):
            d = solve_on_mesh(problem, uniform_mesh(n))
            worst = max(worst, analysis.energy_error(d.y_h, problem.exact, problem.beta))
            active += len(d.sol.active)
    ok = worst <= GALERKIN_TOL and active == 0
    return Check("Galerkin exactness", ok, f"max energy error {worst:.2e}, active constraints {active}")


def check_interpolation() -> Check:
    worst = 0.0
    xs = np.linspace(-1, 1, 401)
    for bc, p in manufactured_cubics():
        for mesh in (uniform_mesh(3), perturbed_mesh(6)):
            u = interpolate(HermiteSpace(mesh, bc), lambda x: p(x), lambda x: p.deriv()(x))
            worst = max(worst, float(np.max(np.abs(u(xs) - p(xs)))))
    return Check("cubic reproduction", worst <= 1e-12, f"max error {worst:.2e}")


def check_interpolant_feasible() -> Check:
    bad = []
    for problem in (example_dirichlet(), example_mixed()):
        for mesh in (uniform_mesh(8), third_aligned_mesh(2), perturbed_mesh(8)):
            space = HermiteSpace(mesh, problem.bc)
            u = interpolate(space, problem.exact.ybar)
            for j, c in constraint_rows(space, problem.psi):
                if u.coefficients[j] > c + 1e-12:
                    bad.append(f"{problem.name}/{mesh.family}/{mesh.n_elements}")
                    break
    return Check("interpolant feasibility", not bad, f"violations: {bad or 'none'}")


def check_kkt(studies=None) -> Check:
    worst = {"stationarity": 0.0, "feasibility": 0.0, "complementarity": 0.0}
    min_lam, failing = 0.0, []
    for key, (name, family, base, levels) in (studies or STUDIES).items():
        problem = example_dirichlet() if name == "example-dirichlet" else example_mixed()
        for mesh in mesh_sequence(family, base, levels):
            d = solve_on_mesh(problem, mesh)
            r = d.kkt
            worst["stationarity"] = max(worst["stationarity"], r.stationarity / (1 + r.b_scale))
            worst["feasibility"] = max(worst["feasibility"], r.feasibility)
            worst["complementarity"] = max(worst["complementarity"], r.complementarity)
            min_lam = min(min_lam, r.min_lambda)
            if not r.ok:
                failing.append(f"{key}/{mesh.n_elements}")
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", min lambda {min_lam:.1e}"
    return Check("KKT residuals", not failing, detail + (f"; failing {failing}" if failing else ""))


def check_active_sets() -> Check:
    problems = []
    dirichlet = example_dirichlet()
    for mesh in mesh_sequence("uniform", 2, 7):
        d = solve_on_mesh(dirichlet, mesh)
        nodes = d.multipliers().active_nodes
        if nodes.tolist() != [0.0]:
            problems.append(f"dirichlet/{mesh.n_elements}: {nodes.tolist()}")
    mixed = example_mixed()
    for mesh in mesh_sequence("uniform", 4, 7) + mesh_sequence("third-aligned", 1, 6):
        d = solve_on_mesh(mixed, mesh)
        nodes = d.multipliers().active_nodes
        if nodes.size and nodes.max() > 1 / 3 + 2 * mesh.h + FEAS_TOL:
            problems.append(f"mixed/{mesh.family}/{mesh.n_elements}")
    return Check("active-set localization", not problems, f"off-target levels: {problems or 'none'}")


ALL_CHECKS = (check_interpolation, check_interpolant_feasible, check_galerkin,
              check_oracle, check_kkt, check_active_sets)


def run_all() -> list[Check]:
    return [check() for check in ALL_CHECKS]
