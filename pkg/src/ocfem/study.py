"""Solve a problem on one mesh, or on a sequence of meshes for convergence orders."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError

from . import analysis
from .assembly import assemble_load, assemble_system
from .mesh import Mesh1D, perturbed_mesh, third_aligned_mesh, uniform_mesh
from .problems import ProblemSpec
from .space import HermiteFunction, HermiteSpace, constraint_rows
from .vi_solver import BoundQP, KKTReport, NoConvergence, QPSolution, kkt_report, solve_pdas

MESH_FAMILIES = ("uniform", "perturbed", "third-aligned")

COLUMNS = ("elements", "h", "L2", "Linf", "H1", "H2",
           "EOC_L2", "EOC_Linf", "EOC_H1", "EOC_H2", "active_nodes", "mass")


@dataclass
class Discrete:
    problem: ProblemSpec
    space: HermiteSpace
    qp: BoundQP
    sol: QPSolution
    y_h: HermiteFunction

    @property
    def kkt(self) -> KKTReport:
        return kkt_report(self.qp, self.sol)

    def multipliers(self) -> analysis.MultiplierDiag:
        return analysis.multiplier_diag(self.sol, self.space, self.problem, self.qp.bounds)


def build_qp(problem: ProblemSpec, mesh: Mesh1D, quad_order: int | None = None):
    space = HermiteSpace(mesh, problem.bc)
    A = assemble_system(space, problem.beta)
    b = assemble_load(space, problem.y_d, problem.f, problem.beta, quad_order)
    return space, BoundQP(A, b, constraint_rows(space, problem.psi))


def solve_on_mesh(problem: ProblemSpec, mesh: Mesh1D, quad_order: int | None = None,
                  gamma: float = 1.0, max_iter: int = 100, solver=None) -> Discrete:
    space, qp = build_qp(problem, mesh, quad_order)
    sol = solver(qp) if solver is not None else solve_pdas(qp, gamma, max_iter)
    return Discrete(problem, space, qp, sol, HermiteFunction(space, sol.x))


def mesh_sequence(family: str, base: int, levels: int, shift: float = 0.25) -> list[Mesh1D]:
    """``levels`` meshes with halving h.

    ``base`` is the element count of the coarsest mesh; for the third-aligned
    family it is the exponent ``k`` of ``3 * 2**k`` elements.
    """
    if levels < 1 or base < 1 and family != "third-aligned":
        raise ValueError("levels and base must be at least 1")
    if family == "uniform":
        return [uniform_mesh(base * 2**k) for k in range(levels)]
    if family == "perturbed":
        return [perturbed_mesh(base * 2**k, shift) for k in range(levels)]
    if family == "third-aligned":
        return [third_aligned_mesh(base + k) for k in range(levels)]
    raise ValueError(f"unknown mesh family {family!r}; choose from {MESH_FAMILIES}")


@dataclass
class StudyLevel:
    record: analysis.ErrorRecord
    discrete: Discrete


class SolverFailure(RuntimeError):
    def __init__(self, level: int, elements: int, cause: Exception):
        super().__init__(f"solver failed at level {level} ({elements} elements): {cause}")
        self.level = level
        self.elements = elements


@dataclass
class ConvergenceTable:
    problem: str
    family: str
    records: list
    levels: list = field(default_factory=list, repr=False)

    def column(self, key: str) -> list[float]:
        if key.startswith("EOC_"):
            return [r.eoc.get(key[4:], float("nan")) for r in self.records]
        if key in analysis.NORMS:
            return [r.errors[key] for r in self.records]
        return [getattr(r, key) for r in self.records]

    def rows(self) -> list[list]:
        out = []
        for r in self.records:
            row = [r.elements, r.h] + [r.errors[k] for k in analysis.NORMS]
            row += [r.eoc.get(k, float("nan")) for k in analysis.NORMS]
            row += [r.active_nodes, r.mass]
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows():
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_markdown(self) -> str:
        head = ["elements"] + [f"{k} (EOC)" for k in analysis.NORMS] + ["active", "mass"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in self.records:
            cells = [str(r.elements)]
            for k in analysis.NORMS:
                rate = r.eoc.get(k)
                cells.append(_fmt(r.errors[k]) + ("" if rate is None else f" ({rate:.2f})"))
            cells += [str(r.active_nodes), _fmt(r.mass)]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_dat(self) -> str:
        """Whitespace-separated columns with a ``#`` header, for gnuplot."""
        lines = ["# " + " ".join(COLUMNS)]
        for row in self.rows():
            lines.append(" ".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        try:
            return {"csv": self.to_csv, "markdown": self.to_markdown, "dat": self.to_dat}[fmt]()
        except KeyError:
            raise ValueError(f"unknown output format {fmt!r}") from None


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.6e}"


def run_study(problem: ProblemSpec, meshes: list[Mesh1D], quad_order: int | None = None,
              gamma: float = 1.0, max_iter: int = 100, family: str = "custom") -> ConvergenceTable:
    if problem.exact is None:
        raise ValueError("a convergence study needs a problem with a known exact solution")
    records, levels = [], []
    for level, mesh in enumerate(meshes):
        try:
            d = solve_on_mesh(problem, mesh, quad_order, gamma, max_iter)
        except (NoConvergence, LinAlgError) as exc:
            raise SolverFailure(level, mesh.n_elements, exc) from exc
        diag = d.multipliers()
        rec = analysis.ErrorRecord(
            level=level, elements=mesh.n_elements, h=mesh.h,
            errors=analysis.error_norms(d.y_h, problem.exact),
            active_nodes=len(d.sol.active), mass=diag.total_mass, iterations=d.sol.iterations,
        )
        records.append(rec)
        levels.append(StudyLevel(rec, d))
    if len(records) > 1:
        analysis.eoc(records)
    return ConvergenceTable(problem.name, family, records, levels)
