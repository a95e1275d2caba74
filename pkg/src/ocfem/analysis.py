"""Error norms against exact solutions, convergence orders and multiplier diagnostics."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .functions import PiecewiseSmooth
from .problems import ExactInfo, ProblemSpec
from .quadrature import ERROR_ORDER, panel_points, panels
from .space import HermiteFunction, HermiteSpace
from .vi_solver import QPSolution

log = logging.getLogger(__name__)

NORMS = ("L2", "Linf", "H1", "H2")
LINF_SAMPLES = 32


@dataclass
class ErrorRecord:
    level: int
    elements: int
    h: float
    errors: dict
    eoc: dict = field(default_factory=dict)
    active_nodes: int = 0
    mass: float = float("nan")
    iterations: int = 0


def _panel_values(u_h: HermiteFunction, g, breakpoints, order: int, der: int):
    mesh = u_h.space.mesh
    elem, a, b = panels(mesh.nodes, breakpoints)
    x, w = panel_points(a, b, order)
    elem2 = np.broadcast_to(elem[:, None], x.shape)
    return x, w, u_h.eval_on_elements(elem2, x, der), g(x, der)


def seminorm_error(u_h: HermiteFunction, g, der: int, breakpoints=(), order: int = ERROR_ORDER) -> float:
    """``|g - u_h|`` in the L2 norm of the ``der``-th derivative."""
    _, w, uh, gv = _panel_values(u_h, g, breakpoints, order, der)
    return math.sqrt(float(np.sum(w * (gv - uh) ** 2)))


def linf_error(u_h: HermiteFunction, g, samples: int = LINF_SAMPLES) -> float:
    """Sampled max error: ``samples`` equispaced points per element, nodes included."""
    mesh = u_h.space.mesh
    t = np.linspace(0.0, 1.0, samples)
    x = mesh.nodes[:-1, None] + mesh.lengths[:, None] * t[None, :]
    elem = np.broadcast_to(np.arange(mesh.n_elements)[:, None], x.shape)
    return float(np.max(np.abs(g(x) - u_h.eval_on_elements(elem, x, 0))))


def error_norms(u_h: HermiteFunction, exact: ExactInfo, order: int = ERROR_ORDER) -> dict:
    bps = exact.ybar.breakpoints
    y = exact.ybar
    return {
        "L2": seminorm_error(u_h, y, 0, bps, order),
        "Linf": linf_error(u_h, y),
        "H1": seminorm_error(u_h, y, 1, bps, order),
        "H2": seminorm_error(u_h, y, 2, bps, order),
    }


def energy_error(u_h: HermiteFunction, exact: ExactInfo, beta: float, order: int = ERROR_ORDER) -> float:
    """``||y - u_h||_a`` with ``||v||_a^2 = ||v||^2 + beta |v|_{H2}^2``."""
    bps = exact.ybar.breakpoints
    l2 = seminorm_error(u_h, exact.ybar, 0, bps, order)
    h2 = seminorm_error(u_h, exact.ybar, 2, bps, order)
    return math.sqrt(l2**2 + beta * h2**2)


def convergence_rate(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float) -> float:
    if not (e_coarse > 0 and e_fine > 0):
        return float("nan")
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def eoc(records: list[ErrorRecord]) -> list[ErrorRecord]:
    """Fill in convergence orders; equals log2 of the error ratio when h halves.

    A zero error makes the rate undefined (NaN), never infinite.
    """
    if len(records) < 2:
        raise ValueError("convergence orders need at least two levels")
    records[0].eoc = {}
    for prev, cur in zip(records, records[1:]):
        cur.eoc = {k: convergence_rate(prev.errors[k], cur.errors[k], prev.h, cur.h)
                   for k in cur.errors}
    return records


def rates(errors, hs=None) -> list[float]:
    """Orders from a bare error sequence (halving h unless ``hs`` given)."""
    errors = list(errors)
    if hs is None:
        hs = [2.0**-k for k in range(len(errors))]
    return [convergence_rate(e0, e1, h0, h1)
            for e0, e1, h0, h1 in zip(errors, errors[1:], hs, hs[1:])]


class DiscreteControl:
    """``u_h = -y_h'' - f``; discontinuous at mesh nodes and data breakpoints."""

    def __init__(self, y_h: HermiteFunction, f: PiecewiseSmooth):
        self.y_h = y_h
        self.f = f
        self.breakpoints = np.union1d(y_h.space.mesh.nodes[1:-1], f.breakpoints)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        elem = self.y_h.space.mesh.locate(x)
        return -self.y_h.eval_on_elements(elem, x, 2) - self.f(x)


def recover_control(y_h: HermiteFunction, f: PiecewiseSmooth) -> DiscreteControl:
    return DiscreteControl(y_h, f)


def control_error(y_h: HermiteFunction, problem: ProblemSpec, order: int = ERROR_ORDER) -> float:
    """``||u - u_h||_{L2}`` evaluated panel by panel against the exact control."""
    u_h = recover_control(y_h, problem.f)
    ubar = problem.exact.ubar
    mesh = y_h.space.mesh
    elem, a, b = panels(mesh.nodes, np.union1d(ubar.breakpoints, problem.f.breakpoints))
    x, w = panel_points(a, b, order)
    elem2 = np.broadcast_to(elem[:, None], x.shape)
    uh = -y_h.eval_on_elements(elem2, x, 2) - problem.f(x)
    return math.sqrt(float(np.sum(w * (ubar(x) - uh) ** 2)))


@dataclass
class MultiplierDiag:
    nodes: np.ndarray  # positions of the bounded slope DOFs
    lam: np.ndarray
    active_nodes: np.ndarray
    total_mass: float
    exact_mass: float | None = None
    stray_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def mass_ratio(self) -> float:
        if not self.exact_mass:
            return float("nan")
        return self.total_mass / self.exact_mass


def multiplier_diag(sol: QPSolution, space: HermiteSpace, problem: ProblemSpec,
                    bound_rows) -> MultiplierDiag:
    """Nodal multipliers, their total mass and where the active nodes sit.

    The mass is the plain sum of the nodal multipliers: the stationarity row
    already pairs them with slope test values, so no rescaling by beta.
    """
    positions = np.array([space.mesh.nodes[space.dof_info(j)[0]] for j, _ in bound_rows])
    active = np.array(sorted(positions[r] for r in sol.active))
    diag = MultiplierDiag(positions, np.array(sol.lam, dtype=float), active, float(np.sum(sol.lam)))
    if problem.exact is not None:
        diag.exact_mass = problem.exact.mu.total_mass()
        if active.size:
            dist = problem.exact.active_set.distance(active)
            diag.stray_nodes = active[dist > 2 * space.mesh.h]
            if diag.stray_nodes.size:
                log.warning("active nodes far from the exact active set: %s", diag.stray_nodes)
    return diag
