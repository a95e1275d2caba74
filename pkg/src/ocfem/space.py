"""Cubic Hermite C1 elements with Dirichlet or mixed boundary conditions.

Global DOF ``2*i`` is the value at node ``i`` and ``2*i + 1`` its physical
slope, so the derivative bound at a node is a plain upper bound on one DOF.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Mesh1D

BC_TOL = 1e-12


class BcKind(enum.Enum):
    DIRICHLET = "dirichlet"  # y(-1) = y(1) = 0
    MIXED = "mixed"  # y(-1) = y'(1) = 0

    @classmethod
    def parse(cls, value) -> "BcKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown boundary condition {value!r}") from None


class BcViolation(ValueError):
    """Interpolated data does not satisfy the essential boundary conditions."""


class InfeasibleData(ValueError):
    """Problem data violate the standing assumptions (no feasible state)."""


def shape_eval(xi, h: float, der: int = 0) -> np.ndarray:
    """Local basis ``(N_v0, N_s0, N_v1, N_s1)`` or its ``der``-th physical derivative.

    Slope shapes interpolate the physical derivative and so carry a factor ``h``;
    each derivative contributes ``1/h``. Output has shape ``(4,) + shape(xi)``.
    """
    if der not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {der!r}")
    xi = np.asarray(xi, dtype=float)
    h = np.asarray(h, dtype=float)
    if der == 0:
        vals = (1 - 3 * xi**2 + 2 * xi**3, h * (xi - 2 * xi**2 + xi**3),
                3 * xi**2 - 2 * xi**3, h * (-xi**2 + xi**3))
    elif der == 1:
        vals = ((-6 * xi + 6 * xi**2) / h, 1 - 4 * xi + 3 * xi**2,
                (6 * xi - 6 * xi**2) / h, -2 * xi + 3 * xi**2)
    else:
        vals = ((-6 + 12 * xi) / h**2, (-4 + 6 * xi) / h,
                (6 - 12 * xi) / h**2, (-2 + 6 * xi) / h)
    return np.stack(np.broadcast_arrays(*vals))


class HermiteSpace:
    def __init__(self, mesh: Mesh1D, bc):
        self.mesh = mesh
        self.bc = BcKind.parse(bc)
        n_nodes = mesh.n_nodes
        self.n_global = 2 * n_nodes
        if self.bc is BcKind.DIRICHLET:
            masked = (0, 2 * (n_nodes - 1))
        else:
            masked = (0, 2 * (n_nodes - 1) + 1)
        self.masked = masked
        self.free = np.array([g for g in range(self.n_global) if g not in masked])
        self.free_of_global = np.full(self.n_global, -1)
        self.free_of_global[self.free] = np.arange(self.free.size)
        # global DOFs of element e are 2e .. 2e+3
        self.element_dofs = 2 * np.arange(mesh.n_elements)[:, None] + np.arange(4)[None, :]

    @property
    def n_free(self) -> int:
        return int(self.free.size)

    def dof_info(self, j: int) -> tuple[int, str]:
        """``(node, 'value'|'slope')`` of free DOF ``j``."""
        g = int(self.free[j])
        return g // 2, ("value", "slope")[g % 2]

    def slope_dof(self, node: int) -> int:
        """Free index of the slope DOF at ``node`` (-1 if masked)."""
        return int(self.free_of_global[2 * node + 1])

    def value_dof(self, node: int) -> int:
        return int(self.free_of_global[2 * node])

    def expand(self, coeffs) -> np.ndarray:
        """Free coefficients to the full global vector (masked DOFs are 0)."""
        full = np.zeros(self.n_global)
        full[self.free] = coeffs
        return full

    def __repr__(self):
        return f"HermiteSpace({self.mesh!r}, bc={self.bc.value}, free={self.n_free})"


@dataclass(frozen=True, eq=False)
class HermiteFunction:
    space: HermiteSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (self.space.n_free,):
            raise ValueError(f"expected {self.space.n_free} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def nodal_values(self) -> np.ndarray:
        return self.space.expand(self.coefficients)[0::2]

    @property
    def nodal_slopes(self) -> np.ndarray:
        return self.space.expand(self.coefficients)[1::2]

    def eval_on_elements(self, elem, x, der: int = 0) -> np.ndarray:
        """Evaluate at ``x`` using element ``elem`` (arrays of equal shape)."""
        mesh = self.space.mesh
        elem = np.asarray(elem)
        a = mesh.nodes[elem]
        h = mesh.lengths[elem]
        xi = (np.asarray(x, dtype=float) - a) / h
        local = self.space.expand(self.coefficients)[self.space.element_dofs[elem]]
        shapes = shape_eval(xi, h, der)
        return np.einsum("k...,...k->...", shapes, local)

    def __call__(self, x, der: int = 0):
        return eval(self, x, der)


def eval(u: HermiteFunction, x, der: int = 0):
    """Value of the ``der``-th derivative of ``u`` at ``x``.

    At interior nodes the left element is used; this only matters for ``der=2``.
    """
    if der not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {der!r}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < -1.0) or np.any(xs > 1.0) or np.any(np.isnan(xs)):
        raise ValueError("evaluation point outside [-1, 1]")
    out = u.eval_on_elements(u.space.mesh.locate(xs), xs, der)
    return float(out) if xs.ndim == 0 else out


def interpolate(space: HermiteSpace, g: Callable, dg: Callable | None = None) -> HermiteFunction:
    """Nodal Hermite interpolant: matches ``g`` and ``g'`` at every node.

    ``g`` is either a pair of callables (``g``, ``dg``) or a callable accepting
    ``der=1`` (as :class:`~ocfem.functions.PiecewiseSmooth` does).
    """
    nodes = space.mesh.nodes
    if dg is None:
        dg = lambda x: g(x, 1)
    values = np.asarray(g(nodes), dtype=float) * np.ones_like(nodes)
    slopes = np.asarray(dg(nodes), dtype=float) * np.ones_like(nodes)
    full = np.empty(space.n_global)
    full[0::2] = values
    full[1::2] = slopes
    for gdof in space.masked:
        if abs(full[gdof]) > BC_TOL:
            node, kind = gdof // 2, ("value", "slope")[gdof % 2]
            raise BcViolation(
                f"{kind} at node {node} (x={nodes[node]:+g}) is {full[gdof]:.3e}, "
                f"but the {space.bc.value} boundary condition requires 0"
            )
    return HermiteFunction(space, full[space.free])


def constraint_rows(space: HermiteSpace, psi: Callable) -> list[tuple[int, float]]:
    """Nodal derivative bounds ``y'(x_i) <= psi(x_i)`` as ``(free DOF, bound)`` rows.

    With piecewise linear nodal interpolants on both sides, the bound on all of
    [-1, 1] is equivalent to these nodal inequalities. For mixed conditions the
    slope at +1 is fixed to 0 and only needs ``psi(1) >= 0``.
    """
    nodes = space.mesh.nodes
    bounds = np.asarray(psi(nodes), dtype=float) * np.ones_like(nodes)
    if space.bc is BcKind.MIXED and bounds[-1] < 0.0:
        raise InfeasibleData(f"mixed conditions need psi(1) >= 0, got {bounds[-1]:g}")
    rows = []
    for i in range(nodes.size):
        j = space.slope_dof(i)
        if j >= 0:
            rows.append((j, float(bounds[i])))
    return rows
