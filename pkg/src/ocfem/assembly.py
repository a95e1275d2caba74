"""Assembly of a(y, z) = beta (y'', z'') + (y, z) and the load functional."""
from __future__ import annotations

import numpy as np
from scipy import linalg

from .functions import PiecewiseSmooth
from .quadrature import gauss_legendre, load_order, panel_points, panels
from .space import HermiteSpace, shape_eval

BANDWIDTH = 3


class SymBandMatrix:
    """Symmetric banded matrix in LAPACK upper storage.

    ``ab[BANDWIDTH + i - j, j] = A[i, j]`` for ``i <= j``.
    """

    def __init__(self, ab: np.ndarray):
        ab = np.asarray(ab, dtype=float)
        if ab.ndim != 2 or ab.shape[0] != BANDWIDTH + 1:
            raise ValueError(f"banded storage must have {BANDWIDTH + 1} rows")
        self.ab = ab

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "SymBandMatrix":
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        ab = np.zeros((BANDWIDTH + 1, n))
        for k in range(BANDWIDTH + 1):
            # superdiagonal k
            ab[BANDWIDTH - k, k:] = np.diagonal(a, k)
        return cls(ab)

    @property
    def n(self) -> int:
        return self.ab.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.n

    def diagonal(self) -> np.ndarray:
        return self.ab[BANDWIDTH].copy()

    def to_dense(self) -> np.ndarray:
        n = self.n
        a = np.zeros((n, n))
        for k in range(BANDWIDTH + 1):
            d = self.ab[BANDWIDTH - k, k:]
            a += np.diag(d, k)
            if k:
                a += np.diag(d, -k)
        return a

    def __matmul__(self, x):
        x = np.asarray(x)
        if not np.issubdtype(x.dtype, np.floating):
            x = x.astype(float)
        y = self.ab[BANDWIDTH] * x
        for k in range(1, BANDWIDTH + 1):
            d = self.ab[BANDWIDTH - k, k:]
            y[:-k] += d * x[k:]
            y[k:] += d * x[:-k]
        return y

    def submatrix(self, idx) -> "SymBandMatrix":
        """Principal submatrix on sorted indices ``idx``; the band cannot widen."""
        idx = np.asarray(idx, dtype=int)
        m = idx.size
        ab = np.zeros((BANDWIDTH + 1, m))
        for k in range(BANDWIDTH + 1):
            if m <= k:
                break
            i, j = idx[:-k or None], idx[k:]
            off = j - i
            ok = off <= BANDWIDTH
            ab[BANDWIDTH - k, k:][ok] = self.ab[BANDWIDTH - off[ok], j[ok]]
        return SymBandMatrix(ab)

    def columns(self, rows, cols) -> np.ndarray:
        """Dense block ``A[rows][:, cols]``."""
        rows = np.asarray(rows, dtype=int)[:, None]
        cols = np.asarray(cols, dtype=int)[None, :]
        i, j = np.minimum(rows, cols), np.maximum(rows, cols)
        off = j - i
        out = np.zeros(off.shape)
        ok = off <= BANDWIDTH
        out[ok] = self.ab[BANDWIDTH - off[ok], j[ok]]
        return out

    def scaled(self, d: np.ndarray) -> "SymBandMatrix":
        """``diag(d) A diag(d)``."""
        ab = self.ab.copy()
        for k in range(BANDWIDTH + 1):
            ab[BANDWIDTH - k, k:] *= d[:-k or None] * d[k:]
        return SymBandMatrix(ab)

    def cholesky(self) -> np.ndarray:
        return linalg.cholesky_banded(self.ab, lower=False)

    def solve(self, rhs) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0)
        return linalg.solveh_banded(self.ab, rhs, lower=False)

    def __repr__(self):
        return f"SymBandMatrix(n={self.n}, bandwidth={BANDWIDTH})"


def local_matrices(h: float) -> tuple[np.ndarray, np.ndarray]:
    """Element bending and mass blocks for an element of length ``h``."""
    xi2, w2 = gauss_legendre(2)
    xi4, w4 = gauss_legendre(4)
    d2 = shape_eval(xi2, h, 2)
    v = shape_eval(xi4, h, 0)
    bending = h * (d2 * w2) @ d2.T
    mass = h * (v * w4) @ v.T
    return bending, mass


def _scatter(space: HermiteSpace, blocks: np.ndarray) -> SymBandMatrix:
    n_global = space.n_global
    ab = np.zeros((BANDWIDTH + 1, n_global))
    for e, dofs in enumerate(space.element_dofs):
        for a in range(4):
            for b in range(a, 4):
                i, j = dofs[a], dofs[b]
                ab[BANDWIDTH + i - j, j] += blocks[e, a, b]
    return SymBandMatrix(ab).submatrix(space.free)


def assemble_bending(space: HermiteSpace) -> SymBandMatrix:
    return _scatter(space, np.array([local_matrices(h)[0] for h in space.mesh.lengths]))


def assemble_mass(space: HermiteSpace) -> SymBandMatrix:
    return _scatter(space, np.array([local_matrices(h)[1] for h in space.mesh.lengths]))


def assemble_system(space: HermiteSpace, beta: float) -> SymBandMatrix:
    """Matrix of a(., .) on the free DOFs."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    blocks = []
    for h in space.mesh.lengths:
        s, m = local_matrices(h)
        blocks.append(beta * s + m)
    return _scatter(space, np.array(blocks))


def assemble_load(space: HermiteSpace, y_d: PiecewiseSmooth, f: PiecewiseSmooth, beta: float,
                  order: int | None = None) -> np.ndarray:
    """``b_j = (y_d, phi_j) - beta (f, phi_j'')`` with panels cut at the data breakpoints.

    Oscillatory data additionally get panels no longer than half a radian of
    their fastest mode, so a fixed rule stays accurate on coarse meshes.
    """
    order = load_order(order)
    mesh = space.mesh
    bps = np.union1d(y_d.breakpoints, f.breakpoints)
    freq = max(y_d.max_frequency, f.max_frequency)
    elem, a, b = panels(mesh.nodes, bps, 0.5 / freq if freq > 0 else None)
    x, w = panel_points(a, b, order)
    h = mesh.lengths[elem][:, None]
    xi = (x - mesh.nodes[elem][:, None]) / h
    yd_vals = y_d(x) * w
    f_vals = f(x) * w
    local = (np.einsum("kpq,pq->pk", shape_eval(xi, h, 0), yd_vals)
             - beta * np.einsum("kpq,pq->pk", shape_eval(xi, h, 2), f_vals))
    full = np.zeros(space.n_global)
    np.add.at(full, space.element_dofs[elem], local)
    return full[space.free]
