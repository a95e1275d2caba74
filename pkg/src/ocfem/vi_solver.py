"""Upper-bound constrained convex QPs: min 1/2 x'Ax - b'x  s.t.  x_i <= c_i on bounded rows.

KKT system: Ax - b + lam = 0 (lam supported on bounded rows), x <= c,
lam >= 0, lam * (c - x) = 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .assembly import SymBandMatrix

FEAS_TOL = 1e-10
LAMBDA_TOL = 1e-12
COMPL_TOL = 1e-9
STAT_TOL = 1e-9
MAX_BRUTEFORCE_ROWS = 16


class NoConvergence(RuntimeError):
    def __init__(self, message, previous=frozenset(), last=frozenset()):
        super().__init__(message)
        self.previous = previous
        self.last = last


class TooLarge(ValueError):
    pass


@dataclass
class BoundQP:
    A: SymBandMatrix
    b: np.ndarray
    bounds: Sequence[tuple[int, float]] = ()

    def __post_init__(self):
        if not isinstance(self.A, SymBandMatrix):
            self.A = SymBandMatrix.from_dense(self.A)
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.A.n,):
            raise ValueError("load vector does not match matrix size")
        rows = sorted((int(i), float(c)) for i, c in self.bounds)
        idx = [i for i, _ in rows]
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate bound rows")
        if idx and (idx[0] < 0 or idx[-1] >= self.A.n):
            raise ValueError("bound row index out of range")
        self.bounds = rows

    @property
    def bound_index(self) -> np.ndarray:
        return np.array([i for i, _ in self.bounds], dtype=int)

    @property
    def bound_value(self) -> np.ndarray:
        return np.array([c for _, c in self.bounds], dtype=float)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.A @ x) - self.b @ x)


@dataclass
class QPSolution:
    x: np.ndarray
    lam: np.ndarray  # one entry per bound row, in row order
    active: frozenset  # positions into qp.bounds
    iterations: int
    kkt_residual: float = float("nan")
    history: list = field(default_factory=list, repr=False)


class KKTReport(NamedTuple):
    stationarity: float
    feasibility: float
    complementarity: float
    min_lambda: float
    b_scale: float

    @property
    def ok(self) -> bool:
        return (self.stationarity <= STAT_TOL * (1 + self.b_scale)
                and self.feasibility <= FEAS_TOL
                and self.complementarity <= COMPL_TOL
                and self.min_lambda >= -LAMBDA_TOL)


def _solve_with_active(A: SymBandMatrix, b, idx, c, active_rows):
    """Fix ``x[idx[r]] = c[r]`` for r in active_rows, solve for the rest."""
    n = A.n
    fixed = idx[list(active_rows)] if active_rows else np.zeros(0, dtype=int)
    x = np.zeros(n)
    x[fixed] = c[list(active_rows)] if active_rows else 0.0
    free = np.setdiff1d(np.arange(n), fixed)
    rhs = b[free]
    if fixed.size:
        rhs = rhs - A.columns(free, fixed) @ x[fixed]
    x[free] = A.submatrix(free).solve(rhs)
    residual = b - A @ x  # = lam on the bounded rows
    lam = np.zeros(len(idx))
    if active_rows:
        rows = list(active_rows)
        lam[rows] = residual[idx[rows]]
    return x, lam


def _polish(A: SymBandMatrix, b, idx, c, active_rows, x, steps: int = 3):
    """Iterative refinement with the iterate kept in extended precision.

    Near h = 1/128 the bending entries reach 1e7, so a float64 iterate cannot
    push the stationarity residual below |A||x| eps; corrections still use the
    float64 banded factorization.
    """
    ld = np.longdouble
    rows = sorted(active_rows)
    fixed = idx[rows] if rows else np.zeros(0, dtype=int)
    free = np.setdiff1d(np.arange(A.n), fixed)
    x = np.asarray(x, dtype=ld).copy()
    if rows:
        x[fixed] = np.asarray(c, dtype=ld)[rows]
    b = np.asarray(b, dtype=ld)
    sub = A.submatrix(free)
    for _ in range(steps):
        r = b - A @ x
        x[free] += sub.solve(np.asarray(r[free], dtype=float))
    residual = b - A @ x
    lam = np.zeros(len(idx), dtype=ld)
    if rows:
        lam[rows] = residual[idx[rows]]
    return x, lam


def kkt_report(qp: BoundQP, sol: QPSolution) -> KKTReport:
    """Residuals of the discrete KKT system, largest violation of each part."""
    idx, c = qp.bound_index, qp.bound_value
    r = qp.A @ np.asarray(sol.x, dtype=np.longdouble) - qp.b
    if idx.size:
        r[idx] += sol.lam
        gap = c - sol.x[idx]
        feas = float(max(0.0, -float(gap.min())))
        compl = float(np.max(np.abs(sol.lam * gap)))
        min_lam = float(sol.lam.min())
    else:
        feas, compl, min_lam = 0.0, 0.0, 0.0
    b_scale = float(np.max(np.abs(qp.b))) if qp.b.size else 0.0
    return KKTReport(float(np.max(np.abs(r))) if r.size else 0.0, feas, compl, min_lam, b_scale)


def solve_pdas(qp: BoundQP, gamma: float = 1.0, max_iter: int = 100) -> QPSolution:
    """Primal-dual active set method.

    Works on the symmetrically scaled problem with unit diagonal, where the
    active-set prediction ``lam + gamma (x - c) > 0`` is well balanced.
    Stops as soon as two consecutive active sets coincide.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    d = 1.0 / np.sqrt(qp.A.diagonal())
    A = qp.A.scaled(d)
    b = d * qp.b
    idx, c = qp.bound_index, qp.bound_value
    c_s = c / d[idx]

    x = np.zeros(A.n)
    lam = np.zeros(idx.size)
    active = frozenset(np.flatnonzero(lam + gamma * (x[idx] - c_s) > 0).tolist())
    history = [active]
    for it in range(1, max_iter + 1):
        x, lam = _solve_with_active(A, b, idx, c_s, sorted(active))
        new = frozenset(np.flatnonzero(lam + gamma * (x[idx] - c_s) > 0).tolist())
        if new == active:
            x, lam = _polish(qp.A, qp.b, idx, c, active, d * x)
            sol = QPSolution(x, lam, active, it, history=history)
            sol.kkt_residual = kkt_report(qp, sol).stationarity
            return sol
        active = new
        history.append(active)
    prev = history[-2] if len(history) > 1 else frozenset()
    raise NoConvergence(
        f"PDAS did not settle within {max_iter} iterations "
        f"(last active sets: {sorted(prev)} -> {sorted(active)})",
        previous=prev, last=active,
    )


def solve_bruteforce(qp: BoundQP) -> QPSolution:
    """Enumerate every candidate active set; smallest valid set wins."""
    m = len(qp.bounds)
    if m > MAX_BRUTEFORCE_ROWS:
        raise TooLarge(f"{m} bound rows exceed the enumeration limit of {MAX_BRUTEFORCE_ROWS}")
    A, b = qp.A, qp.b
    idx, c = qp.bound_index, qp.bound_value
    scale = 1.0 + np.abs(c)
    lam_scale = 1.0 + (np.max(np.abs(b)) if b.size else 0.0)
    tried = 0
    for size in range(m + 1):
        for rows in itertools.combinations(range(m), size):
            tried += 1
            x, lam = _solve_with_active(A, b, idx, c, list(rows))
            if np.any(x[idx] - c > FEAS_TOL * scale):
                continue
            if np.any(lam < -1e-10 * lam_scale):
                continue
            x, lam = _polish(A, b, idx, c, rows, x)
            sol = QPSolution(x, lam, frozenset(rows), tried)
            sol.kkt_residual = kkt_report(qp, sol).stationarity
            return sol
    raise RuntimeError("no candidate active set satisfied the KKT conditions; is A positive definite?")
