"""Partitions of the interval (-1, 1).

Node coordinates are built from exact rationals so that 0 and 1/3 come out
bit-exact whenever the construction places a node there.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

QUASI_UNIFORM_BOUND = 4.0

FAMILIES = ("uniform", "perturbed", "third-aligned", "custom")


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Ordered partition of [-1, 1]; element ``i`` is ``[nodes[i], nodes[i+1]]``."""

    nodes: np.ndarray
    family: str = "custom"

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a mesh needs at least one element")
        if nodes[0] != -1.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must start at -1 and end at +1 exactly")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown mesh family {self.family!r}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(self.lengths.max())

    @property
    def quasi_uniformity(self) -> float:
        lengths = self.lengths
        return float(lengths.max() / lengths.min())

    def locate(self, x) -> np.ndarray:
        """Index of the element containing each ``x`` (left element at interior nodes)."""
        idx = np.searchsorted(self.nodes, x, side="left") - 1
        return np.clip(idx, 0, self.n_elements - 1)

    def has_node(self, x: float, tol: float = 0.0) -> bool:
        return bool(np.any(np.abs(self.nodes - x) <= tol))

    def __len__(self):
        return self.n_elements

    def __repr__(self):
        return f"Mesh1D(family={self.family!r}, elements={self.n_elements}, h={self.h:.4g})"


def _rational_nodes(n: int, shift: Fraction = Fraction(0)) -> list[float]:
    pts = [Fraction(-1)]
    for i in range(1, n):
        pts.append(Fraction(2 * i - n, n) + shift * Fraction(2, n))
    pts.append(Fraction(1))
    return [float(p) for p in pts]


def uniform_mesh(n: int) -> Mesh1D:
    """``n`` equal elements of length ``2/n``."""
    if int(n) != n or n < 1:
        raise ValueError(f"element count must be a positive integer, got {n!r}")
    return Mesh1D(np.array(_rational_nodes(int(n))), "uniform")


def perturbed_mesh(n: int, shift: float = 0.25) -> Mesh1D:
    """Uniform mesh with every interior node moved right by ``shift * 2/n``.

    ``n`` must be even so that the unperturbed mesh would contain the origin;
    after the shift the origin is never a node.
    """
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f"perturbed meshes need an even element count, got {n!r}")
    if not 0.0 < shift < 0.5:
        raise ValueError(f"shift must lie in (0, 1/2), got {shift!r}")
    mesh = Mesh1D(np.array(_rational_nodes(int(n), Fraction(shift))), "perturbed")
    assert not mesh.has_node(0.0)
    return mesh


def third_aligned_mesh(k: int) -> Mesh1D:
    """Uniform mesh with ``3 * 2**k`` elements, so that 1/3 is a node."""
    if int(k) != k or k < 0:
        raise ValueError(f"refinement index must be a nonnegative integer, got {k!r}")
    mesh = Mesh1D(np.array(_rational_nodes(3 * 2 ** int(k))), "third-aligned")
    assert mesh.has_node(1.0 / 3.0)
    return mesh


def refine(mesh: Mesh1D) -> Mesh1D:
    """Bisect every element at its midpoint."""
    nodes = mesh.nodes
    out = np.empty(2 * nodes.size - 1)
    out[0::2] = nodes
    out[1::2] = 0.5 * (nodes[:-1] + nodes[1:])
    refined = Mesh1D(out, mesh.family)
    if mesh.family == "perturbed":
        if refined.has_node(0.0):
            raise ValueError("bisection placed a node at the origin; build the level with perturbed_mesh")
    return refined
