"""Gauss-Legendre rules on panels cut at data breakpoints."""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

DEFAULT_LOAD_ORDER = 6
ERROR_ORDER = 10


def load_order(order: int | None = None) -> int:
    """Explicit order, else ``OCFEM_QUAD_ORDER``, else the default."""
    if order is not None:
        return int(order)
    env = os.environ.get("OCFEM_QUAD_ORDER")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"OCFEM_QUAD_ORDER must be an integer, got {env!r}") from None
        if value < 1:
            raise ValueError("OCFEM_QUAD_ORDER must be at least 1")
        return value
    return DEFAULT_LOAD_ORDER


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on [0, 1]."""
    if order < 1:
        raise ValueError("quadrature order must be at least 1")
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def panels(nodes: np.ndarray, breakpoints=(), max_length: float | None = None
           ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cut every element at the breakpoints falling strictly inside it.

    With ``max_length`` each panel is further split into equal parts no longer
    than that.  Returns ``(element, a, b)`` arrays, one entry per panel, ordered
    left to right.
    """
    nodes = np.asarray(nodes, dtype=float)
    cuts = np.union1d(nodes, np.asarray(breakpoints, dtype=float))
    cuts = cuts[(cuts >= nodes[0]) & (cuts <= nodes[-1])]
    a, b = cuts[:-1], cuts[1:]
    if max_length is not None:
        if not max_length > 0:
            raise ValueError("max_length must be positive")
        parts = np.maximum(1, np.ceil((b - a) / max_length).astype(int))
        if np.any(parts > 1):
            start = np.repeat(a, parts)
            step = np.repeat((b - a) / parts, parts)
            k = np.arange(parts.sum()) - np.repeat(np.cumsum(parts) - parts, parts)
            a = start + k * step
            b = np.where(k == np.repeat(parts, parts) - 1, np.repeat(b, parts), a + step)
    elem = np.searchsorted(nodes, 0.5 * (a + b), side="right") - 1
    return elem, a, b


def panel_points(a: np.ndarray, b: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Physical points and weights, shape ``(panels, order)``."""
    xi, w = gauss_legendre(order)
    length = (b - a)[:, None]
    return a[:, None] + length * xi[None, :], length * w[None, :]


def quadrature_on_element(a: float, b: float, g, breakpoints=(), order: int = DEFAULT_LOAD_ORDER) -> float:
    """Integrate ``g`` over ``[a, b]``, applying the rule on each breakpoint-cut panel."""
    cuts = [a] + sorted(float(c) for c in breakpoints if a < c < b) + [b]
    x, w = panel_points(np.array(cuts[:-1]), np.array(cuts[1:]), order)
    return float(np.sum(w * np.asarray(g(x), dtype=float)))
