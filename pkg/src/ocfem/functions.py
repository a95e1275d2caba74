"""Piecewise-smooth data on [-1, 1] with declared breakpoints.

Every piece is a finite sum of terms, each a polynomial in the global
coordinate or ``amp * sin(freq * x + phase)`` / ``amp * cos(freq * x + phase)``.
Derivatives of any order are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial


class Term:
    kind: str

    def __call__(self, x, der: int = 0):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def diff(self, der: int = 1) -> "Term":
        raise NotImplementedError

    def scaled(self, c: float) -> "Term":
        raise NotImplementedError


@dataclass(frozen=True)
class PolyTerm(Term):
    coeffs: tuple  # c0, c1, ..., ck in powers of x
    kind = "poly"

    def __call__(self, x, der: int = 0):
        p = Polynomial(self.coeffs)
        if der:
            p = p.deriv(der)
        return p(np.asarray(x, dtype=float))

    def to_dict(self):
        return {"kind": "poly", "coeffs": [float(c) for c in self.coeffs]}

    def diff(self, der: int = 1):
        return as_polynomial_term(Polynomial(self.coeffs).deriv(der))

    def scaled(self, c: float):
        return PolyTerm(tuple(c * a for a in self.coeffs))


@dataclass(frozen=True)
class TrigTerm(Term):
    kind: str  # "sin" or "cos"
    amp: float
    freq: float
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sin", "cos"):
            raise ValueError(f"unknown trigonometric kind {self.kind!r}")

    def __call__(self, x, der: int = 0):
        # d^k/dx^k sin(wx + p) = w^k sin(wx + p + k*pi/2)
        shift = self.phase + der * math.pi / 2
        if self.kind == "cos":
            shift += math.pi / 2
        return self.amp * self.freq**der * np.sin(self.freq * np.asarray(x, dtype=float) + shift)

    def to_dict(self):
        return {"kind": self.kind, "amp": self.amp, "freq": self.freq, "phase": self.phase}

    def diff(self, der: int = 1):
        return TrigTerm(self.kind, self.amp * self.freq**der, self.freq,
                        self.phase + der * math.pi / 2)

    def scaled(self, c: float):
        return TrigTerm(self.kind, c * self.amp, self.freq, self.phase)


def poly(*coeffs) -> PolyTerm:
    return PolyTerm(tuple(float(c) for c in coeffs))


def as_polynomial_term(p: Polynomial) -> PolyTerm:
    return PolyTerm(tuple(float(c) for c in p.coef))


def term_from_dict(doc: dict) -> Term:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError(f"term must be an object with a 'kind', got {doc!r}")
    kind = doc["kind"]
    if kind == "poly":
        coeffs = doc.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise ValueError("poly term needs a nonempty 'coeffs' list")
        return poly(*coeffs)
    if kind in ("sin", "cos"):
        try:
            return TrigTerm(kind, float(doc["amp"]), float(doc["freq"]), float(doc.get("phase", 0.0)))
        except KeyError as exc:
            raise ValueError(f"{kind} term is missing {exc.args[0]!r}") from None
    raise ValueError(f"unknown term kind {kind!r}")


class Piece:
    """Sum of terms, smooth on its interval."""

    def __init__(self, terms: Sequence[Term]):
        self.terms = tuple(terms)

    def __call__(self, x, der: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t(x, der)
        return out

    def diff(self, der: int = 1) -> "Piece":
        return Piece([t.diff(der) for t in self.terms])

    def scaled(self, c: float) -> "Piece":
        return Piece([t.scaled(c) for t in self.terms])

    def to_dict(self) -> dict:
        if len(self.terms) == 1:
            return self.terms[0].to_dict()
        return {"kind": "sum", "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, doc) -> "Piece":
        if isinstance(doc, dict) and doc.get("kind") == "sum":
            terms = doc.get("terms")
            if not isinstance(terms, list) or not terms:
                raise ValueError("sum segment needs a nonempty 'terms' list")
            return cls([term_from_dict(t) for t in terms])
        return cls([term_from_dict(doc)])


def _as_piece(p) -> Piece:
    if isinstance(p, Piece):
        return p
    if isinstance(p, Term):
        return Piece([p])
    if isinstance(p, (list, tuple)):
        return Piece(p)
    if isinstance(p, (int, float)):
        return Piece([poly(p)])
    raise TypeError(f"cannot build a piece from {p!r}")


class PiecewiseSmooth:
    """Function on [-1, 1] that is smooth between the declared breakpoints.

    ``breakpoints`` are the interior kinks; segment ``i`` lives on
    ``[knots[i], knots[i+1]]`` with ``knots = (-1, *breakpoints, 1)``.
    At a breakpoint the right-hand segment is used, except at ``x = 1``.
    """

    def __init__(self, breakpoints: Sequence[float], segments: Sequence):
        bps = [float(b) for b in breakpoints]
        if any(not -1.0 < b < 1.0 for b in bps):
            raise ValueError("breakpoints must lie strictly inside (-1, 1)")
        if any(b1 >= b2 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(segments) != len(bps) + 1:
            raise ValueError(
                f"{len(bps)} breakpoints need {len(bps) + 1} segments, got {len(segments)}"
            )
        self.breakpoints = np.array(bps)
        self.knots = np.concatenate(([-1.0], self.breakpoints, [1.0]))
        self.segments = tuple(_as_piece(s) for s in segments)

    @classmethod
    def smooth(cls, piece) -> "PiecewiseSmooth":
        return cls([], [piece])

    @classmethod
    def constant(cls, c: float) -> "PiecewiseSmooth":
        return cls([], [poly(c)])

    @property
    def max_frequency(self) -> float:
        """Largest angular frequency among trigonometric terms (0 for piecewise polynomials)."""
        return max((abs(t.freq) for seg in self.segments for t in seg.terms
                    if isinstance(t, TrigTerm)), default=0.0)

    def segment_index(self, x) -> np.ndarray:
        return np.searchsorted(self.breakpoints, x, side="right")

    def __call__(self, x, der: int = 0):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if len(self.segments) == 1:
            out = np.broadcast_to(self.segments[0](x, der), x.shape).astype(float)
        else:
            seg = self.segment_index(x)
            out = np.empty_like(x)
            for i, piece in enumerate(self.segments):
                mask = seg == i
                if mask.any():
                    out[mask] = piece(x[mask], der)
        return float(out[0]) if scalar else out

    def one_sided(self, x: float, side: str, der: int = 0) -> float:
        """Limit from the left (``side='-'``) or right (``'+'``) at ``x``."""
        i = int(np.searchsorted(self.breakpoints, x, side="left" if side == "-" else "right"))
        return float(self.segments[i](np.array([x]), der)[0])

    def diff(self, der: int = 1) -> "PiecewiseSmooth":
        return PiecewiseSmooth(self.breakpoints, [s.diff(der) for s in self.segments])

    def scaled(self, c: float) -> "PiecewiseSmooth":
        return PiecewiseSmooth(self.breakpoints, [s.scaled(c) for s in self.segments])

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def to_dict(self) -> dict:
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "segments": [s.to_dict() for s in self.segments],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PiecewiseSmooth":
        if not isinstance(doc, dict):
            raise ValueError(f"piecewise function must be an object, got {type(doc).__name__}")
        if "segments" not in doc:
            raise ValueError("piecewise function needs 'segments'")
        bps = list(doc.get("breakpoints", []))
        # tolerate endpoints in the list
        bps = [b for b in bps if -1.0 < float(b) < 1.0]
        return cls(bps, [Piece.from_dict(s) for s in doc["segments"]])

    def __add__(self, other: "PiecewiseSmooth") -> "PiecewiseSmooth":
        bps = np.union1d(self.breakpoints, other.breakpoints)
        knots = np.concatenate(([-1.0], bps, [1.0]))
        segs = []
        for a, b in zip(knots[:-1], knots[1:]):
            mid = 0.5 * (a + b)
            segs.append(Piece(self.segments[self.segment_index(mid)].terms
                              + other.segments[other.segment_index(mid)].terms))
        return PiecewiseSmooth(bps, segs)

    def __repr__(self):
        return f"PiecewiseSmooth(breakpoints={self.breakpoints.tolist()}, segments={len(self.segments)})"
