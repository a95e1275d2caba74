"""Benchmark problems with known optimal states, and JSON problem documents."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .functions import PiecewiseSmooth, Piece, TrigTerm, as_polynomial_term, poly
from .quadrature import quadrature_on_element
from .space import BcKind, InfeasibleData

SAMPLES = 1000
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class ActiveSet:
    points: tuple = ()
    intervals: tuple = ()  # closed (a, b) pairs

    def distance(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = np.full(x.shape, np.inf)
        for p in self.points:
            d = np.minimum(d, np.abs(x - p))
        for a, b in self.intervals:
            d = np.minimum(d, np.maximum.reduce([a - x, x - b, np.zeros_like(x)]))
        return d

    def to_dict(self) -> dict:
        return {"points": list(self.points), "intervals": [list(i) for i in self.intervals]}

    @classmethod
    def from_dict(cls, doc) -> "ActiveSet":
        if doc is None:
            return cls()
        if not isinstance(doc, dict):
            raise ValueError("active_set must be an object with 'points' and/or 'intervals'")
        intervals = tuple((float(a), float(b)) for a, b in doc.get("intervals", []))
        return cls(tuple(float(p) for p in doc.get("points", [])), intervals)


@dataclass(frozen=True)
class Measure:
    """Nonnegative measure: point atoms, a density, and ``gamma`` times a unit atom at -1."""

    atoms: tuple = ()  # (location, mass) pairs
    density: PiecewiseSmooth | None = None
    gamma: float = 0.0

    def total_mass(self) -> float:
        mass = sum(m for _, m in self.atoms) + self.gamma
        if self.density is not None:
            mass += quadrature_on_element(-1.0, 1.0, self.density, self.density.breakpoints, order=20)
        return float(mass)

    def to_dict(self) -> dict:
        doc = {"atoms": [[x, m] for x, m in self.atoms], "gamma": self.gamma}
        if self.density is not None:
            doc["density"] = self.density.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc) -> "Measure":
        if doc is None:
            return cls()
        if not isinstance(doc, dict):
            raise ValueError("mu must be an object")
        density = None
        if "density" in doc:
            density = PiecewiseSmooth.from_dict(doc["density"])
        elif "density_segments" in doc:
            density = PiecewiseSmooth.from_dict(
                {"breakpoints": doc.get("density_breakpoints", []), "segments": doc["density_segments"]})
        atoms = tuple((float(x), float(m)) for x, m in doc.get("atoms", []))
        return cls(atoms, density, float(doc.get("gamma", 0.0)))


@dataclass(frozen=True)
class ExactInfo:
    ybar: PiecewiseSmooth
    ubar: PiecewiseSmooth
    active_set: ActiveSet = field(default_factory=ActiveSet)
    mu: Measure = field(default_factory=Measure)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.union1d(self.ybar.breakpoints, self.ubar.breakpoints)


@dataclass(frozen=True)
class ProblemSpec:
    beta: float
    bc: BcKind
    f: PiecewiseSmooth
    psi: PiecewiseSmooth
    y_d: PiecewiseSmooth
    exact: ExactInfo | None = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "bc", BcKind.parse(self.bc))
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        check_data(self.bc, self.psi)
        if self.exact is not None:
            check_exact(self, self.exact)


def check_data(bc: BcKind, psi: PiecewiseSmooth) -> None:
    """Standing assumptions on the constraint bound."""
    if bc is BcKind.DIRICHLET:
        total = quadrature_on_element(-1.0, 1.0, psi, psi.breakpoints, order=20)
        if total <= 0.0:
            raise InfeasibleData(
                f"Dirichlet problems need a positive integral of psi (got {total:.3e}); "
                "otherwise the feasible set is at most a single state"
            )
    elif psi(1.0) < 0.0:
        raise InfeasibleData(f"mixed problems need psi(1) >= 0, got {psi(1.0):g}")


def check_exact(problem: ProblemSpec, exact: ExactInfo) -> None:
    y = exact.ybar
    if abs(y(-1.0)) > EXACT_TOL:
        raise ValueError(f"exact state violates y(-1) = 0: {y(-1.0):.3e}")
    end = y(1.0) if problem.bc is BcKind.DIRICHLET else y(1.0, 1)
    if abs(end) > EXACT_TOL:
        raise ValueError(f"exact state violates the boundary condition at +1: {end:.3e}")
    xs = np.linspace(-1.0, 1.0, SAMPLES)
    excess = np.max(y(xs, 1) - problem.psi(xs))
    if excess > EXACT_TOL:
        raise ValueError(f"exact state violates y' <= psi by {excess:.3e}")
    if exact.mu.gamma < 0:
        raise ValueError("boundary atom weight must be nonnegative")
    if any(m < 0 for _, m in exact.mu.atoms):
        raise ValueError("measure atoms must be nonnegative")
    if exact.mu.density is not None and np.min(exact.mu.density(xs)) < -EXACT_TOL:
        raise ValueError("measure density must be nonnegative")


def control_of(ybar: PiecewiseSmooth, f: PiecewiseSmooth) -> PiecewiseSmooth:
    """u = -y'' - f."""
    return -(ybar.diff(2) + f)


def example_dirichlet() -> ProblemSpec:
    """Dirichlet benchmark: unit bound on y', Dirac multiplier at the origin."""
    x = Polynomial([0.0, 1.0])
    bubble = (1 - x**2) ** 3 / 12
    left = -(x + 1) / 2 + (x + 1) ** 3 / 2 + bubble
    right = -(x - 1) / 2 + (x - 1) ** 3 / 2 + bubble
    ybar = PiecewiseSmooth([0.0], [as_polynomial_term(left), as_polynomial_term(right)])
    f = PiecewiseSmooth([0.0], [as_polynomial_term(7 * (x**2 - 1)), poly(0.0)])
    g = 6 * (1 - 5 * x**2)
    y_d = PiecewiseSmooth([0.0], [as_polynomial_term(left + 14 + g), as_polynomial_term(right + g)])
    exact = ExactInfo(
        ybar=ybar,
        ubar=control_of(ybar, f),
        active_set=ActiveSet(points=(0.0,)),
        mu=Measure(atoms=((0.0, 1.0),)),
    )
    return ProblemSpec(1.0, BcKind.DIRICHLET, f, PiecewiseSmooth.constant(1.0), y_d, exact,
                       name="example-dirichlet")


def example_mixed() -> ProblemSpec:
    """Mixed benchmark: y' = 1 on [-1, 1/3], absolutely continuous multiplier."""
    third = 1.0 / 3.0
    w = 9.0 * math.pi / 4.0
    # y' = sin(w x - pi/4) right of 1/3
    ybar = PiecewiseSmooth([third], [
        poly(1.0, 1.0),
        Piece([poly(4.0 / 3.0), TrigTerm("cos", -1.0 / w, w, -math.pi / 4)]),
    ])
    p3 = TrigTerm("cos", -w**3, w, -math.pi / 4)
    y_d = PiecewiseSmooth([third], [poly(1.0, 1.0), Piece(ybar.segments[1].terms + (p3,))])
    f = PiecewiseSmooth.constant(0.0)
    exact = ExactInfo(
        ybar=ybar,
        ubar=control_of(ybar, f),
        active_set=ActiveSet(intervals=((-1.0, third),)),
        mu=Measure(density=PiecewiseSmooth([third], [poly(w**2), poly(0.0)]), gamma=0.0),
    )
    return ProblemSpec(1.0, BcKind.MIXED, f, PiecewiseSmooth.constant(1.0), y_d, exact,
                       name="example-mixed")


def manufactured_unconstrained(p, bc, beta: float = 1.0) -> ProblemSpec:
    """Data for which the cubic ``p`` is the unconstrained optimum and the bound never binds."""
    p = p if isinstance(p, Polynomial) else Polynomial(p)
    if p.degree() > 3:
        raise ValueError("manufactured state must be at most cubic")
    bc = BcKind.parse(bc)
    end = p(1.0) if bc is BcKind.DIRICHLET else p.deriv()(1.0)
    if abs(p(-1.0)) > EXACT_TOL or abs(end) > EXACT_TOL:
        raise ValueError(f"polynomial does not satisfy the {bc.value} boundary conditions")
    # |p'| <= sum |coeffs of p'| on [-1, 1]
    psi = float(np.sum(np.abs(p.deriv().coef))) + 1.0
    ybar = PiecewiseSmooth.smooth(as_polynomial_term(p))
    f = -ybar.diff(2)
    exact = ExactInfo(ybar, control_of(ybar, f))
    return ProblemSpec(beta, bc, f, PiecewiseSmooth.constant(psi), ybar, exact, name="manufactured")


BUILTIN = {
    "example-dirichlet": example_dirichlet,
    "example-mixed": example_mixed,
}


def builtin(name: str) -> ProblemSpec:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(BUILTIN)}") from None


def serialize(problem: ProblemSpec) -> dict:
    doc = {
        "bc": problem.bc.value,
        "beta": problem.beta,
        "f": problem.f.to_dict(),
        "psi": problem.psi.to_dict(),
        "yd": problem.y_d.to_dict(),
    }
    if problem.exact is not None:
        ex = problem.exact
        doc["exact"] = dict(ex.ybar.to_dict(), active_set=ex.active_set.to_dict(), mu=ex.mu.to_dict())
    return doc


def load_problem(document: dict, name: str = "custom") -> ProblemSpec:
    """Build a problem from a parsed JSON document."""
    if not isinstance(document, dict):
        raise ValueError("problem document must be a JSON object")
    missing = [k for k in ("bc", "beta", "f", "psi", "yd") if k not in document]
    if missing:
        raise ValueError(f"problem document is missing {missing}")
    bc = BcKind.parse(document["bc"])
    try:
        beta = float(document["beta"])
    except (TypeError, ValueError):
        raise ValueError(f"beta must be a number, got {document['beta']!r}") from None
    fields = {}
    for key in ("f", "psi", "yd"):
        try:
            fields[key] = PiecewiseSmooth.from_dict(document[key])
        except (ValueError, TypeError) as exc:
            raise ValueError(f"{key}: {exc}") from None
    exact = None
    if document.get("exact") is not None:
        ex = document["exact"]
        try:
            ybar = PiecewiseSmooth.from_dict(ex)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"exact: {exc}") from None
        exact = ExactInfo(ybar, control_of(ybar, fields["f"]),
                          ActiveSet.from_dict(ex.get("active_set")), Measure.from_dict(ex.get("mu")))
    return ProblemSpec(beta, bc, fields["f"], fields["psi"], fields["yd"], exact, name=name)
