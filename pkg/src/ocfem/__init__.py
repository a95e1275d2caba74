"""C1 cubic Hermite finite elements for 1D optimal control with derivative-constrained states."""
from .mesh import Mesh1D, perturbed_mesh, refine, third_aligned_mesh, uniform_mesh
from .space import BcKind, HermiteFunction, HermiteSpace, constraint_rows, interpolate, shape_eval
from .assembly import SymBandMatrix, assemble_load, assemble_system
from .vi_solver import BoundQP, QPSolution, kkt_report, solve_bruteforce, solve_pdas
from .problems import (ProblemSpec, example_dirichlet, example_mixed, load_problem,
                       manufactured_unconstrained, serialize)
from .analysis import eoc, error_norms, multiplier_diag, recover_control
from .study import run_study, solve_on_mesh

__version__ = "0.1.0"
