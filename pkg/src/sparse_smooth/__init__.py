"""Sparse-plus-smooth reconstruction of 1D signals from linear measurements.

The continuous-domain problem (a generalized total-variation term on one
component plus a generalized Tikhonov term on the other) is discretized
exactly with B-spline bases, solved with ADMM, and the sparse component is
moved to an extreme point of its solution set by linear programming.
"""

from .filters import (DigitalFilter, PiecewisePoly, autocorrelation, bspline, fd_filter,
                      filter_table, greens_function, sampled_kernel, spectral_factor)
from .forward import MeasurementFunctional, assemble_system_matrix, make_cosine_model
from .grid import CoefficientVector, CompositeSolution, GridSpec, IndexRanges, index_ranges
from .kernels import BACKEND
from .problem import ProblemSetup, build_problem
from .regularization import assemble_boundary, assemble_L1, assemble_L2
from .solver import (AdmmConfig, CompositeProblem, IllPosedError, SolverReport, solve_composite,
                     solve_smooth_only, solve_sparse_only)
from .sparsify import SparsifyResult, count_knots, sparsify

__version__ = "0.1.0"
