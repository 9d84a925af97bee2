"""Exponential B-spline Galerkin solver for the regularized long wave equation."""

__version__ = "0.1.0"

from .basis import ExpBasis, Mesh, make_basis, make_mesh, eval_piece, knot_value
from .assembly import (
    BandMatrix,
    BandedSystem,
    ElementMatrices,
    SingularSystemError,
    element_matrices,
    assemble_global,
    apply_nonlinear,
    band_solve,
)
from .solver import CoefficientVector, RLWProblem, RLWSolver, fit_initial, run
from .problems import SolitonSpec, WaveMakerSpec, exact_soliton, two_soliton_ic, wavemaker_beta
from .diagnostics import RunReport, invariants, linf_error, track_crests, p_scan
