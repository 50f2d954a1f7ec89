"""Balanced Pólya processes: Jordan data, reduced polynomials, moments and simulation."""

__version__ = "0.1.0"

from .errors import PolyaError
from .fixtures import FIXTURES, get_fixture
from .moments import asymptotic_moment, exact_moment, gamma_eval, limit_w_moment, moment_report
from .operator import ReducedTable, nilpotence_index, phi_apply, phi_partial_apply, reduced_polynomial
from .process import ProcessSpec, canonicalize, spec_from_mapping, standardize_urn, validate_process
from .simulate import Estimand, SimConfig, estimate_moments, final_states, simulate_trajectory
from .spectral import analyze, build_jordan_basis, classify_power, classify_process, compute_spectrum
from .upoly import UPolynomial

__all__ = [
    "FIXTURES",
    "Estimand",
    "PolyaError",
    "ProcessSpec",
    "ReducedTable",
    "SimConfig",
    "UPolynomial",
    "analyze",
    "asymptotic_moment",
    "build_jordan_basis",
    "canonicalize",
    "classify_power",
    "classify_process",
    "compute_spectrum",
    "estimate_moments",
    "exact_moment",
    "final_states",
    "gamma_eval",
    "get_fixture",
    "limit_w_moment",
    "moment_report",
    "nilpotence_index",
    "phi_apply",
    "phi_partial_apply",
    "reduced_polynomial",
    "simulate_trajectory",
    "spec_from_mapping",
    "standardize_urn",
    "validate_process",
]
