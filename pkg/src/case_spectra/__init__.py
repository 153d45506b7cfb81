"""Discrete eigenvalues of the one-speed transport equation.

The eigenvalues of the symmetric tridiagonal matrix ``B^m`` outside ``[-1, 1]`` are
the discrete eigenvalues; each can be checked independently as a zero of the
dispersion function ``Lambda^m``.
"""
from .chandrasekhar import ChandrasekharTable, gamma_eval, h_negative_m, h_table
from .dispersion import DispersionSample, big_lambda, big_lambda_many, eval_phi_discrete, find_roots, lambda_pv
from .errors import DomainError, InconsistencyError, NumericalFailure, PreconditionError
from .markel import SymTridiag, build_markel, coefficients_from_eigenvector
from .phase import PhaseFunction, make_custom, make_henyey_greenstein, make_isotropic, sigma
from .tridiag_eigen import (
    EigenDecomposition,
    all_eigenvalues,
    eigenvalues_by_index,
    eigenvalues_outside,
    eigenvector,
    eigenvectors,
    sturm_count,
)

__version__ = "0.1.0"
