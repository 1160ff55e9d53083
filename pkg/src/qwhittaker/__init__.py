"""q-Whittaker functions for gl(l+1) and their q -> 1 limit.

The q-deformed gl(l+1) Whittaker function is a sum over Gelfand-Zetlin
patterns weighted by q-factorials.  It is an eigenfunction of the q-Toda
Hamiltonians and, after rescaling, tends to the classical Whittaker function
given by the Givental integral.
"""

from __future__ import annotations

from .givental import (
    ClassicalValue,
    NonConvergenceError,
    QuadratureConfig,
    classical_eigencheck,
    givental_kernel,
    whittaker_classical,
)
from .patterns import (
    DominantWeight,
    GZPattern,
    count_patterns,
    enumerate_patterns,
    fold_patterns,
    interlacing_set,
)
from .qarith import (
    GaussianRational,
    InexactDivisionError,
    LaurentPoly,
    LogComplex,
    QSeries,
    gaussian_binomial,
    inverse_q_factorial_series,
    q_factorial_exact,
    q_factorial_log,
    q_factorial_series,
)
from .qpsi import (
    FormalQ,
    PositivityError,
    SpectralParams,
    psi_character,
    psi_direct,
    psi_recursive,
    schur_specialization,
)
from .qtoda import EigenReport, HamiltonianSpec, LatticeFunction, apply_hamiltonian, eigenvalue, verify_eigen
from .scaling import (
    DominanceWarning,
    QuantizedPoint,
    ScalingContext,
    A_epsilon,
    eta_modular_residual,
    f_alpha,
    f_alpha_residual,
    hamiltonian_limit_residual,
    limit_scan,
    m_epsilon,
    scaled_psi,
)

__version__ = "0.1.0"
