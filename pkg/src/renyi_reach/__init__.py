"""Dynamics-independent bounds on open-system state transformations.

Computes spectral upper bounds on Renyi divergences and the Bures angle
between an initial system state and anything reachable by a joint unitary
with an environment, the relative-variance and estimator-variance limits
that follow from them, and Monte-Carlo campaigns that check each bound.
"""

from .bounds import (
    BoundSet,
    block_sums,
    bures_bound,
    compute_bounds,
    divergence_bound,
    eigen_divergence_bound,
    estimator_bound,
    extremal_unitary,
    joint_spectrum,
    optimal_spectrum,
    tur_bound,
)
from .divergences import (
    OutcomeDistribution,
    bures_angle,
    chi2_variational_gap,
    chi_squared,
    classical_renyi,
    fidelity,
    measurement_distribution,
    petz_renyi,
    quantum_relative_entropy,
    sandwiched_renyi,
)
from .linalg import (
    Povm,
    Spectrum,
    Tolerances,
    hermitian_eig,
    make_povm,
    matrix_power_psd,
    partial_trace_env,
    tensor_product,
    validate_density,
)
from .sampling import RngSeed, haar_unitary, random_density, random_povm

__version__ = "0.1.0"
