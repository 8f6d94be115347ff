"""Dynamics-independent bounds on reachable system states.

Every quantity here depends only on the spectra of the initial system and
environment states. The joint spectrum of ``rho_S (x) rho_E`` is invariant
under any joint unitary, and the most-majorizing reduced spectrum that can
be reached is obtained by packing the largest joint eigenvalues into the
first ``d_E``-sized block, the next largest into the second, and so on.
Pairing that spectrum anti-aligned against ``lambda(rho_S)`` gives the
largest attainable Renyi divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .divergences import check_alpha
from .linalg import as_spectrum, hermitian_eig, sort_ascending, sort_descending
from .majorization import pairing_function, renyi_of_sum

#: A TUR bracket at or below this value is treated as zero (no reachable change).
BRACKET_ZERO = 1e-12


@dataclass(frozen=True)
class JointSpectrum:
    values: np.ndarray
    d_s: int
    d_e: int


def joint_spectrum(lambda_s, lambda_e) -> JointSpectrum:
    """All products of system and environment eigenvalues, descending."""
    s = as_spectrum(lambda_s)
    e = as_spectrum(lambda_e)
    prod = np.outer(s.values, e.values).ravel()
    return JointSpectrum(sort_descending(prod), len(s), len(e))


def block_sums(joint: JointSpectrum) -> np.ndarray:
    """``C_k``, the sum of the ``k * d_E`` largest joint eigenvalues, ``k = 1..d_S``."""
    csum = np.cumsum(joint.values)
    return csum[joint.d_e - 1 :: joint.d_e].copy()


def optimal_spectrum(c_sums) -> np.ndarray:
    """Successive differences ``[C_1, C_2 - C_1, ...]``."""
    c = np.asarray(c_sums, dtype=float)
    return np.clip(np.diff(c, prepend=0.0), 0.0, None)


def reachable_optimum(lambda_s, lambda_e) -> np.ndarray:
    """Spectrum of the reduced state that majorizes every reachable one."""
    return optimal_spectrum(block_sums(joint_spectrum(lambda_s, lambda_e)))


def eigen_divergence_bound(lambda_rho, lambda_sigma, alpha: float) -> float:
    """Upper bound on ``D_alpha(rho||sigma)`` over all states with these spectra.

    Pairs the ascending spectrum of ``rho`` with the descending spectrum of
    ``sigma``. Also bounds the sandwiched divergence.
    """
    alpha = check_alpha(alpha)
    value = renyi_of_sum(pairing_function(lambda_rho, lambda_sigma, alpha), alpha)
    return 0.0 if -1e-12 <= value < 0 else value


def divergence_bound(lambda_s, lambda_e, alpha: float) -> float:
    """Largest ``D_alpha(rho_S||sigma_S)`` over all joint unitaries."""
    s = as_spectrum(lambda_s)
    return eigen_divergence_bound(s.values, reachable_optimum(s, lambda_e), alpha)


def bures_bound(lambda_s, lambda_e) -> float:
    """Largest Bures angle between ``rho_S`` and any reachable ``sigma_S``."""
    s = as_spectrum(lambda_s)
    opt = reachable_optimum(s, lambda_e)
    overlap = float(np.sum(np.sqrt(sort_ascending(s.values) * opt)))
    return math.acos(min(max(overlap, 0.0), 1.0))


def _collision_sum(lambda_s, lambda_e) -> float:
    s = as_spectrum(lambda_s)
    return pairing_function(s.values, reachable_optimum(s, lambda_e), 2.0)


def _inverse_bracket(total: float) -> float:
    if math.isinf(total):
        return 0.0
    bracket = total - 1.0
    if bracket <= BRACKET_ZERO:
        return math.inf
    return 1.0 / bracket


def tur_bound(lambda_s, lambda_e) -> float:
    """Lower bound on the relative variance of any measurement after any joint unitary.

    ``+inf`` means no reachable state differs from ``rho_S``; ``0`` means the
    bound is vacuous.
    """
    return _inverse_bracket(_collision_sum(lambda_s, lambda_e))


def estimator_bound(lambda_s, lambda_e, r: int) -> float:
    """Lower bound on ``Var[theta_hat] / (mean shift)^2`` after ``r`` repetitions."""
    r = int(r)
    if r < 1:
        raise ValueError(f"repetition count must be >= 1, got {r}")
    total = _collision_sum(lambda_s, lambda_e)
    try:
        powered = total**r
    except OverflowError:
        powered = math.inf
    return _inverse_bracket(powered)


@dataclass(frozen=True)
class BoundSet:
    c_sums: np.ndarray
    optimal_spectrum: np.ndarray
    alpha: float
    divergence_bound: float
    bures_bound: float
    tur_bound: float
    estimator_bounds: dict[int, float] = field(default_factory=dict)


def compute_bounds(lambda_s, lambda_e, alpha: float, repetitions: Iterable[int] = (1,)) -> BoundSet:
    s = as_spectrum(lambda_s)
    e = as_spectrum(lambda_e)
    c = block_sums(joint_spectrum(s, e))
    return BoundSet(
        c_sums=c,
        optimal_spectrum=optimal_spectrum(c),
        alpha=float(alpha),
        divergence_bound=divergence_bound(s, e, alpha),
        bures_bound=bures_bound(s, e),
        tur_bound=tur_bound(s, e),
        estimator_bounds={int(r): estimator_bound(s, e, r) for r in repetitions},
    )


def extremal_unitary(rho_s, rho_e) -> np.ndarray:
    """Joint unitary whose reduced output saturates the divergence bound.

    Rotates ``rho_S (x) rho_E`` to its eigenbasis, permutes the joint
    eigenvalues into descending order along the diagonal so that each
    ``d_E`` block carries the next-largest group, then maps the ``n``-th
    block onto the eigenvector of the ``n``-th smallest eigenvalue of
    ``rho_S``. The result commutes with ``rho_S`` and carries the optimal
    spectrum in anti-aligned order.
    """
    w_s, v_s = hermitian_eig(rho_s)
    w_e, v_e = hermitian_eig(rho_e)
    d_s, d_e = w_s.size, w_e.size
    prod = np.outer(w_s, w_e).ravel()
    order = np.argsort(-prod, kind="stable")
    perm = np.zeros((d_s * d_e, d_s * d_e))
    perm[np.arange(d_s * d_e), order] = 1.0
    align = v_s[:, np.argsort(w_s, kind="stable")]
    eig_basis = np.kron(v_s, v_e)
    return np.kron(align, np.eye(d_e)) @ perm @ eig_basis.conj().T

