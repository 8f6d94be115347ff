"""Quantum and classical divergences, in nats.

Support conventions
-------------------
Eigenvalues at or below :data:`~renyi_reach.linalg.SUPPORT_THRESHOLD` count
as zero. For ``alpha > 1`` any weight of ``rho`` outside the support of
``sigma`` makes the Renyi divergences infinite; for ``alpha < 1`` the trace
functional is evaluated on the intersection of the supports, and an empty
intersection again gives ``+inf``. ``0 ln 0 = 0``.

``alpha == 1`` is rejected by the Renyi functions; use
:func:`quantum_relative_entropy` for the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    AlphaOutOfDomain,
    DegenerateVariance,
    DimensionMismatch,
    OutcomeMismatch,
    TraceNotOne,
)
from .linalg import SUPPORT_THRESHOLD, Povm, as_matrix, clip_eigenvalues, power_on_support

#: Negative results down to this value are round-off and are reported as zero.
NEGATIVE_CLIP = 1e-12
#: Weight of rho outside supp(sigma) above which supports count as violated.
LEAK_TOLERANCE = 1e-12


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0 or alpha == 1:
        raise AlphaOutOfDomain(f"alpha must lie in (0, 1) or (1, inf), got {alpha}")
    return alpha


def _clip(value: float) -> float:
    if -NEGATIVE_CLIP <= value < 0:
        return 0.0
    return value


def _renyi_from_trace(q: float, alpha: float) -> float:
    if q <= 0:
        return math.inf
    return _clip(math.log(q) / (alpha - 1))


def _pair_eig(rho, sigma):
    r = as_matrix(rho, "rho")
    s = as_matrix(sigma, "sigma")
    if r.shape != s.shape or r.shape[0] != r.shape[1]:
        raise DimensionMismatch(f"state shapes {r.shape} and {s.shape} differ")
    a, u = np.linalg.eigh(0.5 * (r + r.conj().T))
    b, v = np.linalg.eigh(0.5 * (s + s.conj().T))
    a = clip_eigenvalues(a)
    b = clip_eigenvalues(b)
    overlap = np.abs(u.conj().T @ v) ** 2  # overlap[i, j] = |<u_i|v_j>|^2
    return a, b, overlap, v


def _support_leak(a, b, overlap) -> float:
    """Weight of rho lying in the kernel of sigma."""
    kernel = b <= SUPPORT_THRESHOLD
    if not kernel.any():
        return 0.0
    return float(a @ overlap[:, kernel].sum(axis=1))


def petz_renyi(rho, sigma, alpha: float) -> float:
    """Petz Renyi relative entropy ``ln Tr[rho^a sigma^(1-a)] / (a - 1)``."""
    alpha = check_alpha(alpha)
    a, b, overlap, _ = _pair_eig(rho, sigma)
    if alpha > 1 and _support_leak(a, b, overlap) > LEAK_TOLERANCE:
        return math.inf
    q = float(power_on_support(a, alpha) @ overlap @ power_on_support(b, 1 - alpha))
    return _renyi_from_trace(q, alpha)


def sandwiched_renyi(rho, sigma, alpha: float) -> float:
    """Sandwiched Renyi relative entropy.

    ``ln Tr[(s rho s)^a] / (a - 1)`` with ``s = sigma^((1-a)/(2a))``.
    """
    alpha = check_alpha(alpha)
    a, b, overlap, v = _pair_eig(rho, sigma)
    if alpha > 1 and _support_leak(a, b, overlap) > LEAK_TOLERANCE:
        return math.inf
    r = as_matrix(rho)
    s = (v * power_on_support(b, (1 - alpha) / (2 * alpha))) @ v.conj().T
    x = s @ r @ s
    w = np.clip(np.linalg.eigvalsh(0.5 * (x + x.conj().T)), 0.0, None)
    q = float(np.sum(power_on_support(w, alpha)))
    return _renyi_from_trace(q, alpha)


def quantum_relative_entropy(rho, sigma) -> float:
    """Umegaki relative entropy ``Tr[rho (ln rho - ln sigma)]``."""
    a, b, overlap, _ = _pair_eig(rho, sigma)
    if _support_leak(a, b, overlap) > LEAK_TOLERANCE:
        return math.inf
    pos_a = a > SUPPORT_THRESHOLD
    pos_b = b > SUPPORT_THRESHOLD
    neg_entropy = float(a[pos_a] @ np.log(a[pos_a]))
    cross = float(a @ overlap[:, pos_b] @ np.log(b[pos_b]))
    return _clip(neg_entropy - cross)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    r = as_matrix(rho, "rho")
    s = as_matrix(sigma, "sigma")
    if r.shape != s.shape:
        raise DimensionMismatch(f"state shapes {r.shape} and {s.shape} differ")
    a, u = np.linalg.eigh(0.5 * (r + r.conj().T))
    sqrt_r = (u * np.sqrt(clip_eigenvalues(a))) @ u.conj().T
    x = sqrt_r @ s @ sqrt_r
    w = np.clip(np.linalg.eigvalsh(0.5 * (x + x.conj().T)), 0.0, None)
    return float(min(np.sum(np.sqrt(w)) ** 2, 1.0))


def bures_angle(rho, sigma) -> float:
    """``arccos sqrt(F)`` in radians, within ``[0, pi/2]``."""
    return float(math.acos(min(math.sqrt(fidelity(rho, sigma)), 1.0)))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probability distribution over distinct real outcome labels."""

    outcomes: tuple[float, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).ravel()
        labels = tuple(float(m) for m in self.outcomes)
        if len(labels) != p.size:
            raise OutcomeMismatch(f"{len(labels)} labels for {p.size} probabilities")
        if len(set(labels)) != len(labels):
            raise OutcomeMismatch("outcome labels must be distinct")
        if not np.all(np.isfinite(p)) or np.any(p < -NEGATIVE_CLIP):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-10:
            raise TraceNotOne(f"probabilities sum to {p.sum()!r}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "outcomes", labels)
        object.__setattr__(self, "probabilities", p)

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(self.outcomes)

    def mean(self, g=None) -> float:
        vals = self.labels if g is None else _g_values(g, self)
        return float(self.probabilities @ vals)

    def variance(self, g=None) -> float:
        vals = self.labels if g is None else _g_values(g, self)
        mu = float(self.probabilities @ vals)
        return float(self.probabilities @ (vals - mu) ** 2)


DistLike = Union[OutcomeDistribution, Sequence[float], np.ndarray]


def as_distribution(p: DistLike) -> OutcomeDistribution:
    if isinstance(p, OutcomeDistribution):
        return p
    p = np.asarray(p, dtype=float)
    return OutcomeDistribution(tuple(range(p.size)), p)


def _matched(p: DistLike, q: DistLike) -> tuple[np.ndarray, np.ndarray]:
    p, q = as_distribution(p), as_distribution(q)
    if p.outcomes != q.outcomes:
        raise OutcomeMismatch("distributions are defined on different outcome sets")
    return p.probabilities, q.probabilities


def _g_values(g, dist: OutcomeDistribution) -> np.ndarray:
    if callable(g):
        return np.array([float(g(m)) for m in dist.outcomes])
    vals = np.asarray(g, dtype=float).ravel()
    if vals.size != len(dist.outcomes):
        raise OutcomeMismatch(f"g has {vals.size} values for {len(dist.outcomes)} outcomes")
    return vals


def classical_renyi(p: DistLike, q: DistLike, alpha: float) -> float:
    """Classical Renyi divergence ``ln sum p^a q^(1-a) / (a - 1)``."""
    alpha = check_alpha(alpha)
    p, q = _matched(p, q)
    pos_p = p > 0
    pos_q = q > 0
    if alpha > 1 and np.any(pos_p & ~pos_q):
        return math.inf
    both = pos_p & pos_q
    s = float(np.sum(p[both] ** alpha * q[both] ** (1 - alpha)))
    return _renyi_from_trace(s, alpha)


def chi_squared(p: DistLike, q: DistLike) -> float:
    """Pearson divergence ``sum (p - q)^2 / q``."""
    p, q = _matched(p, q)
    pos_q = q > 0
    if np.any((p > 0) & ~pos_q):
        return math.inf
    return float(np.sum((p[pos_q] - q[pos_q]) ** 2 / q[pos_q]))


def measurement_distribution(rho, povm: Povm) -> OutcomeDistribution:
    """Born-rule probabilities ``Tr[M_m rho]``."""
    r = as_matrix(rho, "rho")
    if r.shape != (povm.dim, povm.dim):
        raise DimensionMismatch(f"state of shape {r.shape} vs POVM dimension {povm.dim}")
    p = np.array([np.real(np.vdot(m, r)) for m in povm.elements])  # Tr[M r], M Hermitian
    if p.min() < -1e-10:
        raise TraceNotOne(f"negative outcome probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    dev = abs(p.sum() - 1.0)
    if dev > 1e-10:
        raise TraceNotOne(f"outcome probabilities sum to 1 only within {dev:.3e}")
    return OutcomeDistribution(povm.outcomes, p / p.sum())


def chi2_variational_gap(p: DistLike, q: DistLike, g: Callable | Sequence[float]) -> tuple[float, float]:
    """Both sides of ``chi2(P||Q) >= (E_P g - E_Q g)^2 / Var_Q g``.

    When ``Var_Q g`` vanishes the right side is ``0`` if the means agree and
    ``+inf`` otherwise; the latter is only consistent when the left side is
    infinite too, and :class:`DegenerateVariance` is raised if it is not.
    """
    pd, qd = as_distribution(p), as_distribution(q)
    if pd.outcomes != qd.outcomes:
        raise OutcomeMismatch("distributions are defined on different outcome sets")
    vals = _g_values(g, qd)
    lhs = chi_squared(pd, qd)
    shift = float(pd.probabilities @ vals - qd.probabilities @ vals)
    var = qd.variance(vals)
    scale = max(1.0, float(qd.probabilities @ vals**2))
    if var <= 1e-15 * scale:
        if abs(shift) <= 1e-12 * math.sqrt(scale):
            return lhs, 0.0
        if math.isfinite(lhs):
            raise DegenerateVariance(
                f"Var_Q[g] = 0 with mean shift {shift:.3e} but chi2 = {lhs:.6g} is finite"
            )
        return lhs, math.inf
    return lhs, shift**2 / var
