"""Majorization predicates and eigenvalue-pairing inequalities."""

from __future__ import annotations

import math

import numpy as np

from .divergences import check_alpha
from .errors import DimensionMismatch, NotHermitian, PreconditionViolated
from .linalg import as_matrix, hermiticity_residual, sort_ascending, sort_descending

MAJORIZATION_TOL = 1e-10


def _padded(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = max(x.size, y.size)
    return np.pad(x, (0, n - x.size)), np.pad(y, (0, n - y.size))


def prefix_gaps(x, y) -> np.ndarray:
    """Descending prefix sums of ``x`` minus those of ``y``."""
    x, y = _padded(x, y)
    return np.cumsum(sort_descending(x)) - np.cumsum(sort_descending(y))


def majorizes(x, y, tol: float = MAJORIZATION_TOL) -> bool:
    """True iff ``x`` majorizes ``y`` (shorter vector padded with zeros)."""
    gaps = prefix_gaps(x, y)
    return bool(np.all(gaps >= -tol) and abs(gaps[-1]) <= tol)


def pairing_function(a, x, alpha: float) -> float:
    """``sum_n (a_n^up)^alpha (x_n^down)^(1 - alpha)`` with zero conventions.

    A term with ``a_n = 0`` vanishes. For ``alpha > 1`` a term with
    ``x_n = 0 < a_n`` is ``+inf``; for ``alpha < 1`` it is zero.
    """
    alpha = check_alpha(alpha)
    a = sort_ascending(a)
    x = sort_descending(x)
    if a.size != x.size:
        raise DimensionMismatch(f"vectors of length {a.size} and {x.size}")
    a = np.clip(a, 0.0, None)
    x = np.clip(x, 0.0, None)
    live = a > 0
    if alpha > 1 and np.any(live & (x <= 0)):
        return math.inf
    both = live & (x > 0)
    return float(np.sum(a[both] ** alpha * x[both] ** (1 - alpha)))


def renyi_of_sum(s: float, alpha: float) -> float:
    """``ln(s) / (alpha - 1)``, mapping ``s = 0`` and ``s = inf`` to ``+inf``."""
    if s <= 0 or math.isinf(s):
        return math.inf
    return math.log(s) / (alpha - 1)


def schur_direction_check(a, x, y, alpha: float, tol: float = 1e-10) -> bool:
    """Check that the pairing divergence does not decrease from ``y`` to ``x``.

    Requires ``x`` to majorize ``y``.
    """
    if not majorizes(x, y):
        raise PreconditionViolated("x does not majorize y")
    hi = renyi_of_sum(pairing_function(a, x, alpha), alpha)
    lo = renyi_of_sum(pairing_function(a, y, alpha), alpha)
    if math.isinf(hi):
        return True
    if math.isinf(lo):
        return False
    return hi >= lo - tol


def schur_ostrowski_product(a, x, alpha: float, n: int, m: int, step: float = 1e-6) -> float:
    """``(x_n - x_m)(df/dx_n - df/dx_m)`` by central differences.

    ``f`` is the pairing sum of ascending ``a`` against ``x`` taken in
    descending order; coordinates are perturbed in place without re-sorting.
    """
    alpha = check_alpha(alpha)
    a = sort_ascending(a)
    x = sort_descending(x)

    def f(v):
        return float(np.sum(a**alpha * v ** (1 - alpha)))

    def partial(k):
        up = x.copy()
        dn = x.copy()
        up[k] += step
        dn[k] -= step
        return (f(up) - f(dn)) / (2 * step)

    return float((x[n] - x[m]) * (partial(n) - partial(m)))


def von_neumann_check(a, b) -> tuple[float, float, float]:
    """Anti-aligned pairing, ``Tr[AB]``, aligned pairing of eigenvalues."""
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    la = np.linalg.eigvalsh(0.5 * (a + a.conj().T))  # ascending
    lb = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
    lower = float(la @ lb[::-1])
    mid = float(np.real(np.trace(a @ b)))
    upper = float(la @ lb)
    return lower, mid, upper


def schur_horn_check(m, tol: float = MAJORIZATION_TOL) -> bool:
    """True iff the eigenvalues of Hermitian ``m`` majorize its diagonal.

    Both vectors are shifted by the same constant to be nonnegative and scaled
    by the same total, which leaves the majorization relation unchanged.
    """
    a = as_matrix(m)
    res = hermiticity_residual(a)
    if res > 1e-10:
        raise NotHermitian(f"Hermiticity residual {res:.3e}")
    a = 0.5 * (a + a.conj().T)
    lam = np.linalg.eigvalsh(a)
    diag = np.real(np.diagonal(a))
    shift = -min(lam.min(), diag.min(), 0.0)
    lam = lam + shift
    diag = diag + shift
    total = lam.sum()
    if total > 0:
        lam, diag = lam / total, diag / total
    return majorizes(lam, diag, tol)
