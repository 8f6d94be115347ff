"""Dense complex linear algebra for small density operators.

All matrices are plain :class:`numpy.ndarray` objects of dtype ``complex128``.
Joint system-environment indices are system-major: the joint basis index of
``(i_S, i_E)`` is ``i_S * d_E + i_E``, which is also the layout produced by
:func:`numpy.kron`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidPovm,
    InvalidSpectrum,
    NotHermitian,
    NotPositive,
    NotUnitary,
    TraceNotOne,
)

#: Eigenvalues at or below this magnitude are treated as exact zeros when
#: deciding support membership.
SUPPORT_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used by the validators."""

    hermiticity: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-10
    unitarity: float = 1e-10


DEFAULT_TOL = Tolerances()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _require_square(a: np.ndarray, name: str = "matrix") -> int:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a.shape[0]


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


@dataclass(frozen=True)
class Spectrum:
    """Probability vector of eigenvalues.

    Values are clipped to ``[0, 1]`` on construction after checking that they
    lie within tolerance of that interval and sum to one.
    """

    values: np.ndarray
    order: str = "unsorted"
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise InvalidSpectrum("spectrum is empty")
        if not np.all(np.isfinite(v)):
            raise InvalidSpectrum("spectrum contains non-finite values")
        if np.any(v < -self.tol.psd) or np.any(v > 1 + self.tol.trace):
            raise InvalidSpectrum(
                f"spectrum values must lie in [0, 1], got min {v.min():.3g}, max {v.max():.3g}"
            )
        total = float(v.sum())
        if abs(total - 1.0) > max(v.size * self.tol.trace, 1e-12):
            raise InvalidSpectrum(f"spectrum sum {total!r} != 1")
        if self.order not in ("ascending", "descending", "unsorted"):
            raise InvalidSpectrum(f"unknown order tag {self.order!r}")
        object.__setattr__(self, "values", _frozen(np.clip(v, 0.0, 1.0)))

    def __len__(self) -> int:
        return self.values.size

    @property
    def descending(self) -> np.ndarray:
        return sort_descending(self.values)

    @property
    def ascending(self) -> np.ndarray:
        return sort_ascending(self.values)


def as_spectrum(x, tol: Tolerances = DEFAULT_TOL) -> Spectrum:
    if isinstance(x, Spectrum):
        return x
    return Spectrum(np.asarray(x, dtype=float), tol=tol)


def sort_descending(v) -> np.ndarray:
    """Sort descending; ties keep their original (ascending index) order."""
    v = np.asarray(v, dtype=float)
    return v[np.argsort(-v, kind="stable")]


def sort_ascending(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[np.argsort(v, kind="stable")]


def validate_density(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Validate and return a density matrix as a read-only array.

    The input is symmetrized as ``(M + M^dagger) / 2`` after the Hermiticity
    check, so the returned matrix is exactly Hermitian.

    Raises
    ------
    NotHermitian, TraceNotOne, NotPositive
        With the measured residual in the message.
    """
    a = as_matrix(m, "density matrix")
    _require_square(a, "density matrix")
    res = hermiticity_residual(a)
    if res > tol.hermiticity:
        raise NotHermitian(f"Hermiticity residual {res:.3e} exceeds {tol.hermiticity:.1e}")
    a = 0.5 * (a + a.conj().T)
    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > tol.trace:
        raise TraceNotOne(f"trace {tr!r} differs from 1 by {abs(tr - 1.0):.3e}")
    lmin = float(np.linalg.eigvalsh(a).min())
    if lmin < -tol.psd:
        raise NotPositive(f"minimum eigenvalue {lmin:.3e} below -{tol.psd:.1e}")
    return _frozen(a)


def validate_unitary(u, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    a = as_matrix(u, "unitary")
    d = _require_square(a, "unitary")
    res = float(np.max(np.abs(a.conj().T @ a - np.eye(d))))
    if res > tol.unitarity:
        raise NotUnitary(f"unitarity residual {res:.3e} exceeds {tol.unitarity:.1e}")
    return a


def hermitian_eig(m, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    values : ndarray
        Real eigenvalues in descending order, ties broken by the ascending
        index of the solver output.
    vectors : ndarray
        Unitary whose columns are the matching eigenvectors, so that
        ``m == vectors @ diag(values) @ vectors^dagger``.
    """
    a = as_matrix(m)
    _require_square(a)
    res = hermiticity_residual(a)
    if res > tol.hermiticity:
        raise NotHermitian(f"Hermiticity residual {res:.3e} exceeds {tol.hermiticity:.1e}")
    try:
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def spectrum_of(rho, tol: Tolerances = DEFAULT_TOL) -> Spectrum:
    """Descending eigenvalues of a density matrix as a :class:`Spectrum`."""
    w, _ = hermitian_eig(rho, tol)
    return Spectrum(w, order="descending", tol=tol)


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with system-major index ordering."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace_env(m, d_s: int, d_e: int) -> np.ndarray:
    """Trace out the environment factor of a ``d_s * d_e`` square matrix.

    ``out[i, j] = sum_k m[i * d_e + k, j * d_e + k]``.
    """
    a = as_matrix(m)
    if a.shape != (d_s * d_e, d_s * d_e):
        raise DimensionMismatch(
            f"matrix of shape {a.shape} is not ({d_s}*{d_e}) x ({d_s}*{d_e})"
        )
    return np.einsum("ikjk->ij", a.reshape(d_s, d_e, d_s, d_e))


def clip_eigenvalues(w: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Clip round-off negatives to zero; reject genuinely negative values."""
    if w.size and w.min() < -tol:
        raise NotPositive(f"eigenvalue {w.min():.3e} below -{tol:.1e}")
    return np.clip(w, 0.0, None)


def matrix_power_psd(m, p: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Real power of a positive semidefinite matrix via its eigendecomposition.

    Zero eigenvalues map to zero for every ``p`` (for ``p <= 0`` the power is
    taken on the support).
    """
    w, v = hermitian_eig(m, tol)
    w = clip_eigenvalues(w, tol.psd)
    return v @ np.diag(power_on_support(w, p)) @ v.conj().T


def power_on_support(w: np.ndarray, p: float) -> np.ndarray:
    out = np.zeros_like(w, dtype=float)
    nz = w > SUPPORT_THRESHOLD
    out[nz] = w[nz] ** p
    return out


def unitary_from_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h``."""
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


@dataclass(frozen=True)
class Povm:
    """Finite POVM with real outcome labels."""

    outcomes: tuple[float, ...]
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(float(m) for m in self.outcomes))
        object.__setattr__(self, "elements", tuple(_frozen(as_matrix(e)) for e in self.elements))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


def make_povm(
    elements: Sequence, outcomes: Sequence[float] | None = None, tol: Tolerances = DEFAULT_TOL
) -> Povm:
    """Validate POVM elements (PSD, summing to identity) and attach labels."""
    if len(elements) == 0:
        raise InvalidPovm("POVM needs at least one element")
    mats = [as_matrix(e, "POVM element") for e in elements]
    d = _require_square(mats[0], "POVM element")
    if any(e.shape != (d, d) for e in mats):
        raise DimensionMismatch("POVM elements have differing shapes")
    if outcomes is None:
        outcomes = list(range(len(mats)))
    if len(outcomes) != len(mats):
        raise InvalidPovm(f"{len(outcomes)} labels for {len(mats)} elements")
    if len(set(float(m) for m in outcomes)) != len(outcomes):
        raise InvalidPovm("outcome labels must be distinct")
    for k, e in enumerate(mats):
        res = hermiticity_residual(e)
        if res > tol.hermiticity:
            raise NotHermitian(f"POVM element {k}: Hermiticity residual {res:.3e}")
        lmin = float(np.linalg.eigvalsh(0.5 * (e + e.conj().T)).min())
        if lmin < -tol.psd:
            raise NotPositive(f"POVM element {k}: minimum eigenvalue {lmin:.3e}")
    res = float(np.max(np.abs(sum(mats) - np.eye(d))))
    if res > max(tol.trace, 1e-10):
        raise InvalidPovm(f"POVM elements sum to identity only within {res:.3e}")
    return Povm(tuple(outcomes), tuple(0.5 * (e + e.conj().T) for e in mats))


def computational_povm(d: int) -> Povm:
    """Projective measurement in the computational basis, labels ``0..d-1``."""
    els = []
    for k in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[k, k] = 1.0
        els.append(e)
    return make_povm(els)


def swap_operator(d: int) -> np.ndarray:
    """SWAP on ``C^d (x) C^d``; Hermitian and involutory."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s
