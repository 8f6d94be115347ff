"""Seeded random unitaries, density matrices and POVMs.

Randomness comes from the Philox4x64 counter-based generator. A draw is
addressed by ``(seed, stream)``: the pair is packed into the 128-bit Philox
key, so every stream is an independent sequence that can be regenerated in
isolation, in any order, on any worker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidSpectrum, SingularNormalizer
from .linalg import Povm, Spectrum, as_spectrum, make_povm

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not 0 <= int(v) <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self) -> np.random.Generator:
        key = (int(self.stream) << 64) | int(self.seed)
        return np.random.Generator(np.random.Philox(key=key))


RngLike = Union[RngSeed, np.random.Generator]


def make_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    raise TypeError(f"expected RngSeed or numpy Generator, got {type(rng).__name__}")


def ginibre(d: int, rng: np.random.Generator, cols: int | None = None) -> np.ndarray:
    """Matrix of iid standard complex Gaussians, ``E|g|^2 = 1``."""
    shape = (d, d if cols is None else cols)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(d: int, rng: RngLike) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary.

    QR-decompose a Ginibre matrix and rotate each column of ``Q`` by the phase
    of the matching diagonal entry of ``R``; this makes the factorization
    unique (positive diagonal in ``R``) and the law of ``Q`` Haar.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    g = ginibre(d, make_rng(rng))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    absd = np.abs(diag)
    phases = np.divide(diag, absd, out=np.ones_like(diag), where=absd > 0)
    return q * phases


def random_density(d: int, rng: RngLike, ensemble: str = "hilbert-schmidt", spectrum=None) -> np.ndarray:
    """Random density matrix.

    ``ensemble="hilbert-schmidt"`` returns ``G G^dagger / Tr(G G^dagger)``
    for a Ginibre ``G``. ``ensemble="fixed-spectrum"`` conjugates
    ``diag(spectrum)`` by a Haar unitary.
    """
    gen = make_rng(rng)
    if ensemble == "hilbert-schmidt":
        g = ginibre(d, gen)
        m = g @ g.conj().T
        m = m / np.trace(m).real
    elif ensemble == "fixed-spectrum":
        if spectrum is None:
            raise InvalidSpectrum("fixed-spectrum ensemble needs a spectrum")
        spec = as_spectrum(spectrum)
        if len(spec) != d:
            raise InvalidSpectrum(f"spectrum length {len(spec)} != dimension {d}")
        v = haar_unitary(d, gen)
        m = (v * spec.values) @ v.conj().T
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    return 0.5 * (m + m.conj().T)


def random_spectrum(d: int, rng: RngLike) -> Spectrum:
    """Uniform (flat Dirichlet) probability vector of length ``d``."""
    return Spectrum(make_rng(rng).dirichlet(np.ones(d)))


def random_povm(d: int, k: int, rng: RngLike, rtol: float = 1e-12) -> Povm:
    """Random ``k``-outcome POVM ``M_j = S^{-1/2} A_j S^{-1/2}``, ``S = sum A_j``."""
    if k < 2:
        raise ValueError(f"need at least 2 outcomes, got {k}")
    gen = make_rng(rng)
    parts = []
    for _ in range(k):
        g = ginibre(d, gen)
        parts.append(g @ g.conj().T)
    s = sum(parts)
    w, v = np.linalg.eigh(s)
    if w.min() <= rtol * max(w.max(), 1.0):
        raise SingularNormalizer(f"normalizer eigenvalue {w.min():.3e} is numerically zero")
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    elements = [s_inv_half @ a @ s_inv_half for a in parts]
    return make_povm(elements, list(range(k)))
