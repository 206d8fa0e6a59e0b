"""Seedable random operators for tests and experiments.

Haar-style unitaries come from the QR decomposition of a complex Gaussian
matrix with the phase convention fixed, so a given numpy Generator seed
always produces the same state.  Random spectra are kept away from zero to
stay clear of the positivity floor.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import DensityOperator, Operator, Site, _check_sites


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_hermitian(sites: Sequence[Site], rng: np.random.Generator,
                     scale: float = 1.0) -> Operator:
    sites = _check_sites(sites)
    dim = int(np.prod([d for _, d in sites])) if sites else 1
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator(sites, scale * 0.5 * (z + z.conj().T))

def random_spectrum(dim: int, rng: np.random.Generator) -> np.ndarray:
    # |N(0,1)| + 0.1 keeps the smallest weight a healthy fraction of the
    # largest, far above the relative positivity floor.
    raw = np.abs(rng.standard_normal(dim)) + 0.1
    return raw / raw.sum()


def random_density(sites: Sequence[Site],
                   rng: np.random.Generator) -> DensityOperator:
    """Full-rank random state: random spectrum under a Haar unitary."""
    sites = _check_sites(sites)
    dim = int(np.prod([d for _, d in sites])) if sites else 1
    spectrum = random_spectrum(dim, rng)
    u = haar_unitary(dim, rng)
    mat = (u * spectrum) @ u.conj().T
    return DensityOperator.certify(Operator(sites, mat))


def random_positive(sites: Sequence[Site], rng: np.random.Generator,
                    scale: float = 1.0) -> Operator:
    """Positive definite operator with arbitrary trace."""
    sites = _check_sites(sites)
    dim = int(np.prod([d for _, d in sites])) if sites else 1
    spectrum = np.abs(rng.standard_normal(dim)) + 0.1
    u = haar_unitary(dim, rng)
    return Operator(sites, scale * (u * spectrum) @ u.conj().T)
