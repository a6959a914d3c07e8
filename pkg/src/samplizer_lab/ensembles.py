"""Random states, unitaries and channels for tests and experiments.

Every sampler takes an explicit ``numpy.random.Generator``; nothing here keeps
global RNG state.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .qcore import DensityMatrix, QuantumChannel, channel_from_kraus


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_spectrum(rank: int, rng: np.random.Generator, floor: float = 0.0) -> np.ndarray:
    """Dirichlet(1,...,1) eigenvalues, optionally pushed away from zero by ``floor``."""
    w = rng.dirichlet(np.ones(rank))
    if floor > 0:
        w = (1 - rank * floor) * w + floor
    return w


def random_density_matrix(dim: int, rank: int, rng: np.random.Generator, floor: float = 1e-3) -> DensityMatrix:
    """Haar-rotated state of exact rank ``rank`` whose nonzero eigenvalues exceed ``floor``."""
    if not 1 <= rank <= dim:
        raise ValueError("rank must lie in [1, dim]")
    w = np.zeros(dim)
    w[:rank] = random_spectrum(rank, rng, floor)
    u = haar_unitary(dim, rng)
    m = (u * w) @ u.conj().T
    return DensityMatrix((m + m.conj().T) / 2, rank_hint=rank)


def random_channel(dim: int, rng: np.random.Generator, n_kraus: int = 2) -> QuantumChannel:
    """Random CPTP map: a Haar isometry into ``dim * n_kraus`` cut into Kraus blocks."""
    u = haar_unitary(dim * n_kraus, rng)[:, :dim]
    ks = [u[i * dim:(i + 1) * dim, :] for i in range(n_kraus)]
    return channel_from_kraus(ks, dim, dim)


def random_distribution(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(n))
