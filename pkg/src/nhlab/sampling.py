"""Seeded random instances for property checks and sweeps."""

from __future__ import annotations

import numpy as np


def rng_for(*key: int) -> np.random.Generator:
    """Child generator determined only by the integer key, e.g. (seed, trial)."""
    return np.random.default_rng([int(k) for k in key])


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform (Haar) pure state."""
    v = complex_normal(rng, dim)
    return v / np.linalg.norm(v)


def random_real_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim).astype(complex)
    return v / np.linalg.norm(v)


def random_operator(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix with i.i.d. complex standard normal entries."""
    return complex_normal(rng, (dim, dim))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(complex_normal(rng, (dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(dim: int, n_kraus: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Kraus operators cut from a random isometry C^dim -> C^(n_kraus*dim)."""
    q, _ = np.linalg.qr(complex_normal(rng, (n_kraus * dim, dim)))
    return [q[k * dim:(k + 1) * dim] for k in range(n_kraus)]


def random_product_state(dims: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    return np.kron(random_state(dims[0], rng), random_state(dims[1], rng))


def random_separable_density(
    dims: tuple[int, int], rng: np.random.Generator, max_terms: int = 4
) -> np.ndarray:
    """Mixture of up to ``max_terms`` product states with Dirichlet(1, ..., 1) weights."""
    n = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(n))
    rho = np.zeros((dims[0] * dims[1],) * 2, dtype=complex)
    for p in weights:
        v = random_product_state(dims, rng)
        rho += p * np.outer(v, v.conj())
    return rho


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = complex_normal(rng, (dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
