"""Seeded generators for random test problems."""

from __future__ import annotations

import numpy as np

from markovlab.dynamics import CompositeSpec, InitialState


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (m + m.conj().T)


def random_amplitudes(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_env_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random mixed diagonal environment weights (probabilities sum to 1)."""
    p = rng.random(n) + 0.05
    return np.diag(p / p.sum()).astype(complex)


def random_product_spec(d_s: int, d_e: int, rng: np.random.Generator,
                        coupling_strength: float = 1.0) -> CompositeSpec:
    """Generic Hamiltonians, random pure system amplitudes, mixed environment."""
    if d_e == 1:
        d_mat = np.eye(1, dtype=complex)
    else:
        d_mat = random_env_weights(d_e, rng)
    initial = InitialState.product(random_amplitudes(d_s, rng), d_mat)
    return CompositeSpec(
        d_s=d_s, d_e=d_e,
        h_s=random_hermitian(d_s, rng),
        h_e=random_hermitian(d_e, rng),
        h_se=random_hermitian(d_s * d_e, rng),
        initial=initial,
        coupling_strength=coupling_strength,
    )
