"""Dense complex linear algebra for small composite quantum systems.

All operators are plain numpy arrays of complex numbers.  The composite
basis convention is fixed once, package wide: the system index is slow
and the environment index is fast, so the product state |i, alpha> sits
at flat index ``i * d_env + alpha``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

#: Largest composite (system x environment) dimension supported.
MAX_COMPOSITE_DIM = 64

#: Hermiticity tolerance, max |M - M^dag| entrywise.
HERM_TOL = 1e-12
#: Unit-trace tolerance for density matrices.
TRACE_TOL = 1e-12
#: Eigenvalues of a density matrix may dip this far below zero (roundoff).
EIG_FLOOR = -1e-10


class PositivityError(ValueError):
    """An operator required to be positive semidefinite has a genuinely negative eigenvalue."""


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def hermiticity_defect(m) -> float:
    """Max entrywise deviation of M from its conjugate transpose."""
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"hermiticity is undefined for shape {a.shape}")
    return float(np.abs(a - a.conj().T).max())


def require_hermitian(m, name: str = "matrix", tol: float = HERM_TOL) -> np.ndarray:
    a = as_complex_matrix(m)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian: max |M - M^dag| = {defect:.3e} > {tol:.1e}")
    return a


def tensor_product(a, b, max_dim: int = MAX_COMPOSITE_DIM) -> np.ndarray:
    """Kronecker product with the slow-system / fast-environment convention.

    ``out[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``, which is exactly
    ``np.kron``.  Raises if the composite dimension exceeds ``max_dim``.
    """
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise ValueError(
            f"composite dimension {rows}x{cols} exceeds the configured limit {max_dim}"
        )
    return np.kron(a, b)


def _reshape_composite(m, d_sys: int, d_env: int) -> np.ndarray:
    a = as_complex_matrix(m)
    dim = d_sys * d_env
    if a.shape != (dim, dim):
        raise ValueError(
            f"expected a {dim}x{dim} matrix for d_sys={d_sys}, d_env={d_env}, got {a.shape}"
        )
    return a.reshape(d_sys, d_env, d_sys, d_env)


def partial_trace_env(m, d_sys: int, d_env: int) -> np.ndarray:
    """Trace out the environment: out[i, j] = sum_a m[i*d_env + a, j*d_env + a]."""
    return np.einsum("iaja->ij", _reshape_composite(m, d_sys, d_env))


def partial_trace_sys(m, d_sys: int, d_env: int) -> np.ndarray:
    """Trace out the system: out[a, b] = sum_i m[i*d_env + a, i*d_env + b]."""
    return np.einsum("iaib->ab", _reshape_composite(m, d_sys, d_env))


def mat_exp(h, scale: complex = 1.0) -> np.ndarray:
    """Matrix exponential exp(scale * h).

    Hermitian inputs go through an eigendecomposition, which keeps
    exp(-i h t) unitary to roundoff; anything else falls back to
    scipy's scaling-and-squaring Pade approximation.
    """
    h = as_complex_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"matrix exponential needs a square matrix, got {h.shape}")
    if scale == 0:
        return np.eye(h.shape[0], dtype=complex)
    scale_ref = max(1.0, float(np.abs(h).max()))
    if hermiticity_defect(h) <= HERM_TOL * scale_ref:
        w, v = np.linalg.eigh(h)
        out = (v * np.exp(scale * w)) @ v.conj().T
    else:
        out = scipy.linalg.expm(scale * h)
    if not np.isfinite(out).all():
        raise RuntimeError(
            f"matrix exponential did not converge (dim {h.shape[0]}, "
            f"|scale*h| ~ {np.abs(scale) * np.abs(h).max():.3e})"
        )
    return out


def von_neumann_entropy(rho) -> float:
    """Entropy -sum_k p_k log p_k in nats, with 0 log 0 = 0.

    Eigenvalues in [EIG_FLOOR, 0) are clamped to zero; anything below
    the floor raises :class:`PositivityError`.
    """
    w = np.linalg.eigvalsh(as_complex_matrix(rho))
    if w.min() < EIG_FLOOR:
        raise PositivityError(
            f"eigenvalue {w.min():.3e} below the positivity floor {EIG_FLOOR:.1e}"
        )
    w = w[w > 0.0]
    if w.size == 0:
        return 0.0
    return float(-(w * np.log(w)).sum())


def trace_distance(a, b) -> float:
    """Half the trace norm of (a - b) for Hermitian a, b."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    w = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.abs(w).sum())


def validate_density_matrix(
    rho,
    *,
    herm_tol: float = HERM_TOL,
    trace_tol: float = TRACE_TOL,
    eig_floor: float = EIG_FLOOR,
    name: str = "density matrix",
) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return the array."""
    a = as_complex_matrix(rho)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got {a.shape}")
    defect = hermiticity_defect(a)
    if defect > herm_tol:
        raise ValueError(f"{name} not Hermitian: defect {defect:.3e} > {herm_tol:.1e}")
    tr = complex(np.trace(a))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"{name} trace {tr:.15g} deviates from 1 by more than {trace_tol:.1e}")
    wmin = float(np.linalg.eigvalsh(a).min())
    if wmin < eig_floor:
        raise PositivityError(f"{name} eigenvalue {wmin:.3e} below floor {eig_floor:.1e}")
    return a
