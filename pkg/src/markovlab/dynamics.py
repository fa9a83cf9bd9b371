"""Exact composite evolution and divisibility diagnostics.

A finite system S (dimension d_s) couples to a finite environment E
(dimension d_e) through H = H_S x 1 + 1 x H_E + V * H_SE.  Everything is
evolved exactly with dense unitaries, the reduced dynamics is packaged
as the four-index super matrix

    C[(i1, i2), (j1, j2)](t, t0)
        = sum_{a1, a2, g} d[a1, a2] <j1 g|U|i1 a1> <j2 g|U|i2 a2>^*

acting on system matrices as rho_S(t)[j1, j2] = sum rho_S(0)[i1, i2] *
C[(i1, i2), (j1, j2)], and the memoryless character of the evolution is
probed through the factorisation of C across an intermediate time.  The
middle-segment map is always rebuilt from the initial environment
weights, which is exactly the relation under test: it holds identically
when the environment amounts to a single never-excited state, and fails
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from markovlab.linalg import (
    MAX_COMPOSITE_DIM,
    as_complex_matrix,
    partial_trace_env,
    partial_trace_sys,
    require_hermitian,
    tensor_product,
    trace_distance,
    validate_density_matrix,
    von_neumann_entropy,
)
from markovlab.spectral import TimeGrid

_AMP_TOL = 1e-12


@dataclass(frozen=True)
class InitialState:
    """Initial data of the composite system at t0.

    ``product``        pure system amplitudes c with environment weights d_mat.
    ``mixed-product``  system weight matrix s_weights with environment d_mat.
    ``entangled``      joint amplitudes a[i, alpha] of a pure composite state.
    """

    kind: str
    c: np.ndarray | None = None
    s_weights: np.ndarray | None = None
    d_mat: np.ndarray | None = None
    a: np.ndarray | None = None

    @classmethod
    def product(cls, c, d_mat) -> "InitialState":
        c = np.asarray(c, dtype=complex).ravel()
        norm2 = float(np.sum(np.abs(c) ** 2))
        if abs(norm2 - 1.0) > _AMP_TOL:
            raise ValueError(f"amplitudes not normalized: sum |c|^2 = {norm2:.15g}")
        d_mat = validate_density_matrix(d_mat, name="environment weights")
        return cls(kind="product", c=c, d_mat=d_mat)

    @classmethod
    def mixed_product(cls, s_weights, d_mat) -> "InitialState":
        s = validate_density_matrix(s_weights, name="system weights")
        d_mat = validate_density_matrix(d_mat, name="environment weights")
        return cls(kind="mixed-product", s_weights=s, d_mat=d_mat)

    @classmethod
    def entangled(cls, a) -> "InitialState":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2:
            raise ValueError("entangled amplitudes must form a d_s x d_e matrix")
        norm2 = float(np.sum(np.abs(a) ** 2))
        if abs(norm2 - 1.0) > _AMP_TOL:
            raise ValueError(f"amplitudes not normalized: sum |a|^2 = {norm2:.15g}")
        return cls(kind="entangled", a=a)

    @property
    def d_s(self) -> int:
        if self.kind == "product":
            return self.c.size
        if self.kind == "mixed-product":
            return self.s_weights.shape[0]
        return self.a.shape[0]

    @property
    def d_e(self) -> int:
        return self.d_mat.shape[0] if self.kind != "entangled" else self.a.shape[1]

    def rho_s0(self) -> np.ndarray:
        if self.kind == "product":
            return np.outer(self.c, self.c.conj())
        if self.kind == "mixed-product":
            return self.s_weights.copy()
        return self.a @ self.a.conj().T

    def rho_full(self) -> np.ndarray:
        if self.kind == "entangled":
            psi = self.a.reshape(-1)
            return np.outer(psi, psi.conj())
        return tensor_product(self.rho_s0(), self.d_mat)

    def env_weights(self) -> np.ndarray:
        """Initial environment statistics (reduced state of E at t0)."""
        if self.kind == "entangled":
            return np.einsum("ia,ib->ab", self.a, self.a.conj())
        return self.d_mat

    def env_purity_defect(self) -> float:
        d = self.env_weights()
        return float(np.abs(d @ d - d).max())


@dataclass(frozen=True)
class CompositeSpec:
    """Dimensions, Hamiltonian pieces and initial state of S + E."""

    d_s: int
    d_e: int
    h_s: np.ndarray
    h_e: np.ndarray
    h_se: np.ndarray
    initial: InitialState
    coupling_strength: float = 1.0

    def __post_init__(self):
        if self.d_s < 1 or self.d_e < 1:
            raise ValueError("dimensions must be positive")
        if self.d_s * self.d_e > MAX_COMPOSITE_DIM:
            raise ValueError(
                f"composite dimension {self.d_s * self.d_e} exceeds {MAX_COMPOSITE_DIM}")
        object.__setattr__(self, "h_s", require_hermitian(self.h_s, "h_s"))
        object.__setattr__(self, "h_e", require_hermitian(self.h_e, "h_e"))
        object.__setattr__(self, "h_se", require_hermitian(self.h_se, "h_se"))
        if self.h_s.shape != (self.d_s, self.d_s):
            raise ValueError(f"h_s shape {self.h_s.shape} does not match d_s = {self.d_s}")
        if self.h_e.shape != (self.d_e, self.d_e):
            raise ValueError(f"h_e shape {self.h_e.shape} does not match d_e = {self.d_e}")
        dim = self.d_s * self.d_e
        if self.h_se.shape != (dim, dim):
            raise ValueError(f"h_se shape {self.h_se.shape} does not match {dim}x{dim}")
        if self.initial.d_s != self.d_s or self.initial.d_e != self.d_e:
            raise ValueError("initial state dimensions do not match the spec")


def build_total_hamiltonian(spec: CompositeSpec) -> np.ndarray:
    eye_s = np.eye(spec.d_s)
    eye_e = np.eye(spec.d_e)
    return (tensor_product(spec.h_s, eye_e)
            + tensor_product(eye_s, spec.h_e)
            + spec.coupling_strength * spec.h_se)


class Propagator:
    """Shared eigendecomposition of H; builds U(dt) cheaply per time."""

    def __init__(self, spec: CompositeSpec):
        self.spec = spec
        self.hamiltonian = build_total_hamiltonian(spec)
        self.eigvals, self.eigvecs = np.linalg.eigh(self.hamiltonian)

    def unitary(self, dt: float) -> np.ndarray:
        if dt == 0:
            return np.eye(self.hamiltonian.shape[0], dtype=complex)
        v = self.eigvecs
        return (v * np.exp(-1j * self.eigvals * dt)) @ v.conj().T

    def rho_full(self, dt: float, rho0: np.ndarray | None = None) -> np.ndarray:
        u = self.unitary(dt)
        if rho0 is None:
            rho0 = self.spec.initial.rho_full()
        return u @ rho0 @ u.conj().T


class EvolveResult(NamedTuple):
    rho_s: np.ndarray
    rho_e: np.ndarray
    rho_full: np.ndarray


def evolve(spec: CompositeSpec, t: float, t0: float = 0.0) -> EvolveResult:
    """Exact state of S, E and S+E at time t from the initial data at t0."""
    if t < t0:
        raise ValueError(f"need t >= t0, got t = {t}, t0 = {t0}")
    rho = Propagator(spec).rho_full(t - t0)
    rho_s = partial_trace_env(rho, spec.d_s, spec.d_e)
    rho_e = partial_trace_sys(rho, spec.d_s, spec.d_e)
    validate_density_matrix(rho, name="rho_full")
    validate_density_matrix(rho_s, name="rho_s")
    validate_density_matrix(rho_e, name="rho_e")
    return EvolveResult(rho_s, rho_e, rho)


@dataclass(frozen=True)
class SuperMap:
    """Four-index representation of the reduced map over [t0, t].

    ``entries[i1, i2, j1, j2]`` maps initial system weights to
    rho_S(t)[j1, j2]; at t = t0 it is the identity map
    delta_{i1 j1} delta_{i2 j2}.
    """

    d_s: int
    t: float
    t0: float
    entries: np.ndarray

    def apply(self, rho_s0) -> np.ndarray:
        rho_s0 = as_complex_matrix(rho_s0)
        return np.einsum("ij,ijxy->xy", rho_s0, self.entries)


def _supermatrix_entries(u: np.ndarray, d_weights: np.ndarray,
                         d_s: int, d_e: int) -> np.ndarray:
    ur = u.reshape(d_s, d_e, d_s, d_e)
    return np.einsum("ab,xgia,ygjb->ijxy", d_weights, ur, ur.conj())


def supermatrix(spec: CompositeSpec, t: float, t0: float = 0.0) -> SuperMap:
    """Reduced dynamical map for product-type initial environments."""
    if spec.initial.kind == "entangled":
        raise ValueError("the super matrix needs a product-type initial state")
    prop = Propagator(spec)
    entries = _supermatrix_entries(prop.unitary(t - t0), spec.initial.d_mat,
                                   spec.d_s, spec.d_e)
    return SuperMap(d_s=spec.d_s, t=t, t0=t0, entries=entries)


def compose_supermaps(first: SuperMap, second: SuperMap) -> np.ndarray:
    """Entries of (second after first): sum_j C1[i, j] C2[j, k]."""
    return np.einsum("ijab,abkl->ijkl", first.entries, second.entries)


def _check_triple(t0: float, ts: float, t: float):
    if not (t0 <= ts <= t):
        raise ValueError(f"need t0 <= ts <= t, got ({t0}, {ts}, {t})")


def divisibility_defect(spec: CompositeSpec, t0: float, ts: float, t: float) -> float:
    """Max-entry violation of the super-matrix factorisation across ts.

    Both segment maps are built from the t0 environment weights.  The
    defect vanishes identically (to roundoff) when the environment holds
    a single state, for any coupling strength, and is generically
    positive otherwise.
    """
    _check_triple(t0, ts, t)
    whole = supermatrix(spec, t, t0)
    first = supermatrix(spec, ts, t0)
    second = supermatrix(spec, t, ts)
    return float(np.abs(whole.entries - compose_supermaps(first, second)).max())


def _contracted_defect(spec: CompositeSpec, t0: float, ts: float, t: float,
                       d_mid: np.ndarray) -> float:
    """Defect of the factorisation applied to the actual initial state.

    Compares the exact rho_S(t) with the middle-segment map (built from
    the t0 environment weights d_mid) applied to the exact rho_S(ts).
    """
    _check_triple(t0, ts, t)
    prop = Propagator(spec)
    rho_ts = partial_trace_env(prop.rho_full(ts - t0), spec.d_s, spec.d_e)
    rho_t = partial_trace_env(prop.rho_full(t - t0), spec.d_s, spec.d_e)
    mid = _supermatrix_entries(prop.unitary(t - ts), d_mid, spec.d_s, spec.d_e)
    lhs = np.einsum("ij,ijxy->xy", rho_ts, mid)
    return float(np.abs(lhs - rho_t).max())


def contracted_divisibility_defect(spec: CompositeSpec, t0: float, ts: float,
                                   t: float) -> float:
    """State-level divisibility defect for product-type initial states."""
    if spec.initial.kind == "entangled":
        raise ValueError("use entangled_divisibility for entangled initial states")
    return _contracted_defect(spec, t0, ts, t, spec.initial.d_mat)


def entangled_divisibility(spec: CompositeSpec, t0: float, ts: float, t: float) -> float:
    """Divisibility defect for a correlated (entangled) initial state.

    The middle-segment map reuses the initial environment statistics
    sum_i a[i, a1] a[i, a2]^*.  The defect is zero exactly when the
    dynamics never moves the environment out of a single state (a
    one-state environment, or amplitudes supported on a block the
    coupling does not leave), and generically positive otherwise.
    """
    if spec.initial.kind != "entangled":
        raise ValueError("entangled_divisibility needs an entangled initial state")
    return _contracted_defect(spec, t0, ts, t, spec.initial.env_weights())


@dataclass(frozen=True)
class FactorizationReport:
    commutator_norm: float
    degenerate_pairs: list
    predicted_divisible: bool


def factorization_degeneracy_check(spec: CompositeSpec,
                                   degeneracy_tol: float = 1e-9) -> FactorizationReport:
    """Commutator and spectrum diagnostics for the factorised-evolution test.

    When [H_S x 1 + 1 x H_E, V * H_SE] vanishes the evolution operator
    factorises exactly into the free and coupling exponentials, and with
    a one-state environment the reduced dynamics is then divisible; the
    prediction flag is only meaningful in that case.  Degenerate level
    pairs of H_S are listed because under the factorised dynamics states
    that start degenerate stay so.
    """
    h0 = (tensor_product(spec.h_s, np.eye(spec.d_e))
          + tensor_product(np.eye(spec.d_s), spec.h_e))
    h_int = spec.coupling_strength * spec.h_se
    comm_norm = float(np.abs(h0 @ h_int - h_int @ h0).max())
    eps = np.linalg.eigvalsh(spec.h_s)
    pairs = [(j, k) for j in range(spec.d_s) for k in range(j + 1, spec.d_s)
             if abs(eps[j] - eps[k]) < degeneracy_tol]
    predicted = comm_norm < 1e-12 and spec.d_e == 1
    return FactorizationReport(commutator_norm=comm_norm, degenerate_pairs=pairs,
                               predicted_divisible=predicted)


@dataclass(frozen=True)
class MarkovDiagnostics:
    """Time-scale separation data for the conventional Markov criteria.

    delta_e is the spread of the environment spectrum, tau_c ~ 1/delta_e
    the correlation time, tau_s ~ 1/(V^2 tau_c) the system time, and
    stationarity_defect the largest trace distance of rho_E(t) from its
    initial value over the grid.
    """

    delta_e: float
    tau_c: float
    tau_s: float
    stationarity_defect: float


def environment_stationarity(spec: CompositeSpec, grid: TimeGrid) -> MarkovDiagnostics:
    w_e = np.linalg.eigvalsh(spec.h_e)
    delta_e = float(w_e.max() - w_e.min())
    tau_c = np.inf if delta_e == 0 else 1.0 / delta_e
    v2 = spec.coupling_strength ** 2
    if v2 == 0 or np.isinf(tau_c):
        tau_s = np.inf if v2 == 0 else 0.0
    else:
        tau_s = 1.0 / (v2 * tau_c)
    defect = 0.0
    if spec.d_e > 1:
        # a one-state environment is identically stationary; only larger
        # environments can actually move
        prop = Propagator(spec)
        rho_e0 = partial_trace_sys(prop.rho_full(0.0), spec.d_s, spec.d_e)
        for t in grid.times():
            rho_e = partial_trace_sys(prop.rho_full(t - grid.t0), spec.d_s, spec.d_e)
            defect = max(defect, trace_distance(rho_e, rho_e0))
    return MarkovDiagnostics(delta_e=delta_e, tau_c=tau_c, tau_s=tau_s,
                             stationarity_defect=defect)


def _finite_difference_rate(values: np.ndarray, h: float) -> np.ndarray:
    rate = np.empty_like(values)
    rate[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    rate[0] = (values[1] - values[0]) / h
    rate[-1] = (values[-1] - values[-2]) / h
    return rate


@dataclass(frozen=True)
class WitnessResult:
    times: np.ndarray
    distance: np.ndarray
    rate: np.ndarray

    @property
    def max_rate(self) -> float:
        """Largest signed slope; any positive value witnesses information backflow."""
        return float(self.rate.max())


def _as_rho_s(state, d_s: int) -> np.ndarray:
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        if arr.size != d_s:
            raise ValueError(f"amplitude vector length {arr.size} does not match d_s = {d_s}")
        norm2 = float(np.sum(np.abs(arr) ** 2))
        if abs(norm2 - 1.0) > _AMP_TOL:
            raise ValueError(f"amplitudes not normalized: sum |c|^2 = {norm2:.15g}")
        return np.outer(arr, arr.conj())
    return validate_density_matrix(arr, name="initial system state")


def distinguishability_witness(state_a, state_b, spec: CompositeSpec,
                               grid: TimeGrid) -> WitnessResult:
    """Trace distance of two evolved system states and its time derivative.

    Both states share the Hamiltonians and the initial environment
    weights of ``spec``; each may be an amplitude vector or a density
    matrix.  A strictly memoryless evolution never increases the
    distance, so a positive derivative anywhere flags backflow.
    """
    if spec.initial.kind == "entangled":
        raise ValueError("the witness needs a product-type environment state")
    rho_a0 = tensor_product(_as_rho_s(state_a, spec.d_s), spec.initial.d_mat)
    rho_b0 = tensor_product(_as_rho_s(state_b, spec.d_s), spec.initial.d_mat)
    prop = Propagator(spec)
    times = grid.times()
    dist = np.empty(times.size)
    for k, t in enumerate(times):
        ra = partial_trace_env(prop.rho_full(t - grid.t0, rho_a0), spec.d_s, spec.d_e)
        rb = partial_trace_env(prop.rho_full(t - grid.t0, rho_b0), spec.d_s, spec.d_e)
        dist[k] = trace_distance(ra, rb)
    return WitnessResult(times=times, distance=dist,
                         rate=_finite_difference_rate(dist, grid.h))


@dataclass(frozen=True)
class EntropyReport:
    """Entropy trajectory of the reduced system state and its rate bound data.

    max_rate is the largest finite-difference |d entropy / dt| over the
    grid, h_norm the operator norm of the total Hamiltonian, delta the
    smaller of the two dimensions, and bound_ratio the ratio of max_rate
    to h_norm * log(delta) (infinite flag when delta = 1, where the
    entropy must simply stay flat).
    """

    grid: TimeGrid
    entropy: np.ndarray
    max_rate: float
    bound_ratio: float
    delta: int
    h_norm: float
    c_const: float = 1.0

    @property
    def entropy_span(self) -> float:
        return float(np.abs(self.entropy - self.entropy[0]).max())


def entropy_sie_check(spec: CompositeSpec, grid: TimeGrid) -> EntropyReport:
    prop = Propagator(spec)
    times = grid.times()
    entropy = np.empty(times.size)
    for k, t in enumerate(times):
        rho_s = partial_trace_env(prop.rho_full(t - grid.t0), spec.d_s, spec.d_e)
        entropy[k] = von_neumann_entropy(rho_s)
    rate = _finite_difference_rate(entropy, grid.h)
    max_rate = float(np.abs(rate).max())
    delta = min(spec.d_s, spec.d_e)
    h_norm = float(np.abs(prop.eigvals).max())
    if delta == 1 or h_norm == 0.0:
        bound_ratio = 0.0 if max_rate == 0.0 else np.inf
    else:
        bound_ratio = max_rate / (h_norm * np.log(delta))
    return EntropyReport(grid=grid, entropy=entropy, max_rate=max_rate,
                         bound_ratio=bound_ratio, delta=delta, h_norm=h_norm)
