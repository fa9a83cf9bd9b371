"""Spectral densities, memory kernels and the level Green's functions.

A set of discrete levels with energies ``e_s`` couples to a broad
environment described by a spectral density J(omega).  The retarded-type
propagator G1 and the lesser-type propagator G2 (conventions recorded in
:data:`GREEN_CONVENTION`) obey memory-kernel equations

    dG1/dt + i e_s G1 + int_t0^t v(t - s) G1(s) ds = 0
    dG2/dt + i e_s G2 + int_t0^t v(t - s) G2(s) ds = int_t0^t v(t - s) G1(s)^dag ds

where v is the Fourier transform of J(omega) / 2pi.  A flat background
J0 contributes a delta kernel J0 * delta(t - s), taken with full weight
at the running endpoint so that the flat-background solution is the pure
exponential decay exp(-i (e_s - i J0) (t - t0)).  A Lorentzian resonance
of strength J1, centre E0 and width Gamma contributes the smooth kernel
(J1 Gamma / 2) exp(-(i E0 + Gamma) s) once the band cut-off is infinite.

The module provides a trapezoidal (Crank-Nicolson) Volterra marcher for
arbitrary kernels, closed forms for the flat and resonant cases, and the
amplitude/phase decomposition of the resonant propagator used to map the
crossover between decaying and oscillating regimes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.signal

GREEN_CONVENTION = "G1 = i * G_retarded, G2 = -i * G_lesser"

_KINDS = ("constant", "lorentzian", "tabulated")


class BranchSingularityError(ValueError):
    """The resonant closed form hits a double root of its characteristic polynomial."""

    def __init__(self, message: str, critical_j1: complex):
        super().__init__(message)
        self.critical_j1 = critical_j1


class StepSizeError(RuntimeError):
    """Grid step too coarse for the requested problem (strict mode)."""


class StepSizeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectralDensity:
    """Environment spectral function J(omega).

    ``constant``    flat background j0 over the whole frequency axis.
    ``lorentzian``  j0 plus a resonance j1 * gamma^2 / ((w - e0)^2 + gamma^2)
                    restricted to the window |w - e0| < omega_cut.
    ``tabulated``   linear interpolation of (omega, value) samples, zero
                    outside the sampled range, no delta background.
    """

    kind: str
    j0: float = 0.0
    j1: float = 0.0
    e0: float = 0.0
    gamma: float = 1.0
    omega_cut: float = math.inf
    table: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown spectral density kind {self.kind!r}")
        if self.j0 < 0 or self.j1 < 0:
            raise ValueError("spectral strengths j0, j1 must be nonnegative")
        if self.kind == "lorentzian":
            if self.gamma <= 0:
                raise ValueError("resonance width gamma must be positive")
            if self.omega_cut <= 0:
                raise ValueError("band cut-off omega_cut must be positive")
        if self.kind == "tabulated":
            if self.table is None:
                raise ValueError("tabulated density needs a table")
            omega, values = self.table
            if len(omega) < 2 or np.any(np.diff(omega) <= 0):
                raise ValueError("table grid must be strictly increasing with >= 2 points")
            if np.any(np.asarray(values) < 0):
                raise ValueError("table values must be nonnegative")

    @classmethod
    def constant(cls, j0: float) -> "SpectralDensity":
        return cls(kind="constant", j0=float(j0))

    @classmethod
    def lorentzian(cls, j0: float, j1: float, e0: float, gamma: float,
                   omega_cut: float = math.inf) -> "SpectralDensity":
        return cls(kind="lorentzian", j0=float(j0), j1=float(j1), e0=float(e0),
                   gamma=float(gamma), omega_cut=float(omega_cut))

    @classmethod
    def tabulated(cls, omega, values) -> "SpectralDensity":
        om = np.asarray(omega, dtype=float)
        va = np.asarray(values, dtype=float)
        if om.shape != va.shape:
            raise ValueError("omega and value arrays must have the same length")
        return cls(kind="tabulated", table=(om, va))

    def peak(self) -> float:
        """Scale used by the step-size guard (max of J over frequency)."""
        if self.kind == "constant":
            return self.j0
        if self.kind == "lorentzian":
            return self.j0 + self.j1
        return float(np.max(self.table[1]))

    def delta_weight(self) -> float:
        """Weight of the instantaneous (delta) part of the memory kernel."""
        return 0.0 if self.kind == "tabulated" else self.j0


def spectral_eval(density: SpectralDensity, omega) -> np.ndarray | float:
    """Evaluate J(omega); accepts scalars or arrays."""
    w = np.asarray(omega, dtype=float)
    if density.kind == "constant":
        out = np.full_like(w, density.j0)
    elif density.kind == "lorentzian":
        detune = w - density.e0
        bump = density.j1 * density.gamma**2 / (detune**2 + density.gamma**2)
        out = density.j0 + np.where(np.abs(detune) < density.omega_cut, bump, 0.0)
    else:
        om, va = density.table
        out = np.interp(w, om, va, left=0.0, right=0.0)
    return float(out) if np.isscalar(omega) else out


@dataclass(frozen=True)
class KernelValue:
    smooth: complex
    delta_weight: float


def _quad_fourier(f, lo: float, hi: float, dt: float, points=None) -> complex:
    """(1/2pi) * integral of f(w) exp(-i w dt) over [lo, hi], adaptive."""
    kwargs = {"limit": 400}
    if points is not None and len(points) < 100 and dt * (hi - lo) < 1e3:
        # plain quad tolerates a few breakpoints; the weighted rule does not
        re, re_err = scipy.integrate.quad(
            lambda w: f(w) * math.cos(w * dt), lo, hi, points=points, **kwargs)
        im, im_err = scipy.integrate.quad(
            lambda w: f(w) * math.sin(w * dt), lo, hi, points=points, **kwargs)
    else:
        re, re_err = scipy.integrate.quad(f, lo, hi, weight="cos", wvar=dt, **kwargs)
        im, im_err = scipy.integrate.quad(f, lo, hi, weight="sin", wvar=dt, **kwargs)
    err = max(re_err, im_err)
    scale = max(abs(re), abs(im), 1e-12)
    if err > 1e-6 * scale and err > 1e-9:
        raise RuntimeError(
            f"kernel quadrature did not converge: error estimate {err:.2e} on [{lo}, {hi}]"
        )
    return (re - 1j * im) / (2.0 * math.pi)


def _quad_fourier_table(om: np.ndarray, va: np.ndarray, dt: float) -> complex:
    """Fourier integral of a piecewise-linear table, chunked adaptive quadrature.

    Chunks are aligned to table nodes and kept below 100 breakpoints and
    a few oscillation periods each, so plain adaptive quadrature resolves
    every chunk to near machine precision.
    """
    interp = lambda w: np.interp(w, om, va)
    max_width = 30.0 / dt if dt > 0 else math.inf
    total = 0.0j
    total_err = 0.0
    start = 0
    n = len(om)
    while start < n - 1:
        stop = start + 1
        while (stop < n - 1 and stop - start < 80
               and om[stop + 1] - om[start] <= max_width):
            stop += 1
        lo, hi = float(om[start]), float(om[stop])
        pts = list(om[start + 1:stop])
        re, re_err = scipy.integrate.quad(
            lambda w: interp(w) * math.cos(w * dt), lo, hi, points=pts, limit=200)
        im, im_err = scipy.integrate.quad(
            lambda w: interp(w) * math.sin(w * dt), lo, hi, points=pts, limit=200)
        total += re - 1j * im
        total_err += re_err + im_err
        start = stop
    if total_err > 1e-6 * max(abs(total), 1e-12) and total_err > 1e-9:
        raise RuntimeError(
            f"table kernel quadrature did not converge: error estimate {total_err:.2e}")
    return total / (2.0 * math.pi)


def memory_kernel(density: SpectralDensity, dt: float) -> KernelValue:
    """Time-domain kernel at lag dt >= 0, split into smooth and delta parts.

    The flat background never enters the smooth part; it is returned as
    ``delta_weight``.  The resonance with infinite cut-off uses the
    closed form (j1 gamma / 2) exp(-(i e0 + gamma) dt); finite cut-offs
    and tabulated densities are integrated by adaptive quadrature.
    """
    if dt < 0:
        raise ValueError("kernel lag must be nonnegative")
    if density.kind == "constant":
        return KernelValue(0.0j, density.j0)
    if density.kind == "lorentzian":
        if math.isinf(density.omega_cut):
            smooth = 0.5 * density.j1 * density.gamma * np.exp(
                -(1j * density.e0 + density.gamma) * dt)
            return KernelValue(complex(smooth), density.j0)
        j1, g, e0 = density.j1, density.gamma, density.e0
        bump = lambda w: j1 * g * g / ((w - e0) ** 2 + g * g)
        smooth = _quad_fourier(bump, e0 - density.omega_cut, e0 + density.omega_cut, dt)
        return KernelValue(smooth, density.j0)
    smooth = _quad_fourier_table(*density.table, dt)
    return KernelValue(smooth, 0.0)


def kernel_on_grid(density: SpectralDensity, lags: np.ndarray) -> np.ndarray:
    """Smooth kernel part sampled on an array of lags."""
    lags = np.asarray(lags, dtype=float)
    if density.kind == "constant":
        return np.zeros(lags.shape, dtype=complex)
    if density.kind == "lorentzian" and math.isinf(density.omega_cut):
        return 0.5 * density.j1 * density.gamma * np.exp(
            -(1j * density.e0 + density.gamma) * lags)
    return np.array([memory_kernel(density, s).smooth for s in lags], dtype=complex)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``steps`` intervals on [t0, t1]."""

    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError(f"need t1 > t0, got [{self.t0}, {self.t1}]")
        if self.steps < 2:
            raise ValueError("need at least 2 steps")

    @property
    def h(self) -> float:
        return (self.t1 - self.t0) / self.steps

    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.steps + 1)


@dataclass(frozen=True)
class GreenProblem:
    es: np.ndarray
    density: SpectralDensity
    grid: TimeGrid

    def __post_init__(self):
        es = np.asarray(self.es, dtype=float)
        if es.ndim != 1 or es.size == 0 or not np.isfinite(es).all():
            raise ValueError("es must be a nonempty finite 1-d array of level energies")
        object.__setattr__(self, "es", es)


@dataclass(frozen=True)
class GreenSolution:
    """Diagonal propagator matrices on a time grid.

    ``g1[k]`` and ``g2[k]`` are N x N matrices at grid point k; g1 starts
    at the identity and g2 at zero, exactly.  ``g2`` is None for closed
    forms that only describe the retarded component.
    """

    grid: TimeGrid
    g1: np.ndarray
    g2: np.ndarray | None = None
    convention_note: str = GREEN_CONVENTION

    def __post_init__(self):
        if np.abs(self.g1[0] - np.eye(self.g1.shape[1])).max() != 0.0:
            raise ValueError("g1 must equal the identity exactly at t0")
        if self.g2 is not None and np.abs(self.g2[0]).max() != 0.0:
            raise ValueError("g2 must vanish exactly at t0")

    def level(self, k: int) -> tuple[np.ndarray, np.ndarray | None]:
        """1-d trajectories of g1 (and g2 if present) for level k."""
        g2 = None if self.g2 is None else self.g2[:, k, k]
        return self.g1[:, k, k], g2


def _embed_diagonal(levels: np.ndarray) -> np.ndarray:
    n_times, n_lev = levels.shape
    out = np.zeros((n_times, n_lev, n_lev), dtype=complex)
    idx = np.arange(n_lev)
    out[:, idx, idx] = levels
    return out


def _volterra_march(m_coef: np.ndarray, kern: np.ndarray, h: float,
                    g0: np.ndarray, forcing: np.ndarray | None) -> np.ndarray:
    """March g' = m g - (kern * g)(t) + forcing with the trapezoid rule.

    The history convolution uses trapezoid weights and the corrector is
    solved in closed form (the update is linear in the unknown node), so
    the scheme is the fully converged predictor-corrector, global O(h^2).
    """
    n = len(kern) - 1
    g = np.zeros((n + 1, len(m_coef)), dtype=complex)
    g[0] = g0
    has_kernel = bool(np.any(kern))
    denom = 1.0 - 0.5 * h * m_coef + 0.25 * h * h * kern[0]
    f_prev = m_coef * g[0] + (forcing[0] if forcing is not None else 0.0)
    for k in range(n):
        if has_kernel:
            hist = kern[k + 1:0:-1] @ g[:k + 1]
            s_tilde = h * (hist - 0.5 * kern[k + 1] * g[0])
        else:
            s_tilde = 0.0
        drive = forcing[k + 1] if forcing is not None else 0.0
        g[k + 1] = (g[k] + 0.5 * h * (f_prev - s_tilde + drive)) / denom
        s_new = s_tilde + 0.5 * h * kern[0] * g[k + 1]
        f_prev = m_coef * g[k + 1] - s_new + drive
    return g


def _trapezoid_convolution(kern: np.ndarray, sig: np.ndarray, h: float) -> np.ndarray:
    """h * trapezoid-weighted causal convolution of kern with each signal column."""
    n = len(kern) - 1
    out = np.empty_like(sig)
    for lev in range(sig.shape[1]):
        out[:, lev] = scipy.signal.fftconvolve(kern, sig[:, lev])[: n + 1]
    out -= 0.5 * np.outer(kern, sig[0])
    out -= 0.5 * kern[0] * sig
    out *= h
    out[0] = 0.0
    return out


def solve_green(problem: GreenProblem, strict: bool = False) -> GreenSolution:
    """Numerical solution of the two memory-kernel equations.

    The delta part of the kernel acts as a local decay term -J0 * G with
    full weight from the first step on, so a flat spectral density
    reproduces the pure exponential solution to discretisation accuracy.
    The G2 equation is driven by the conjugate of the already computed
    G1 history.
    """
    grid = problem.grid
    h = grid.h
    scale = float(np.max(np.abs(problem.es)) + problem.density.peak())
    if h * scale >= 0.1:
        msg = (f"step h = {h:.3e} is coarse for energy scale {scale:.3e} "
               f"(h * scale = {h * scale:.3e} >= 0.1)")
        if strict:
            raise StepSizeError(msg)
        warnings.warn(msg, StepSizeWarning, stacklevel=2)
    lags = h * np.arange(grid.steps + 1)
    kern = kernel_on_grid(problem.density, lags)
    j0 = problem.density.delta_weight()
    m_coef = -(1j * problem.es + j0)

    ones = np.ones(problem.es.size, dtype=complex)
    g1 = _volterra_march(m_coef, kern, h, ones, None)

    h1 = g1.conj()
    forcing = j0 * h1
    if np.any(kern):
        forcing = forcing + _trapezoid_convolution(kern, h1, h)
    g2 = _volterra_march(m_coef, kern, h, np.zeros_like(ones), forcing)

    g1[0] = 1.0
    g2[0] = 0.0
    return GreenSolution(grid=grid, g1=_embed_diagonal(g1), g2=_embed_diagonal(g2))


def analytic_green_const(es, j0: float, grid: TimeGrid) -> GreenSolution:
    """Closed form for a flat spectral density.

    g1 = exp(-i (e - i j0) dt) decays at rate j0; g2 carries the printed
    linear-in-time prefactor j0 * dt on the same exponential.
    """
    if j0 < 0:
        raise ValueError("j0 must be nonnegative")
    es = np.asarray(es, dtype=float)
    dt = grid.times() - grid.t0
    phase = np.exp(-1j * np.outer(dt, es - 1j * j0))
    g1 = phase
    g2 = j0 * dt[:, None] * phase
    g1[0] = 1.0
    g2[0] = 0.0
    return GreenSolution(grid=grid, g1=_embed_diagonal(g1), g2=_embed_diagonal(g2))


def analytic_green1_lorentzian(es, j0: float, j1: float, e0: float, gamma: float,
                               grid: TimeGrid) -> GreenSolution:
    """Closed form of g1 for the resonant kernel with infinite cut-off.

    With z = (e - e0) - i (j0 - gamma) the characteristic roots of the
    kernel equation are (-i/2) [(e + e0) - i (j0 + gamma) +- R] with
    R = sqrt(z^2 + 2 j1 gamma), and

        g1(dt) = exp(-i/2 ((e - i j0) + (e0 - i gamma)) dt)
                 * ((z + R) exp(-i R dt / 2) - (z - R) exp(+i R dt / 2)) / (2 R).

    The constant under the square root is fixed by the kernel
    normalisation (j1 gamma / 2) exp(-(i e0 + gamma) s), which is itself
    validated against direct quadrature of the spectral density; the
    j1 -> 0 path returns the flat-background closed form exactly.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if j1 < 0 or j0 < 0:
        raise ValueError("spectral strengths must be nonnegative")
    es = np.asarray(es, dtype=float)
    if j1 == 0:
        sol = analytic_green_const(es, j0, grid)
        return GreenSolution(grid=grid, g1=sol.g1, g2=None)
    dt = (grid.times() - grid.t0)[:, None]
    z = (es - e0) - 1j * (j0 - gamma)
    disc = z * z + 2.0 * j1 * gamma
    tol = 1e-13 * (np.abs(z) ** 2 + 2.0 * j1 * gamma)
    bad = np.abs(disc) <= tol
    if np.any(bad):
        k = int(np.argmax(bad))
        crit = -z[k] ** 2 / (2.0 * gamma)
        raise BranchSingularityError(
            f"degenerate characteristic roots at level {k} (e = {es[k]}): "
            f"critical j1 = {crit:.6g}", critical_j1=complex(crit))
    r = np.sqrt(disc)
    pref = np.exp(-0.5j * ((es + e0) - 1j * (j0 + gamma)) * dt)
    osc = ((z + r) * np.exp(-0.5j * r * dt) - (z - r) * np.exp(0.5j * r * dt)) / (2.0 * r)
    g1 = pref * osc
    g1[0] = 1.0
    return GreenSolution(grid=grid, g1=_embed_diagonal(g1), g2=None)


@dataclass(frozen=True)
class AmplitudePhase:
    """Two-branch decomposition g1 = a1 exp(phi1_rate dt) - a2 exp(phi2_rate dt).

    e_minus = e - e0, e_plus = e + e0, v = j0 - gamma, w = j0 + gamma.
    c_mag and theta are the polar magnitude and angle of the squared
    branch root (e_minus - i v)^2 + 4 j1 gamma, so the principal root is
    c_mag * exp(i theta / 2).  Both phase rates decay when w > c_mag.
    """

    a1: complex
    a2: complex
    phi1_rate: complex
    phi2_rate: complex
    c_mag: float
    theta: float
    e_minus: float
    e_plus: float
    v: float
    w: float

    @property
    def decays(self) -> bool:
        return self.w > self.c_mag


def amplitude_phase(es_level: float, j0: float, j1: float, e0: float,
                    gamma: float) -> AmplitudePhase:
    """Amplitude and per-time phase coefficients of the two-branch form.

    a1 = (1 + z / R) / 2 with z = e_minus - i v and the principal root
    R = sqrt(z^2 + 4 j1 gamma); a2 = 1 - a1 exactly.  theta is computed
    with the two-argument arctangent so the quadrant is unambiguous, and
    the j1 = 0 path returns the endpoint amplitudes exactly.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    e_minus = es_level - e0
    e_plus = es_level + e0
    v = j0 - gamma
    w = j0 + gamma
    x = e_minus * e_minus - v * v + 4.0 * j1 * gamma
    y = -2.0 * e_minus * v
    c_mag = (x * x + y * y) ** 0.25
    theta = math.atan2(y, x)
    if theta <= -math.pi:
        theta = math.pi
    z = e_minus - 1j * v
    if j1 == 0:
        # principal sqrt(z^2) equals z in the closed right half plane
        sign = 1.0 if (e_minus > 0 or (e_minus == 0 and -v >= 0)) else -1.0
        r = sign * z
        ratio = sign
    else:
        r = c_mag * np.exp(0.5j * theta)
        ratio = z / r
    a1 = 0.5 * (1.0 + ratio)
    a2 = 1.0 - a1
    base = e_plus - 1j * w
    phi1_rate = -0.5j * (base + r)
    phi2_rate = -0.5j * (base - r)
    return AmplitudePhase(a1=complex(a1), a2=complex(a2),
                          phi1_rate=complex(phi1_rate), phi2_rate=complex(phi2_rate),
                          c_mag=float(c_mag), theta=float(theta),
                          e_minus=e_minus, e_plus=e_plus, v=v, w=w)


@dataclass(frozen=True)
class CrossoverRow:
    j1: float
    abs_a1: float
    abs_a2: float
    phi1_rate: complex
    phi2_rate: complex
    decays: bool


def crossover_sweep(es_level: float, j0: float, e0: float, gamma: float,
                    j1_values) -> list[CrossoverRow]:
    """Scan the resonance strength and tabulate amplitudes and phase rates."""
    j1_values = np.asarray(j1_values, dtype=float)
    if j1_values.size == 0:
        raise ValueError("j1_values must be nonempty")
    if np.any(j1_values < 0):
        raise ValueError("j1 values must be nonnegative")
    rows = []
    for j1 in j1_values:
        ap = amplitude_phase(es_level, j0, float(j1), e0, gamma)
        rows.append(CrossoverRow(j1=float(j1), abs_a1=abs(ap.a1), abs_a2=abs(ap.a2),
                                 phi1_rate=ap.phi1_rate, phi2_rate=ap.phi2_rate,
                                 decays=ap.decays))
    return rows
