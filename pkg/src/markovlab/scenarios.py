"""Named experiment scenarios: run, write CSV + summary, return exit status.

Every scenario writes one CSV table (17 significant digits, header row)
and a plain-text summary listing each check with its measured value,
bound and PASS/FAIL status.  Identical configurations produce byte
identical output; random pieces of a problem are always drawn from the
explicit integer ``seed`` key in a fixed order.

Exit status: 0 all checks pass, 1 a scientific check failed, 2 usage or
configuration error (raised as :class:`ConfigError` for the CLI).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from markovlab.config import SCHEMAS, ConfigError, ScenarioConfig
from markovlab.dynamics import (
    CompositeSpec,
    InitialState,
    Propagator,
    distinguishability_witness,
    divisibility_defect,
    entangled_divisibility,
    entropy_sie_check,
    environment_stationarity,
)
from markovlab.linalg import partial_trace_env, partial_trace_sys, trace_distance
from markovlab.master import effective_commutator_rhs
from markovlab.sampling import random_amplitudes, random_env_weights, random_hermitian
from markovlab.spectral import (
    GreenProblem,
    SpectralDensity,
    TimeGrid,
    amplitude_phase,
    analytic_green1_lorentzian,
    crossover_sweep,
    solve_green,
)


@dataclass(frozen=True)
class CheckRow:
    name: str
    measured: float
    bound: float
    mode: str = "<="   # "<=" or ">="

    @property
    def passed(self) -> bool:
        if self.mode == "<=":
            return self.measured <= self.bound
        return self.measured >= self.bound


@dataclass
class ScenarioResult:
    columns: list
    rows: list
    checks: list = field(default_factory=list)
    info: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: str, columns, rows):
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _summary_text(scenario: str, csv_name: str, result: ScenarioResult) -> str:
    lines = [f"scenario: {scenario}", f"csv: {csv_name}"]
    lines.extend(result.info)
    if result.checks:
        width = max(len(c.name) for c in result.checks)
        for c in result.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name:<{width}}  measured {c.measured:.6e}  "
                         f"{c.mode} {c.bound:.6e}  {status}")
    else:
        lines.append("no checks configured")
    lines.append(f"result: {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------- grid and spec IO


def _grid_from(cfg: ScenarioConfig, t1_default: float, steps_default: int) -> TimeGrid:
    return TimeGrid(cfg.get_float("t0", 0.0),
                    cfg.get_float("t1", t1_default),
                    cfg.get_int("steps", steps_default))


def _density_from(cfg: ScenarioConfig) -> SpectralDensity:
    j0 = cfg.get_float("j0", required=True)
    j1 = cfg.get_float("j1", 0.0)
    if j1 == 0.0:
        return SpectralDensity.constant(j0)
    gamma = cfg.get_float("gamma")
    if gamma is None:
        raise ConfigError("gamma is required when j1 > 0", key="gamma")
    return SpectralDensity.lorentzian(j0, j1, cfg.get_float("e0", 0.0), gamma,
                                      cfg.get_float("omega_cut", math.inf))


class _SeedPool:
    """Deterministic source for the pieces a config leaves unspecified."""

    def __init__(self, cfg: ScenarioConfig):
        self._seed = cfg.get_int("seed")
        self._rng = None

    def rng(self, key: str) -> np.random.Generator:
        if self._rng is None:
            if self._seed is None:
                raise ConfigError("a seed is required when this key is omitted", key=key)
            self._rng = np.random.default_rng(self._seed)
        return self._rng


def _spec_from(cfg: ScenarioConfig, *, entangled: bool = False,
               amplitude_key: str = "c") -> tuple:
    d_s = cfg.get_int("dS", required=True)
    d_e = cfg.get_int("dE", required=True)
    pool = _SeedPool(cfg)
    # generation order is fixed: hS, hE, hSE, amplitudes, dmat
    h_s = cfg.get_matrix("hS")
    if h_s is None:
        h_s = random_hermitian(d_s, pool.rng("hS"))
    h_e = cfg.get_matrix("hE")
    if h_e is None:
        h_e = random_hermitian(d_e, pool.rng("hE"))
    h_se = cfg.get_matrix("hSE")
    if h_se is None:
        h_se = random_hermitian(d_s * d_e, pool.rng("hSE"))

    try:
        if entangled:
            a = cfg.get_matrix("a")
            if a is None:
                a = random_amplitudes(d_s * d_e, pool.rng("a")).reshape(d_s, d_e)
            initial = InitialState.entangled(a)
        else:
            smat = cfg.get_matrix("smat")
            c = cfg.get_vector(amplitude_key) if smat is None else None
            if smat is None and c is None:
                c = random_amplitudes(d_s, pool.rng(amplitude_key))
            d_mat = cfg.get_matrix("dmat")
            if d_mat is None:
                d_mat = (np.eye(1, dtype=complex) if d_e == 1
                         else random_env_weights(d_e, pool.rng("dmat")))
            initial = (InitialState.mixed_product(smat, d_mat) if smat is not None
                       else InitialState.product(c, d_mat))
        return CompositeSpec(d_s=d_s, d_e=d_e, h_s=h_s, h_e=h_e, h_se=h_se,
                             initial=initial,
                             coupling_strength=cfg.get_float("coupling_strength", 1.0)), pool
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc))


def _triples_from(cfg: ScenarioConfig, pool: _SeedPool) -> list:
    times = cfg.get_vector("times", real=True)
    if times is not None:
        if times.size != 3 or not (times[0] <= times[1] <= times[2]):
            raise ConfigError("need an ordered [t0, ts, t] triple", key="times")
        return [tuple(times)]
    n = cfg.get_int("n_triples", 5)
    t_max = cfg.get_float("t_max", 2.0)
    rng = pool.rng("times")
    triples = []
    for _ in range(n):
        ts, t = np.sort(rng.uniform(0.05 * t_max, t_max, size=2))
        triples.append((0.0, float(ts), float(t)))
    return triples


# --------------------------------------------------------------- runners


def _run_green(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    es = cfg.get_vector("es", required=True, real=True)
    density = _density_from(cfg)
    grid = _grid_from(cfg, 10.0, 1000)
    sol = solve_green(GreenProblem(es=es, density=density, grid=grid), strict=strict)
    times = grid.times()
    columns = ["t"]
    for k in range(es.size):
        columns += [f"re_g1_{k}", f"im_g1_{k}", f"abs_g1_{k}",
                    f"re_g2_{k}", f"im_g2_{k}"]
    rows = []
    for i, t in enumerate(times):
        row = [t]
        for k in range(es.size):
            g1 = sol.g1[i, k, k]
            g2 = sol.g2[i, k, k]
            row += [g1.real, g1.imag, abs(g1), g2.real, g2.imag]
        rows.append(row)
    checks = [
        CheckRow("g1_initial_defect", float(np.abs(sol.g1[0] - np.eye(es.size)).max()), 0.0),
        CheckRow("g2_initial_defect", float(np.abs(sol.g2[0]).max()), 0.0),
    ]
    info = [f"levels: {es.size}", f"density: {density.kind}", f"h: {grid.h!r}"]
    if density.kind == "constant":
        mags = np.abs(sol.g1[:, np.arange(es.size), np.arange(es.size)])
        resid = np.abs(np.log(mags[1:]) + density.j0 * (times[1:, None] - grid.t0)).max()
        scale = float(np.abs(es).max() + density.j0)
        default = grid.h**2 * scale**3 * (grid.t1 - grid.t0)
        checks.append(CheckRow("decay_residual", float(resid),
                               cfg.tolerance("decay_residual", default)))
    return ScenarioResult(columns, rows, checks, info)


def _run_green_analytic(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    es = cfg.get_vector("es", required=True, real=True)
    j0 = cfg.get_float("j0", required=True)
    j1 = cfg.get_float("j1", required=True)
    e0 = cfg.get_float("e0", required=True)
    gamma = cfg.get_float("gamma", required=True)
    grid = _grid_from(cfg, 10.0, 1000)
    density = SpectralDensity.lorentzian(j0, j1, e0, gamma)
    num = solve_green(GreenProblem(es=es, density=density, grid=grid), strict=strict)
    ana = analytic_green1_lorentzian(es, j0, j1, e0, gamma, grid)
    columns = ["t"]
    for k in range(es.size):
        columns += [f"abs_num_{k}", f"abs_ana_{k}", f"dev_{k}"]
    rows = []
    for i, t in enumerate(grid.times()):
        row = [t]
        for k in range(es.size):
            row += [abs(num.g1[i, k, k]), abs(ana.g1[i, k, k]),
                    abs(num.g1[i, k, k] - ana.g1[i, k, k])]
        rows.append(row)
    dev = float(np.abs(num.g1 - ana.g1).max())
    checks = [CheckRow("max_abs_dev", dev, cfg.tolerance("max_abs_dev", 1e-3))]
    return ScenarioResult(columns, rows, checks, [f"h: {grid.h!r}"])


def _run_amp_phase(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    es_level = cfg.get_float("es_level", required=True)
    j0 = cfg.get_float("j0", required=True)
    e0 = cfg.get_float("e0", required=True)
    gamma = cfg.get_float("gamma", required=True)
    j1_values = cfg.get_vector("j1_values", required=True, real=True)
    rows_out = crossover_sweep(es_level, j0, e0, gamma, j1_values)
    columns = ["j1", "abs_a1", "abs_a2", "re_phi1_rate", "im_phi1_rate",
               "re_phi2_rate", "im_phi2_rate", "decays"]
    rows = [[r.j1, r.abs_a1, r.abs_a2, r.phi1_rate.real, r.phi1_rate.imag,
             r.phi2_rate.real, r.phi2_rate.imag, r.decays] for r in rows_out]
    sum_defect = 0.0
    for j1 in j1_values:
        ap = amplitude_phase(es_level, j0, float(j1), e0, gamma)
        sum_defect = max(sum_defect, abs(ap.a1 + ap.a2 - 1.0))
    checks = [CheckRow("amp_sum_defect", sum_defect,
                       cfg.tolerance("amp_sum_defect", 1e-15))]
    if np.any(j1_values == 0.0):
        k = int(np.argmax(j1_values == 0.0))
        endpoint = max(abs(rows_out[k].abs_a1 - 1.0), rows_out[k].abs_a2)
        checks.append(CheckRow("endpoint_defect", endpoint,
                               cfg.tolerance("endpoint_defect", 0.0)))
    ap0 = amplitude_phase(es_level, j0, 0.0, e0, gamma)
    scale = max(abs(ap0.e_minus), abs(ap0.v), gamma)
    if j1_values.max() >= 1e5 * scale:
        k = int(np.argmax(j1_values))
        half = max(abs(rows_out[k].abs_a1 - 0.5), abs(rows_out[k].abs_a2 - 0.5))
        checks.append(CheckRow("half_defect", half, cfg.tolerance("half_defect", 1e-2)))
    return ScenarioResult(columns, rows, checks, [f"points: {j1_values.size}"])


def _expectation(cfg: ScenarioConfig, d_e: int) -> str:
    expect = cfg.get_str("expect")
    if expect is None:
        return "divisible" if d_e == 1 else "report"
    if expect not in ("divisible", "nondivisible", "report"):
        raise ConfigError("expect must be divisible, nondivisible or report",
                          key="expect")
    return expect


def _defect_checks(cfg: ScenarioConfig, expect: str, defects) -> list:
    if expect == "divisible":
        return [CheckRow("defect_max", max(defects),
                         cfg.tolerance("divisible", 1e-10))]
    if expect == "nondivisible":
        return [CheckRow("defect_min", min(defects),
                         cfg.tolerance("nondivisible", 1e-4), mode=">=")]
    return [CheckRow("defect_max", max(defects), math.inf)]


def _run_divisibility(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    spec, pool = _spec_from(cfg)
    triples = _triples_from(cfg, pool)
    rows = [[t0, ts, t, divisibility_defect(spec, t0, ts, t)]
            for (t0, ts, t) in triples]
    defects = [r[3] for r in rows]
    expect = _expectation(cfg, spec.d_e)
    info = [f"dS: {spec.d_s}", f"dE: {spec.d_e}",
            f"coupling_strength: {spec.coupling_strength!r}", f"expect: {expect}"]
    return ScenarioResult(["t0", "ts", "t", "defect"], rows,
                          _defect_checks(cfg, expect, defects), info)


def _run_entangled(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    spec, pool = _spec_from(cfg, entangled=True)
    triples = _triples_from(cfg, pool)
    rows = [[t0, ts, t, entangled_divisibility(spec, t0, ts, t)]
            for (t0, ts, t) in triples]
    defects = [r[3] for r in rows]
    expect = _expectation(cfg, spec.d_e)
    info = [f"dS: {spec.d_s}", f"dE: {spec.d_e}", f"expect: {expect}",
            f"env_purity_defect: {spec.initial.env_purity_defect():.6e}"]
    return ScenarioResult(["t0", "ts", "t", "defect"], rows,
                          _defect_checks(cfg, expect, defects), info)


def _run_master_check(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    if cfg.get_int("dE", 1) != 1:
        raise ConfigError("the master-equation check needs a one-state environment "
                          "(dE = 1)", key="dE")
    child = ScenarioConfig(scenario=cfg.scenario, values=dict(cfg.values),
                           tolerance_overrides=dict(cfg.tolerance_overrides))
    child.values["dE"] = 1
    spec, pool = _spec_from(child)
    times = cfg.get_vector("times", real=True)
    if times is None:
        n = cfg.get_int("n_times", 10)
        t_max = cfg.get_float("t_max", 2.0)
        times = np.sort(pool.rng("times").uniform(0.0, t_max, size=n))
    w0 = np.sort(np.linalg.eigvalsh(spec.initial.rho_s0()))
    prop = Propagator(spec)
    rows = []
    for t in times:
        form = effective_commutator_rhs(spec, float(t))
        rho_s = partial_trace_env(prop.rho_full(float(t)), spec.d_s, spec.d_e)
        drift = float(np.abs(np.sort(np.linalg.eigvalsh(rho_s)) - w0).max())
        rows.append([float(t), form.residual, drift])
    checks = [
        CheckRow("residual_max", max(r[1] for r in rows),
                 cfg.tolerance("residual", 1e-10)),
        CheckRow("eig_drift_max", max(r[2] for r in rows),
                 cfg.tolerance("eig_drift", 1e-9)),
    ]
    return ScenarioResult(["t", "residual", "eig_drift"], rows, checks,
                          [f"dS: {spec.d_s}"])


def _run_entropy(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    spec, _ = _spec_from(cfg)
    grid = _grid_from(cfg, 5.0, 200)
    report = entropy_sie_check(spec, grid)
    rows = [[t, s] for t, s in zip(grid.times(), report.entropy)]
    info = [f"delta: {report.delta}", f"h_norm: {report.h_norm!r}",
            f"max_rate: {report.max_rate!r}", f"bound_ratio: {report.bound_ratio!r}"]
    if report.delta == 1:
        checks = [CheckRow("entropy_span", report.entropy_span,
                           cfg.tolerance("entropy_span", 1e-9))]
    else:
        checks = [CheckRow("bound_ratio", report.bound_ratio,
                           cfg.tolerance("bound_ratio", 2.0))]
    return ScenarioResult(["t", "entropy"], rows, checks, info)


def _run_stationarity(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    spec, _ = _spec_from(cfg)
    grid = _grid_from(cfg, 5.0, 200)
    diag = environment_stationarity(spec, grid)
    prop = Propagator(spec)
    rho_e0 = partial_trace_sys(prop.rho_full(0.0), spec.d_s, spec.d_e)
    rows = []
    for t in grid.times():
        rho_e = partial_trace_sys(prop.rho_full(t - grid.t0), spec.d_s, spec.d_e)
        rows.append([t, trace_distance(rho_e, rho_e0)])
    info = [f"delta_e: {diag.delta_e!r}", f"tau_c: {diag.tau_c!r}",
            f"tau_s: {diag.tau_s!r}",
            f"env_purity_defect: {spec.initial.env_purity_defect():.6e}"]
    checks = [CheckRow("stationarity_defect", diag.stationarity_defect,
                       cfg.tolerance("stationarity_defect", math.inf))]
    return ScenarioResult(["t", "distance"], rows, checks, info)


def _run_witness(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    spec, _ = _spec_from(cfg, amplitude_key="cA")
    c_b = cfg.get_vector("cB", required=True)
    grid = _grid_from(cfg, 5.0, 200)
    result = distinguishability_witness(cfg.get_vector("cA", required=True), c_b,
                                        spec, grid)
    rows = [[t, d, r] for t, d, r in zip(result.times, result.distance, result.rate)]
    default = 1e-8 if spec.d_e == 1 else math.inf
    checks = [CheckRow("max_rate", result.max_rate,
                       cfg.tolerance("backflow", default))]
    return ScenarioResult(["t", "distance", "rate"], rows, checks,
                          [f"dS: {spec.d_s}", f"dE: {spec.d_e}"])


_RUNNERS = {
    "green": _run_green,
    "green-analytic": _run_green_analytic,
    "amp-phase": _run_amp_phase,
    "divisibility": _run_divisibility,
    "entangled": _run_entangled,
    "master-check": _run_master_check,
    "entropy": _run_entropy,
    "stationarity": _run_stationarity,
    "witness": _run_witness,
}


# ------------------------------------------------------------------ sweep


def sweep_scenario(base_cfg: ScenarioConfig, key: str, values,
                   strict: bool = False) -> ScenarioResult:
    """Run the base scenario once per swept value and merge the tables."""
    schema = SCHEMAS.get(base_cfg.scenario)
    if schema is None or base_cfg.scenario == "sweep":
        raise ConfigError(f"cannot sweep scenario {base_cfg.scenario!r}")
    if key not in schema.all_keys():
        raise ConfigError(f"not a key of scenario {base_cfg.scenario!r}", key=key)
    values = list(values)
    if any(isinstance(v, (np.ndarray, list, str)) for v in values):
        raise ConfigError("swept values must be scalars", key=key)
    current = base_cfg.values.get(key)
    if current is not None and isinstance(current, (np.ndarray, str)):
        raise ConfigError("swept key must hold a scalar parameter", key=key)

    combined = ScenarioResult(columns=[key], rows=[], checks=[], info=[])
    for v in values:
        child_values = dict(base_cfg.values)
        child_values[key] = float(v)
        child = ScenarioConfig(scenario=base_cfg.scenario, values=child_values,
                               tolerance_overrides=dict(base_cfg.tolerance_overrides))
        result = _RUNNERS[base_cfg.scenario](child, strict)
        if len(combined.columns) == 1:
            combined.columns = [key] + result.columns
        combined.rows.extend([float(v)] + row for row in result.rows)
        combined.checks.extend(
            CheckRow(f"{key}={_fmt(v)}:{c.name}", c.measured, c.bound, c.mode)
            for c in result.checks)
        combined.info.extend(f"{key}={_fmt(v)}: {line}" for line in result.info)
    combined.info.insert(0, f"runs: {len(values)}")
    return combined


def _run_sweep(cfg: ScenarioConfig, strict: bool) -> ScenarioResult:
    base_name = cfg.get_str("base", required=True)
    key = cfg.get_str("sweep_key", required=True)
    sweep_values = cfg.get_vector("sweep_values", required=True, real=True)
    base_values = {k: v for k, v in cfg.values.items()
                   if k not in ("base", "sweep_key", "sweep_values", "out")}
    base_cfg = ScenarioConfig(scenario=base_name, values=base_values,
                              tolerance_overrides=dict(cfg.tolerance_overrides))
    return sweep_scenario(base_cfg, key, list(sweep_values), strict)


# ------------------------------------------------------------- top level


def run_scenario(cfg: ScenarioConfig, out_dir: str = ".", strict: bool = False) -> int:
    """Execute a scenario; write CSV and summary; return the exit status."""
    runner = _RUNNERS.get(cfg.scenario, _run_sweep if cfg.scenario == "sweep" else None)
    if runner is None:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    result = runner(cfg, strict)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, cfg.output_path)
    _write_csv(csv_path, result.columns, result.rows)
    summary = _summary_text(cfg.scenario, cfg.output_path, result)
    base, _ = os.path.splitext(csv_path)
    with open(base + ".summary.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary)
    print(summary, end="")
    return 0 if result.passed else 1
