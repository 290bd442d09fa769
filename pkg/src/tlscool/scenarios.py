"""Figure-reproduction scenarios, config files, sweeps and CSV emission.

The scenario presets pin every convention needed to reproduce the shipped
numbers bit-for-bit; each emitted file carries the full convention ledger as
commented metadata.  The pipeline is seed-free and deterministic: identical
configs produce byte-identical outputs.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.constants

from ._version import __version__
from .core import (
    DensityMatrix,
    SpaceDims,
    build_tls_ops,
    number_operator,
    thermal_resonator_state,
    tls_excited_projector,
    tls_thermal_factor,
    top_level_projector,
)
from .dissipation import (
    bose_occupation,
    build_polariton_generator,
    build_simple_generator,
    build_transition_table,
)
from .polariton import SystemParams, build_polariton_basis, pulse_matrix
from .propagator import IntegratorConfig
from .pulses import Observables, Trajectory, evolve_pulsed, uniform_schedule

APPROACHES = ("polariton", "simple")
INITIAL_STATES = ("thermal-thermal", "thermal-ground")

SCENARIOS = ("fig1a", "fig1b", "fig2", "fig3a", "fig3b")

CSV_HEADER = "t_omega_m,n_osc,tls_excited,trace_err,min_eig,purity"

PULSE_SPACING_NOTE = "uniform interior: t_j = j*horizon/(n_pulses+1)"
TENSOR_ORDERING_NOTE = "Fock-major product index 2*n + s (s=0 down, s=1 up)"

#: detuning entering the cavity rate denominators, in omega_m units, used by
#: the figure presets.  The drive detuning in the captions is -1; the rate
#: detuning is calibrated against the published end values (see README).
PRESET_DELTA_B = -0.98

#: initial state used by the figure presets: resonator thermal, TLS ground.
PRESET_INITIAL_STATE = "thermal-ground"

FIG1_PULSES = (0, 9, 19, 49, 99)
FIG2_OMEGA_Z = (0.6, 0.8, 0.95)
FIG2_PULSES = (0, 99, 199)
FIG3_GAMMA_TAU = (1e-6, 3e-6, 1e-5, 1e-4, 3e-4, 1e-3)
FIG3_PULSES = (0, 99)


def theta_from_temperature(omega_m_hz: float, temperature_k: float,
                           angular: bool = True) -> float:
    """Dimensionless hbar*omega_m / (k_B T) from a frequency in Hz.

    With angular=True the quoted frequency is read as omega_m = 2*pi*f
    (equivalently theta = h f / k_B T); with angular=False the number is
    taken to be omega_m in rad/s directly.
    """
    if omega_m_hz <= 0 or temperature_k <= 0:
        raise ValueError("frequency and temperature must be positive")
    omega = 2.0 * np.pi * omega_m_hz if angular else omega_m_hz
    return scipy.constants.hbar * omega / (scipy.constants.k * temperature_k)


#: theta for the published parameter set (200 MHz, 0.1 K, angular convention)
THETA_DEFAULT = theta_from_temperature(200e6, 0.1, angular=True)


@dataclass(frozen=True)
class RunConfig:
    """One fully-specified simulation run (seed-free, deterministic)."""

    params: SystemParams
    nmax: int = 80
    n_pulses: int = 0
    horizon: float = 200.0
    approach: str = "polariton"
    integrator: IntegratorConfig = IntegratorConfig()
    initial_state: str = "thermal-thermal"
    sample_every: float = 1.0

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if self.n_pulses < 0:
            raise ValueError(f"n_pulses must be >= 0, got {self.n_pulses}")
        if self.approach not in APPROACHES:
            raise ValueError(f"approach must be one of {APPROACHES}")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}")
        if not (0 < self.sample_every <= self.horizon):
            raise ValueError("sample_every must lie in (0, horizon]")
        SpaceDims(self.nmax)  # validates nmax


# --- config files -----------------------------------------------------------

_PARAM_KEYS = {
    "omega_z": float, "lambda_c": float, "g_c": float, "kappa": float,
    "gamma_m": float, "gamma_tau": float, "delta_l": float, "delta_b": float,
    "theta": float,
}
_TEMP_KEYS = {"omega_m_hz": float, "temperature_k": float, "angular": bool}
_RUN_KEYS = {
    "nmax": int, "n_pulses": int, "horizon": float, "approach": str,
    "initial_state": str, "sample_every": float,
}
_INTEGRATOR_KEYS = {
    "method": str, "dt": float, "rel_tol": float, "abs_tol": float,
    "guard_interval": int, "interaction_picture": bool,
}
_ALL_KEYS = {**_PARAM_KEYS, **_TEMP_KEYS, **_RUN_KEYS, **_INTEGRATOR_KEYS}


def _parse_value(key: str, raw: str):
    kind = _ALL_KEYS[key]
    raw = raw.strip()
    try:
        if kind is bool:
            lowered = raw.lower()
            if lowered in ("true", "on", "yes", "1"):
                return True
            if lowered in ("false", "off", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return kind(raw)
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: {exc}") from None


def load_config(path, angular_override: bool | None = None) -> RunConfig:
    """Parse a flat `key = value` config file into a validated RunConfig.

    Temperature is given either as `theta` directly or as the pair
    (`omega_m_hz`, `temperature_k`) with an optional `angular` flag.
    Unknown keys are rejected with the offending key named.
    """
    path = Path(path)
    values: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate config key {key!r}")
        values[key] = _parse_value(key, raw)

    has_theta = "theta" in values
    has_temp = "omega_m_hz" in values or "temperature_k" in values
    if has_theta and has_temp:
        raise ValueError("give either 'theta' or (omega_m_hz, temperature_k), not both")
    if not has_theta:
        if not ("omega_m_hz" in values and "temperature_k" in values):
            raise ValueError(
                "temperature underspecified: need 'theta' or both "
                "'omega_m_hz' and 'temperature_k'"
            )
        angular = values.pop("angular", True)
        if angular_override is not None:
            angular = angular_override
        values["theta"] = theta_from_temperature(
            values.pop("omega_m_hz"), values.pop("temperature_k"), angular=angular
        )
    elif "angular" in values:
        raise ValueError("'angular' is only meaningful together with omega_m_hz")

    missing = [k for k in ("omega_z", "lambda_c", "g_c", "kappa", "gamma_m",
                           "gamma_tau", "delta_l") if k not in values]
    if missing:
        raise ValueError(f"missing required config keys: {missing}")

    params = SystemParams(**{k: values.pop(k) for k in list(_PARAM_KEYS)
                             if k in values})
    integrator = IntegratorConfig(**{k: values.pop(k) for k in list(_INTEGRATOR_KEYS)
                                     if k in values})
    return RunConfig(params=params, integrator=integrator, **values)


# --- single runs ------------------------------------------------------------

def _initial_state(cfg: RunConfig, space: SpaceDims):
    n_th = bose_occupation(1.0, cfg.params.theta)
    if cfg.initial_state == "thermal-thermal":
        tls = tls_thermal_factor(cfg.params.omega_z, cfg.params.theta)
    else:
        tls = np.diag([1.0, 0.0])
    return thermal_resonator_state(space, n_th, tls)


def _metadata(cfg: RunConfig, scenario: str | None, label: str | None) -> dict:
    p = cfg.params
    return {
        "package_version": __version__,
        "scenario": scenario or "",
        "run_label": label or "run",
        "approach": cfg.approach,
        "omega_z": p.omega_z, "lambda_c": p.lambda_c, "g_c": p.g_c,
        "kappa": p.kappa, "gamma_m": p.gamma_m, "gamma_tau": p.gamma_tau,
        "delta_l": p.delta_l, "delta_b_resolved": p.resolved_delta_b(),
        "theta": p.theta,
        "nmax": cfg.nmax, "n_pulses": cfg.n_pulses, "horizon": cfg.horizon,
        "sample_every": cfg.sample_every, "initial_state": cfg.initial_state,
        "integrator_method": cfg.integrator.method, "dt": cfg.integrator.dt,
        "interaction_picture": cfg.integrator.interaction_picture,
        "guard_interval": cfg.integrator.guard_interval,
        "pulse_spacing": PULSE_SPACING_NOTE,
        "tensor_ordering": TENSOR_ORDERING_NOTE,
    }


def execute_run(cfg: RunConfig, scenario: str | None = None,
                label: str | None = None) -> Trajectory:
    """Run one pulsed simulation and return its trajectory."""
    space = SpaceDims(cfg.nmax)
    rho0 = _initial_state(cfg, space)
    n_op = number_operator(space).matrix
    p_up = tls_excited_projector(space).matrix
    p_top = top_level_projector(space).matrix

    if cfg.approach == "polariton":
        basis = build_polariton_basis(cfg.params, space)
        table = build_transition_table(basis, cfg.params)
        gen = build_polariton_generator(basis, table, cfg.params)
        pulse_op = pulse_matrix(basis)
        observables = Observables(
            n_osc=basis.to_polariton(n_op),
            tls_excited=basis.to_polariton(p_up),
            top_level=basis.to_polariton(p_top),
        )
        rho0 = DensityMatrix(basis.to_polariton(rho0.matrix), space, validate=False)
    else:
        gen = build_simple_generator(cfg.params, space)
        pulse_op = build_tls_ops(space)[2]
        observables = Observables(n_osc=n_op, tls_excited=p_up, top_level=p_top)

    schedule = uniform_schedule(cfg.n_pulses, cfg.horizon)
    n_samples = int(round(cfg.horizon / cfg.sample_every))
    sample_times = [j * cfg.sample_every for j in range(n_samples + 1)]
    return evolve_pulsed(
        rho0, gen, pulse_op, schedule, sample_times, cfg.integrator,
        observables, metadata=_metadata(cfg, scenario, label),
    )


# --- scenario presets -------------------------------------------------------

def _preset_params(omega_z: float = 0.9, gamma_tau: float = 2.5e-4) -> SystemParams:
    return SystemParams(
        omega_z=omega_z, lambda_c=0.05, g_c=0.05, kappa=0.15,
        gamma_m=1e-6, gamma_tau=gamma_tau, delta_l=-1.0,
        theta=THETA_DEFAULT, delta_b=PRESET_DELTA_B,
    )


def preset_config(scenario: str) -> RunConfig:
    """Base RunConfig for a scenario (before its grid is applied)."""
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    approach = "simple" if scenario == "fig1b" else "polariton"
    return RunConfig(
        params=_preset_params(),
        approach=approach,
        initial_state=PRESET_INITIAL_STATE,
    )


def _fmt(value: float) -> str:
    return f"{value:g}"


def scenario_runs(scenario: str, base: RunConfig | None = None,
                  pulses=None, omega_z_values=None, gamma_tau_values=None):
    """(label, RunConfig) pairs for a scenario grid, with optional overrides."""
    cfg = base if base is not None else preset_config(scenario)
    if scenario in ("fig1a", "fig1b"):
        approach = "simple" if scenario == "fig1b" else "polariton"
        cfg = replace(cfg, approach=approach)
        grid_pulses = tuple(pulses) if pulses is not None else FIG1_PULSES
        return [(f"N{n}", replace(cfg, n_pulses=n)) for n in grid_pulses]
    if scenario == "fig2":
        grid_pulses = tuple(pulses) if pulses is not None else FIG2_PULSES
        omegas = tuple(omega_z_values) if omega_z_values is not None else FIG2_OMEGA_Z
        return [
            (f"wz{_fmt(wz)}_N{n}",
             replace(cfg, params=replace(cfg.params, omega_z=wz), n_pulses=n))
            for wz in omegas for n in grid_pulses
        ]
    # fig3a / fig3b
    omega_z = 0.95 if scenario == "fig3a" else 0.60
    grid_pulses = tuple(pulses) if pulses is not None else FIG3_PULSES
    gammas = tuple(gamma_tau_values) if gamma_tau_values is not None else FIG3_GAMMA_TAU
    return [
        (f"gt{_fmt(gt)}_N{n}",
         replace(cfg, params=replace(cfg.params, omega_z=omega_z, gamma_tau=gt),
                 n_pulses=n))
        for gt in gammas for n in grid_pulses
    ]


def _run_labeled(args) -> tuple[str, Trajectory]:
    scenario, label, cfg = args
    return label, execute_run(cfg, scenario=scenario, label=label)


def run_scenario(scenario: str, base: RunConfig | None = None, jobs: int = 1,
                 **grid_overrides) -> list[Trajectory]:
    """Run a full scenario grid; returns trajectories in grid order."""
    runs = scenario_runs(scenario, base=base, **grid_overrides)
    work = [(scenario, label, cfg) for label, cfg in runs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_run_labeled, work))
    else:
        results = dict(map(_run_labeled, work))
    return [results[label] for label, _ in runs]


# --- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    """One summary row of a parameter sweep."""

    coords: tuple
    end_n_osc: float | None
    quality_ok: bool
    error: str = ""


_SWEEP_PARAM_FIELDS = frozenset(
    f for f in SystemParams.__dataclass_fields__)
_SWEEP_RUN_FIELDS = frozenset(("nmax", "n_pulses", "horizon", "approach",
                               "initial_state", "sample_every"))


def _apply_point(base: RunConfig, names, point) -> RunConfig:
    cfg = base
    for name, value in zip(names, point):
        if name in _SWEEP_PARAM_FIELDS:
            cfg = replace(cfg, params=replace(cfg.params, **{name: value}))
        elif name in _SWEEP_RUN_FIELDS:
            cfg = replace(cfg, **{name: value})
        else:
            raise ValueError(f"unknown sweep axis {name!r}")
    return cfg


def _sweep_one(args) -> SweepRow:
    base, names, point = args
    try:
        traj = execute_run(_apply_point(base, names, point))
        return SweepRow(coords=point, end_n_osc=traj.end_value,
                        quality_ok=traj.quality_ok)
    except Exception as exc:  # individual failures must not abort the sweep
        return SweepRow(coords=point, end_n_osc=None, quality_ok=False,
                        error=f"{type(exc).__name__}: {exc}")


def sweep(grid: dict, base: RunConfig, jobs: int = 1) -> list[SweepRow]:
    """Cartesian-product sweep over RunConfig / SystemParams axes.

    Returns one row per unique grid point, sorted by coordinates; duplicate
    points are deduplicated with a warning and per-run failures are recorded
    in their row instead of aborting the sweep.
    """
    if not grid:
        raise ValueError("sweep grid must not be empty")
    names = sorted(grid)
    points = list(itertools.product(*(grid[k] for k in names)))
    unique = sorted(set(points))
    if len(unique) != len(points):
        warnings.warn("duplicate sweep grid points were deduplicated", stacklevel=2)
    work = [(base, tuple(names), p) for p in unique]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, work))
    else:
        rows = list(map(_sweep_one, work))
    return sorted(rows, key=lambda r: r.coords)


# --- emission ---------------------------------------------------------------

def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _metadata_lines(meta: dict) -> list[str]:
    return [f"# {key} = {_format(meta[key])}" for key in sorted(meta)]


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    meta = dict(traj.metadata)
    meta.update(traj.quality)
    lines = _metadata_lines(meta)
    lines.append(CSV_HEADER)
    for i in range(traj.times.size):
        lines.append(",".join(_format(float(col[i])) for col in (
            traj.times, traj.n_osc, traj.tls_excited, traj.trace_err,
            traj.min_eig, traj.purity)))
    path.write_text("\n".join(lines) + "\n")


def emit(trajectories, out_dir, scenario: str | None = None) -> list[Path]:
    """Write one CSV per trajectory, a summary CSV, and a plot-data CSV.

    Re-running the same scenario produces byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = scenario or "run"
    written = []

    for traj in trajectories:
        path = out / f"{prefix}_{traj.metadata.get('run_label', 'run')}.csv"
        write_trajectory_csv(traj, path)
        written.append(path)

    summary = out / f"{prefix}_summary.csv"
    lines = [f"# scenario = {prefix}", f"# package_version = {__version__}",
             "run_label,end_n_osc,top_pop_max,trace_err_max,min_eig_min,quality_ok"]
    for traj in trajectories:
        q = traj.quality
        lines.append(",".join([
            str(traj.metadata.get("run_label", "run")),
            _format(traj.end_value), _format(q["top_pop_max"]),
            _format(q["trace_err_max"]), _format(q["min_eig_min"]),
            _format(q["quality_ok"]),
        ]))
    summary.write_text("\n".join(lines) + "\n")
    written.append(summary)

    plot = out / f"{prefix}_plot.csv"
    labels = [t.metadata.get("run_label", f"run{i}") for i, t in enumerate(trajectories)]
    header = "t_omega_m," + ",".join(f"n_osc_{lbl}" for lbl in labels)
    lines = [f"# scenario = {prefix}", header]
    times = trajectories[0].times
    for t in trajectories[1:]:
        if t.times.shape != times.shape or not np.array_equal(t.times, times):
            raise ValueError("trajectories in one scenario must share a time grid")
    for i in range(times.size):
        row = [_format(float(times[i]))]
        row += [_format(float(t.n_osc[i])) for t in trajectories]
        lines.append(",".join(row))
    plot.write_text("\n".join(lines) + "\n")
    written.append(plot)
    return written
