"""Time integration of dRho/dt = G rho with validity guards.

The default path is fixed-step RK4 in the interaction picture of the
generator's Hamiltonian.  The generator is compiled once per (generator,
frame): the Hamiltonian is diagonalized (it already is diagonal for the
dressed-basis generator), matrix-unit jump operators are aggregated into a
classical feed matrix plus an elementwise damping matrix, and any remaining
jump operators act through sparse products with analytic phase dressing in
the rotating frame.  The rotating-frame transformation is exact, not an
approximation: each jump operator picks up pure phase factors.

Guards re-check trace, Hermiticity and positivity of the evolving state every
``guard_interval`` steps and abort with a step report on violation.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.integrate
import scipy.sparse as sp

from .core import DensityMatrix, hermiticity_residue, min_eigenvalue, trace_error
from .dissipation import Generator

# propagator guard thresholds (looser than DensityMatrix construction)
GUARD_TRACE = 1e-7
GUARD_HERM = 1e-7
GUARD_EIG = -1e-6

# step-rule ceilings: dt * (fastest retained frequency) and dt * (max decay)
STEP_FREQ_LIMIT = 0.1
STEP_RATE_LIMIT = 2.5

_DIAG_TOL = 1e-12


class ConfigError(ValueError):
    """Integrator configuration rejected at validation."""


class PropagationError(RuntimeError):
    """A validity guard tripped during integration."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    method "rk4" is the hand-rolled fixed-step classic Runge-Kutta;
    "adaptive" delegates to scipy's embedded DOP853 pair with (rel_tol,
    abs_tol) and checks guards at segment ends only.  guard_interval is the
    number of fixed steps between validity checks.
    """

    method: str = "rk4"
    dt: float = 0.02
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    guard_interval: int = 200
    interaction_picture: bool = True

    def __post_init__(self):
        if self.method not in ("rk4", "adaptive"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ConfigError("tolerances must be > 0")
        if self.guard_interval < 1:
            raise ConfigError("guard_interval must be >= 1")


@dataclass(frozen=True, eq=False)
class _GeneralOp:
    op: sp.csr_array = field(repr=False)      # working-frame jump operator
    data0: np.ndarray = field(repr=False)     # pristine csr data
    phase_freq: np.ndarray = field(repr=False)  # e[row] - e[col] per nnz entry
    rate: float = 0.0


class _CompiledGenerator:
    """Working-frame (Hamiltonian eigenbasis) form of a generator."""

    def __init__(self, gen: Generator):
        dim = gen.space.dim
        h = gen.hamiltonian
        offdiag = h - np.diag(np.diag(h))
        if np.max(np.abs(offdiag)) <= _DIAG_TOL:
            self.energies = np.diag(h).real.copy()
            self.eigvecs = None
        else:
            self.energies, self.eigvecs = np.linalg.eigh(h)

        self.dim = dim
        self.bohr = self.energies[:, None] - self.energies[None, :]

        feed = np.zeros((dim, dim))
        out_rates = np.zeros(dim)
        general: list[_GeneralOp] = []
        for op, rate in gen.dissipators:
            if rate == 0.0:
                continue
            mat = op.toarray() if sp.issparse(op) else np.asarray(op)
            if self.eigvecs is not None:
                mat = self.eigvecs.conj().T @ mat @ self.eigvecs
            s = sp.csr_array(np.where(np.abs(mat) > 1e-15, mat, 0.0))
            if s.nnz == 1:
                coo = s.tocoo()
                i, j = int(coo.row[0]), int(coo.col[0])
                weight = rate * abs(coo.data[0]) ** 2
                feed[i, j] += weight
                out_rates[j] += weight
            else:
                coo = s.tocoo()
                general.append(_GeneralOp(
                    op=s, data0=coo.data.copy(),
                    phase_freq=self.energies[coo.row] - self.energies[coo.col],
                    rate=rate,
                ))

        self.has_units = bool(out_rates.any())
        self.feed = feed
        self.damp = 0.5 * (out_rates[:, None] + out_rates[None, :])
        self.general = tuple(general)

        decay = sp.csr_array((dim, dim), dtype=complex)
        for g in general:
            decay = decay + g.rate * (g.op.conj().T @ g.op)
        decay = decay.tocsr()
        coo = decay.tocoo()
        self.decay = decay
        self.decay_data0 = coo.data.copy()
        self.decay_freq = self.energies[coo.row] - self.energies[coo.col]

        total_decay = out_rates + np.real(decay.diagonal())
        self.max_decay = float(total_decay.max()) if dim else 0.0
        support_freq = 0.0
        for g in general:
            if g.phase_freq.size:
                support_freq = max(support_freq, float(np.max(np.abs(g.phase_freq))))
        self.ip_freq = 2.0 * support_freq
        self.lab_freq = float(np.max(np.abs(self.bohr)))

    def to_working(self, rho: np.ndarray) -> np.ndarray:
        if self.eigvecs is None:
            return rho.astype(complex, copy=True)
        return self.eigvecs.conj().T @ rho @ self.eigvecs

    def from_working(self, rho: np.ndarray) -> np.ndarray:
        if self.eigvecs is None:
            return rho
        return self.eigvecs @ rho @ self.eigvecs.conj().T

    def make_rhs(self, interaction_picture: bool):
        """Return rhs(t, rho) in the working frame; t is segment-local."""
        feed, damp, bohr = self.feed, self.damp, self.bohr
        has_units = self.has_units
        # per-call copies: the dressed csr data is mutated in place
        general = [
            (_GeneralOp(op=g.op.copy(), data0=g.data0, phase_freq=g.phase_freq,
                        rate=g.rate))
            for g in self.general
        ]
        decay = self.decay.copy()
        decay_data0, decay_freq = self.decay_data0, self.decay_freq
        has_general = bool(general)

        def rhs(t: float, rho: np.ndarray) -> np.ndarray:
            if has_units:
                out = -damp * rho
                d = out.diagonal().copy()
                d += feed @ rho.diagonal()
                np.fill_diagonal(out, d)
            else:
                out = np.zeros_like(rho)
            if has_general:
                for g in general:
                    if interaction_picture:
                        g.op.data = g.data0 * np.exp(1j * g.phase_freq * t)
                    a = g.op @ rho
                    out += g.rate * (g.op @ a.conj().T).conj().T
                if interaction_picture:
                    decay.data = decay_data0 * np.exp(1j * decay_freq * t)
                out -= 0.5 * (decay @ rho + (decay @ rho.conj().T).conj().T)
            if not interaction_picture:
                out += -1j * bohr * rho
            return out

        return rhs


_compiled_cache: "weakref.WeakKeyDictionary[Generator, _CompiledGenerator]" = (
    weakref.WeakKeyDictionary()
)


def compile_generator(gen: Generator) -> _CompiledGenerator:
    comp = _compiled_cache.get(gen)
    if comp is None:
        comp = _CompiledGenerator(gen)
        _compiled_cache[gen] = comp
    return comp


def validate_step(cfg: IntegratorConfig, gen: Generator) -> None:
    """Enforce the step-size rules against the generator's scales.

    In the lab frame the fastest retained frequency is the full spectral
    spread of H (coherences oscillate at up to ~nmax * omega_m); in the
    interaction picture only the phase dressing of non-elementary jump
    operators oscillates.  The decay-rate ceiling keeps RK4 inside its real
    -axis stability region with margin.
    """
    if cfg.method != "rk4":
        return
    comp = compile_generator(gen)
    freq = comp.ip_freq if cfg.interaction_picture else comp.lab_freq
    slack = 1.0 + 1e-9  # tolerate float noise at exact rule boundaries
    if cfg.dt * freq > STEP_FREQ_LIMIT * slack:
        raise ConfigError(
            f"dt={cfg.dt} too large: dt * (fastest frequency {freq:.3g}) = "
            f"{cfg.dt * freq:.3g} > {STEP_FREQ_LIMIT}"
        )
    if cfg.dt * comp.max_decay > STEP_RATE_LIMIT * slack:
        raise ConfigError(
            f"dt={cfg.dt} too large: dt * (max decay rate {comp.max_decay:.3g})"
            f" = {cfg.dt * comp.max_decay:.3g} > {STEP_RATE_LIMIT}"
        )


def _check_guards(rho: np.ndarray, step: int, t: float) -> None:
    terr = trace_error(rho)
    herr = hermiticity_residue(rho)
    if terr > GUARD_TRACE or herr > GUARD_HERM:
        raise PropagationError(
            f"guard tripped at step {step} (t={t:.6g}): trace error {terr:.3e},"
            f" Hermiticity residue {herr:.3e}"
        )
    lmin = min_eigenvalue(rho)
    if lmin < GUARD_EIG:
        raise PropagationError(
            f"guard tripped at step {step} (t={t:.6g}): min eigenvalue "
            f"{lmin:.3e} < {GUARD_EIG:.1e}"
        )


def _split_steps(duration: float, dt: float) -> tuple[int, float]:
    nfull = int(math.floor(duration / dt + 1e-9))
    rem = duration - nfull * dt
    if rem <= 1e-12 * max(1.0, duration):
        rem = 0.0
    return nfull, rem


def _integrate_rk4(rho, rhs, duration, cfg: IntegratorConfig):
    nfull, rem = _split_steps(duration, cfg.dt)
    t = 0.0
    step = 0
    for i in range(nfull + (1 if rem else 0)):
        h = cfg.dt if i < nfull else rem
        k1 = rhs(t, rho)
        k2 = rhs(t + 0.5 * h, rho + (0.5 * h) * k1)
        k3 = rhs(t + 0.5 * h, rho + (0.5 * h) * k2)
        k4 = rhs(t + h, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        step += 1
        if step % cfg.guard_interval == 0:
            _check_guards(rho, step, t)
    return rho


def _integrate_adaptive(rho, rhs, duration, cfg: IntegratorConfig):
    dim = rho.shape[0]

    def fun(t, y):
        return rhs(t, y.reshape(dim, dim)).reshape(-1)

    sol = scipy.integrate.solve_ivp(
        fun, (0.0, duration), rho.reshape(-1).astype(complex),
        method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol,
    )
    if not sol.success:
        raise PropagationError(f"adaptive integrator failed: {sol.message}")
    return sol.y[:, -1].reshape(dim, dim)


def propagate_matrix(rho: np.ndarray, gen: Generator, duration: float,
                     cfg: IntegratorConfig) -> np.ndarray:
    """Evolve a raw matrix for `duration` (units 1/omega_m); lab frame in and
    out, in the generator's own basis."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    if duration == 0:
        return rho.astype(complex, copy=True)
    validate_step(cfg, gen)
    comp = compile_generator(gen)
    work = comp.to_working(np.asarray(rho, dtype=complex))
    rhs = comp.make_rhs(cfg.interaction_picture)
    if cfg.method == "rk4":
        work = _integrate_rk4(work, rhs, duration, cfg)
    else:
        work = _integrate_adaptive(work, rhs, duration, cfg)
    if cfg.interaction_picture:
        work = np.exp(-1j * comp.bohr * duration) * work
    _check_guards(work, -1, duration)
    return comp.from_working(work)


def propagate(rho: DensityMatrix, gen: Generator, duration: float,
              cfg: IntegratorConfig) -> DensityMatrix:
    """Evolve a state under the generator; guards per IntegratorConfig."""
    if rho.space.dim != gen.space.dim:
        raise ValueError("state and generator dimensions do not match")
    if duration == 0:
        return rho
    out = propagate_matrix(rho.matrix, gen, duration, cfg)
    return DensityMatrix(out, rho.space, validate=False)


@dataclass(frozen=True)
class ConvergenceReport:
    """Step-size sweep summary: end values per dt, observed convergence
    orders between successive halvings, and the coarsest converged dt."""

    dts: tuple[float, ...]
    values: tuple[float, ...]
    observed_orders: tuple[float, ...]
    converged_dt: float | None
    tolerance: float

    def __str__(self):
        rows = "\n".join(
            f"  dt={dt:<10.6g} value={v:.10f}" for dt, v in zip(self.dts, self.values)
        )
        orders = ", ".join(f"{o:.2f}" for o in self.observed_orders) or "n/a"
        return (f"convergence sweep (tol {self.tolerance:g}):\n{rows}\n"
                f"  observed orders: {orders}\n  converged dt: {self.converged_dt}")


def convergence_sweep(run, dt_list, tolerance: float = 1e-4) -> ConvergenceReport:
    """Run `run(dt) -> end value` over dt_list (sorted descending internally).

    The observed order is meaningful when dt_list forms successive halvings;
    `converged_dt` is the coarsest dt whose next refinement changes the end
    value by less than `tolerance`.
    """
    dts = sorted(set(float(dt) for dt in dt_list), reverse=True)
    if len(dts) < 2:
        raise ValueError("convergence_sweep needs at least two distinct dt values")
    values = [float(run(dt)) for dt in dts]
    diffs = [abs(a - b) for a, b in zip(values, values[1:])]
    orders = []
    for d1, d2 in zip(diffs, diffs[1:]):
        if d2 > 0 and d1 > 0:
            orders.append(math.log2(d1 / d2))
    converged = None
    for dt, d in zip(dts, diffs):
        if d < tolerance:
            converged = dt
            break
    return ConvergenceReport(
        dts=tuple(dts), values=tuple(values),
        observed_orders=tuple(orders), converged_dt=converged,
        tolerance=tolerance,
    )
