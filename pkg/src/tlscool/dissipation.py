"""Lindblad generators: dressed-basis master equation and the bare baseline.

Rate bookkeeping uses the doubled dissipator convention

    L(o) rho = 2 o rho o' - rho o'o - o'o rho

with prefactor Gamma/2, so a dissipator entry (o, gamma) contributes
gamma * (o rho o' - {o'o, rho}/2), i.e. gamma is the plain decay rate.

Per transition T = |n,alpha> -> |n-1,beta| with frequency w_T the channel
rates are

    down(T) = Gamma0_T (nbar_T + 1) + |A_T|^2 Gamma_minus(w_T)
    up(T)   = Gamma0_T nbar_T       + |A_T|^2 Gamma_plus(w_T)

with Gamma0_T = |A_T|^2 gamma_m + |sigma_T|^2 gamma_tau, the Bose factor
nbar_T at w_T, and cavity-induced rates

    Gamma_-/+ (w) = g^2 kappa / (kappa^2/4 + (w +/- delta_b)^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import DimensionError, SpaceDims, build_ladder, build_tls_ops
from .polariton import (
    PolaritonBasis,
    SystemParams,
    TransitionAmplitude,
    jc_hamiltonian,
    transition_coefficients,
)

POLARITON = "polariton"
BARE_PRODUCT = "bare-product"

#: transitions with |omega| below this are treated as zero-frequency:
#: the thermal dissipator is dropped and only the cavity channel kept
OMEGA_EPS = 1e-9


def bose_occupation(omega: float, theta: float) -> float:
    """Bose-Einstein occupation 1 / (exp(omega * theta) - 1), omega > 0.

    Evaluated as exp(-x) / (1 - exp(-x)), which neither overflows for large
    x = omega * theta nor loses precision for small x.
    """
    if omega <= 0:
        raise ValueError(f"bose_occupation requires omega > 0, got {omega}")
    if theta <= 0:
        raise ValueError(f"bose_occupation requires theta > 0, got {theta}")
    x = omega * theta
    return float(np.exp(-x) / -np.expm1(-x))


def cavity_rates(omega: float, params: SystemParams) -> tuple[float, float]:
    """Cavity-mediated (Gamma_minus, Gamma_plus) at transition frequency omega."""
    g2k = params.g_c**2 * params.kappa
    quarter = params.kappa**2 / 4.0
    db = params.resolved_delta_b()
    return (
        g2k / (quarter + (omega + db) ** 2),
        g2k / (quarter + (omega - db) ** 2),
    )


@dataclass(frozen=True)
class TransitionRecord:
    """Fully rated transition channel.

    rate_down multiplies the lowering jump |lower><upper|, rate_up the raising
    one.  For omega < 0 the emission/absorption roles are swapped (the Bose
    factor uses |omega|) so every stored rate stays nonnegative; n_th is None
    when the thermal dissipator is dropped (|omega| ~ 0).
    """

    n: int
    alpha: str
    beta: str
    upper: int
    lower: int
    omega: float
    a_coeff: float
    sigma_coeff: float
    n_th: float | None
    gamma0: float
    gamma_minus: float
    gamma_plus: float
    rate_down: float
    rate_up: float


@dataclass(frozen=True, eq=False)
class TransitionTable:
    records: tuple[TransitionRecord, ...]
    basis: PolaritonBasis = field(repr=False)
    params: SystemParams


def _rate_transition(amp: TransitionAmplitude, params: SystemParams) -> TransitionRecord:
    a2 = amp.a_coeff**2
    s2 = amp.sigma_coeff**2
    gamma0 = a2 * params.gamma_m + s2 * params.gamma_tau
    omega = amp.omega
    if abs(omega) <= OMEGA_EPS:
        g_minus, g_plus = cavity_rates(omega, params)
        n_th = None
        rate_down = a2 * g_minus
        rate_up = a2 * g_plus
    elif omega > 0:
        g_minus, g_plus = cavity_rates(omega, params)
        n_th = bose_occupation(omega, params.theta)
        rate_down = gamma0 * (n_th + 1.0) + a2 * g_minus
        rate_up = gamma0 * n_th + a2 * g_plus
    else:
        # inverted transition: |upper> lies below |lower>; relabel emission
        # and absorption so the raising operator carries the (nbar+1) weight
        g_minus, g_plus = cavity_rates(-omega, params)
        n_th = bose_occupation(-omega, params.theta)
        rate_up = gamma0 * (n_th + 1.0) + a2 * g_minus
        rate_down = gamma0 * n_th + a2 * g_plus
    return TransitionRecord(
        n=amp.n, alpha=amp.alpha, beta=amp.beta, upper=amp.upper, lower=amp.lower,
        omega=omega, a_coeff=amp.a_coeff, sigma_coeff=amp.sigma_coeff,
        n_th=n_th, gamma0=gamma0, gamma_minus=g_minus, gamma_plus=g_plus,
        rate_down=rate_down, rate_up=rate_up,
    )


def build_transition_table(basis: PolaritonBasis, params: SystemParams) -> TransitionTable:
    records = tuple(
        _rate_transition(amp, params) for amp in transition_coefficients(basis)
    )
    assert all(r.rate_down >= 0 and r.rate_up >= 0 for r in records)
    return TransitionTable(records=records, basis=basis, params=params)


@dataclass(frozen=True, eq=False)
class Generator:
    """Lindblad generator: dRho/dt = -i[H, rho] + sum_k gamma_k D[o_k] rho.

    Jump operators are stored sparse; rates are the plain decay rates (see
    module docstring for the relation to the doubled-dissipator convention).
    """

    basis_tag: str
    hamiltonian: np.ndarray
    dissipators: tuple[tuple[sp.csr_array, float], ...]
    space: SpaceDims

    def __post_init__(self):
        dim = self.space.dim
        if self.hamiltonian.shape != (dim, dim):
            raise DimensionError("Hamiltonian dimension mismatch")
        if np.max(np.abs(self.hamiltonian - self.hamiltonian.conj().T)) > 1e-12:
            raise ValueError("Hamiltonian must be Hermitian")
        for op, rate in self.dissipators:
            if op.shape != (dim, dim):
                raise DimensionError("jump operator dimension mismatch")
            if rate < 0:
                raise ValueError(f"dissipator rate must be >= 0, got {rate}")
        self.hamiltonian.setflags(write=False)
        ktot = sp.csr_array((dim, dim), dtype=complex)
        for op, rate in self.dissipators:
            ktot = ktot + rate * (op.conj().T @ op)
        object.__setattr__(self, "_decay", ktot.tocsr())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Dense reference action of the generator on a matrix (any matrix;
        the action is linear, not restricted to valid states)."""
        h = self.hamiltonian
        out = (-1j * (h @ rho - rho @ h)).astype(complex)
        for op, rate in self.dissipators:
            if rate == 0.0:
                continue
            o_rho = op @ rho
            out += rate * (op @ o_rho.conj().T).conj().T
        k_rho = self._decay @ rho
        rho_k = (self._decay @ rho.conj().T).conj().T
        out -= 0.5 * (k_rho + rho_k)
        return out


def _matrix_unit(i: int, j: int, dim: int) -> sp.csr_array:
    return sp.csr_array(
        (np.array([1.0 + 0.0j]), (np.array([i]), np.array([j]))), shape=(dim, dim)
    )


def build_polariton_generator(basis: PolaritonBasis, table: TransitionTable,
                              params: SystemParams) -> Generator:
    """Dressed-basis generator: diagonal Hamiltonian plus one lowering and one
    raising dissipator per transition channel."""
    if table.basis is not basis:
        raise ValueError("transition table was built from a different basis")
    dim = basis.space.dim
    dissipators = []
    for rec in table.records:
        if rec.rate_down > 0:
            dissipators.append((_matrix_unit(rec.lower, rec.upper, dim), rec.rate_down))
        if rec.rate_up > 0:
            dissipators.append((_matrix_unit(rec.upper, rec.lower, dim), rec.rate_up))
    return Generator(
        basis_tag=POLARITON,
        hamiltonian=np.diag(basis.energies.astype(complex)),
        dissipators=tuple(dissipators),
        space=basis.space,
    )


def build_simple_generator(params: SystemParams, space: SpaceDims) -> Generator:
    """Baseline generator in the bare product basis.

    Thermal baths act directly on b and sigma_- at the bare frequencies
    (n_m at omega_m, n_z at omega_z) and the cavity channel cools the bare
    resonator mode with rates evaluated at omega = omega_m.
    """
    b = sp.csr_array(build_ladder(space).matrix)
    sm = sp.csr_array(build_tls_ops(space)[0].matrix)
    n_m = bose_occupation(1.0, params.theta)
    n_z = bose_occupation(params.omega_z, params.theta)
    g_minus, g_plus = cavity_rates(1.0, params)
    dissipators = []
    for op, rate in (
        (b, params.gamma_m * (n_m + 1.0) + g_minus),
        (b.conj().T.tocsr(), params.gamma_m * n_m + g_plus),
        (sm, params.gamma_tau * (n_z + 1.0)),
        (sm.conj().T.tocsr(), params.gamma_tau * n_z),
    ):
        if rate > 0:
            dissipators.append((sp.csr_array(op), rate))
    return Generator(
        basis_tag=BARE_PRODUCT,
        hamiltonian=jc_hamiltonian(params, space).matrix.copy(),
        dissipators=tuple(dissipators),
        space=space,
    )
