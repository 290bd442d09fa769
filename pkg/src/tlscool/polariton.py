"""Polariton doublet basis of the resonator-TLS ladder.

The coupled Hamiltonian (units of the resonator frequency)

    H = b'b + (omega_z / 2) sigma_z + lambda (sigma_+ b + b' sigma_-)

conserves total excitation number, so it splits into the singlet ground state
|0,down>, one 2x2 block per excitation manifold n >= 1 spanned by
{|n,down>, |n-1,up>}, and (in the truncated space) the orphan top state
|nmax,up> whose doublet partner is cut off.  Each 2x2 block is diagonalized
in closed form; the dressed states are

    |n,+> = cos(d_n/2) |n,down> + sin(d_n/2) |n-1,up>
    |n,-> = sin(d_n/2) |n,down> - cos(d_n/2) |n-1,up>

with cos(d_n/2) = sqrt((w_n + dw) / (2 w_n)), dw = 1 - omega_z and
w_n = sqrt(dw^2 + 4 lambda^2 n).  Energies are (n - 1/2) +/- w_n / 2; the
ground state sits at -omega_z/2 and the orphan at nmax + omega_z/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DimensionError,
    Operator,
    SpaceDims,
    TLS_DOWN,
    TLS_UP,
    build_ladder,
    build_tls_ops,
)

GROUND = "g"
TOP = "top"

#: mixing-angle denominator below which the basis falls back to bare states
#: (only reachable when lambda = 0 and omega_z = 1 simultaneously)
_DEGENERATE_EPS = 1e-300


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters, all rates and frequencies in units of omega_m.

    theta is the dimensionless inverse temperature hbar*omega_m / (k_B T);
    delta_b is the detuning entering the cavity-induced rates and defaults to
    the drive detuning delta_l when left as None.
    """

    omega_z: float
    lambda_c: float
    g_c: float
    kappa: float
    gamma_m: float
    gamma_tau: float
    delta_l: float
    theta: float
    delta_b: float | None = None

    def __post_init__(self):
        for name in ("kappa", "gamma_m", "gamma_tau"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.lambda_c < 0:
            raise ValueError(f"lambda_c must be >= 0, got {self.lambda_c}")
        if self.theta <= 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")

    @property
    def delta_w(self) -> float:
        """Resonator-TLS detuning dw = 1 - omega_z."""
        return 1.0 - self.omega_z

    def resolved_delta_b(self) -> float:
        return self.delta_l if self.delta_b is None else self.delta_b


@dataclass(frozen=True)
class TransitionAmplitude:
    """One |n,alpha> -> |n-1,beta> channel of the lowering operators.

    a_coeff and sigma_coeff are the matrix elements <lower| b |upper> and
    <lower| sigma_- |upper>; omega is the transition frequency in omega_m
    units.  For n = 1 beta is the ground singlet; for n = nmax + 1 alpha is
    the orphan top state.
    """

    n: int
    alpha: str
    beta: str
    upper: int
    lower: int
    omega: float
    a_coeff: float
    sigma_coeff: float


@dataclass(frozen=True, eq=False)
class PolaritonBasis:
    """Dressed basis: energies, mixing coefficients and the product->polariton
    unitary U (rows are dressed states in the product basis)."""

    space: SpaceDims
    omega_z: float
    lambda_c: float
    energies: np.ndarray          # (dim,) in omega_m units
    transform: np.ndarray         # (dim, dim) real orthogonal
    cos_half: np.ndarray          # (nmax+1,) cos(d_n/2), entry 0 unused
    sin_half: np.ndarray          # (nmax+1,) sin(d_n/2), entry 0 unused
    labels: tuple = field(repr=False)

    def __post_init__(self):
        self.energies.setflags(write=False)
        self.transform.setflags(write=False)
        self.cos_half.setflags(write=False)
        self.sin_half.setflags(write=False)

    def index_of(self, n: int, alpha: str) -> int:
        """Basis index of |n,alpha>; (0, 'g') is the ground singlet."""
        if n == 0 and alpha == GROUND:
            return 0
        if alpha == TOP and n == self.space.nmax + 1:
            return self.space.dim - 1
        if 1 <= n <= self.space.nmax and alpha in ("+", "-"):
            return 2 * n - 1 if alpha == "+" else 2 * n
        raise ValueError(f"no polariton state (n={n}, alpha={alpha!r})")

    def manifold_of(self, index: int) -> int:
        if index == 0:
            return 0
        if index == self.space.dim - 1:
            return self.space.nmax + 1
        return (index + 1) // 2

    def splitting(self, n: int) -> float:
        """Doublet splitting w_n = omega_{n,+} - omega_{n,-}."""
        dw = 1.0 - self.omega_z
        return float(np.sqrt(dw * dw + 4.0 * self.lambda_c**2 * n))

    def to_polariton(self, matrix: np.ndarray) -> np.ndarray:
        """Transform a product-basis operator into the polariton basis."""
        return self.transform @ matrix @ self.transform.conj().T

    def to_product(self, matrix: np.ndarray) -> np.ndarray:
        return self.transform.conj().T @ matrix @ self.transform


def build_polariton_basis(params: SystemParams, space: SpaceDims) -> PolaritonBasis:
    """Construct the dressed basis by closed-form 2x2 diagonalization.

    Branch ordering within each doublet is by energy, omega_{n,+} >= omega_{n,-};
    the closed-form coefficients keep this ordering for either sign of the
    detuning since w_n >= |dw|.
    """
    dim = space.dim
    dw = params.delta_w
    lam = params.lambda_c

    energies = np.zeros(dim)
    transform = np.zeros((dim, dim))
    cos_half = np.zeros(space.nmax + 1)
    sin_half = np.zeros(space.nmax + 1)
    labels = [(0, GROUND)]

    transform[0, space.product_index(0, TLS_DOWN)] = 1.0
    energies[0] = -params.omega_z / 2.0

    for n in range(1, space.nmax + 1):
        w_n = np.sqrt(dw * dw + 4.0 * lam * lam * n)
        i_down = space.product_index(n, TLS_DOWN)
        i_up = space.product_index(n - 1, TLS_UP)
        plus, minus = 2 * n - 1, 2 * n
        if w_n < _DEGENERATE_EPS:
            # lambda = 0 and dw = 0: the doublet is degenerate and the bare
            # states are exact eigenstates; keep them with positive sign
            c, s = 1.0, 0.0
            transform[plus, i_down] = 1.0
            transform[minus, i_up] = 1.0
        else:
            # stable half-angle evaluation: take the square root on the
            # branch free of cancellation and recover the other coefficient
            # from sin(d_n) = 2 lambda sqrt(n) / w_n
            if dw >= 0:
                c = np.sqrt((w_n + dw) / (2.0 * w_n))
                s = lam * np.sqrt(n) / (w_n * c)
            else:
                s = np.sqrt((w_n - dw) / (2.0 * w_n))
                c = lam * np.sqrt(n) / (w_n * s)
            transform[plus, i_down] = c
            transform[plus, i_up] = s
            transform[minus, i_down] = s
            transform[minus, i_up] = -c
        cos_half[n] = c
        sin_half[n] = s
        energies[plus] = (n - 0.5) + w_n / 2.0
        energies[minus] = (n - 0.5) - w_n / 2.0
        labels.append((n, "+"))
        labels.append((n, "-"))

    transform[dim - 1, space.product_index(space.nmax, TLS_UP)] = 1.0
    energies[dim - 1] = space.nmax + params.omega_z / 2.0
    labels.append((space.nmax + 1, TOP))

    order = [0] + [i for n in range(1, space.nmax + 1) for i in (2 * n - 1, 2 * n)]
    order.append(dim - 1)
    assert order == list(range(dim))

    return PolaritonBasis(
        space=space,
        omega_z=params.omega_z,
        lambda_c=params.lambda_c,
        energies=energies,
        transform=transform,
        cos_half=cos_half,
        sin_half=sin_half,
        labels=tuple(labels),
    )


def _manifold_members(basis: PolaritonBasis, n: int) -> list[tuple[str, int]]:
    nmax = basis.space.nmax
    if n == 0:
        return [(GROUND, 0)]
    if n == nmax + 1:
        return [(TOP, basis.space.dim - 1)]
    return [("+", 2 * n - 1), ("-", 2 * n)]


def transition_coefficients(basis: PolaritonBasis) -> tuple[TransitionAmplitude, ...]:
    """All b / sigma_- matrix elements between adjacent manifolds.

    Computed as explicit matrix elements through the transform U, so that
    sum_T a_T |lower><upper| reconstructs b exactly on the truncated space
    (and likewise for sigma_-).
    """
    space = basis.space
    b_pol = basis.to_polariton(build_ladder(space).matrix)
    sm_pol = basis.to_polariton(build_tls_ops(space)[0].matrix)

    out = []
    for n in range(1, space.nmax + 2):
        for alpha, upper in _manifold_members(basis, n):
            for beta, lower in _manifold_members(basis, n - 1):
                a = b_pol[lower, upper]
                sig = sm_pol[lower, upper]
                # coefficients are real by construction (U real, b real)
                out.append(TransitionAmplitude(
                    n=n, alpha=alpha, beta=beta, upper=upper, lower=lower,
                    omega=float(basis.energies[upper] - basis.energies[lower]),
                    a_coeff=float(a.real), sigma_coeff=float(sig.real),
                ))
    return tuple(out)


def pulse_matrix(basis: PolaritonBasis) -> Operator:
    """sigma_z expressed in the polariton basis (Hermitian, involutive)."""
    sz = build_tls_ops(basis.space)[2].matrix
    v = basis.to_polariton(sz)
    return Operator(v, basis.space)


def jc_hamiltonian(params: SystemParams, space: SpaceDims) -> Operator:
    """Coupled resonator-TLS Hamiltonian in the product basis, units omega_m."""
    b = build_ladder(space).matrix
    sm, sp, sz = (op.matrix for op in build_tls_ops(space))
    number = np.kron(np.diag(np.arange(space.nmax + 1.0)), np.eye(2))
    h = (number + 0.5 * params.omega_z * sz
         + params.lambda_c * (sp @ b + b.conj().T @ sm))
    return Operator(h.astype(complex), space)
