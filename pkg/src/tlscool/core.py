"""Truncated Hilbert space, operator factories and states for resonator x TLS.

Tensor ordering is fixed package-wide: the product basis is Fock-major with
the TLS index minor, i.e. flat index = 2*n + s for Fock level n and TLS state
s (s=0 for down, s=1 for up).  Everything downstream (polariton transform,
generators, observables) relies on this single convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

TLS_DOWN = 0
TLS_UP = 1

# DensityMatrix construction tolerances
TRACE_TOL = 1e-10
HERM_TOL = 1e-10
EIG_FLOOR = -1e-8

# thermal-state truncation warning threshold (pre-renormalization tail weight)
TAIL_WARN = 1e-4


class DimensionError(ValueError):
    """Operator/state dimensions do not match the declared space."""


@dataclass(frozen=True)
class SpaceDims:
    """Truncated product space: Fock levels 0..nmax times a two-level system."""

    nmax: int

    def __post_init__(self):
        if self.nmax < 2:
            raise ValueError(f"nmax must be >= 2, got {self.nmax}")

    @property
    def dim(self) -> int:
        return 2 * (self.nmax + 1)

    def product_index(self, n: int, s: int) -> int:
        """Flat index of |n, s> (s=0 down, s=1 up)."""
        if not (0 <= n <= self.nmax and s in (0, 1)):
            raise ValueError(f"no state (n={n}, s={s}) in this space")
        return 2 * n + s

    def fock_level(self, index: int) -> int:
        return index // 2

    def tls_state(self, index: int) -> int:
        return index % 2


def _check_square(matrix: np.ndarray, space: SpaceDims) -> None:
    if matrix.shape != (space.dim, space.dim):
        raise DimensionError(
            f"matrix shape {matrix.shape} does not match space dim {space.dim}"
        )


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on the product space."""

    matrix: np.ndarray
    space: SpaceDims

    def __post_init__(self):
        _check_square(self.matrix, self.space)
        self.matrix.setflags(write=False)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T.copy(), self.space)


def hermiticity_residue(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def trace_error(matrix: np.ndarray) -> float:
    return abs(complex(np.trace(matrix)) - 1.0)


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))[0])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace state on the product space.

    Validation may be deferred (validate=False) when the producer guarantees
    the invariants, e.g. inside the propagator loop.
    """

    matrix: np.ndarray
    space: SpaceDims
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        _check_square(self.matrix, self.space)
        if self.validate:
            self.check(TRACE_TOL, HERM_TOL, EIG_FLOOR)
        self.matrix.setflags(write=False)

    def check(self, trace_tol: float = TRACE_TOL, herm_tol: float = HERM_TOL,
              eig_floor: float = EIG_FLOOR) -> None:
        """Raise if the state violates trace/Hermiticity/positivity bounds.

        The same check, with looser bounds, backs the propagator guards.
        """
        terr = trace_error(self.matrix)
        if terr > trace_tol:
            raise ValueError(f"trace error {terr:.3e} exceeds {trace_tol:.1e}")
        herr = hermiticity_residue(self.matrix)
        if herr > herm_tol:
            raise ValueError(f"Hermiticity residue {herr:.3e} exceeds {herm_tol:.1e}")
        lmin = min_eigenvalue(self.matrix)
        if lmin < eig_floor:
            raise ValueError(f"minimum eigenvalue {lmin:.3e} below {eig_floor:.1e}")


def build_ladder(space: SpaceDims) -> Operator:
    """Resonator annihilation operator b, identity on the TLS factor."""
    fock = np.diag(np.sqrt(np.arange(1, space.nmax + 1)), k=1)
    return Operator(np.kron(fock, np.eye(2)).astype(complex), space)


def build_tls_ops(space: SpaceDims) -> tuple[Operator, Operator, Operator]:
    """(sigma_minus, sigma_plus, sigma_z), identity on the Fock factor."""
    eye_f = np.eye(space.nmax + 1)
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |down><up|
    sz = np.diag([-1.0, 1.0])
    return (
        Operator(np.kron(eye_f, sm).astype(complex), space),
        Operator(np.kron(eye_f, sm.T).astype(complex), space),
        Operator(np.kron(eye_f, sz).astype(complex), space),
    )


def number_operator(space: SpaceDims) -> Operator:
    """b† b on the product space (diagonal)."""
    return Operator(
        np.kron(np.diag(np.arange(space.nmax + 1.0)), np.eye(2)).astype(complex),
        space,
    )


def tls_excited_projector(space: SpaceDims) -> Operator:
    return Operator(
        np.kron(np.eye(space.nmax + 1), np.diag([0.0, 1.0])).astype(complex), space
    )


def top_level_projector(space: SpaceDims) -> Operator:
    """Projector onto the highest retained Fock level (truncation monitor)."""
    diag = np.zeros(space.dim)
    diag[space.product_index(space.nmax, TLS_DOWN)] = 1.0
    diag[space.product_index(space.nmax, TLS_UP)] = 1.0
    return Operator(np.diag(diag).astype(complex), space)


def thermal_fock_populations(space: SpaceDims, n_th: float) -> np.ndarray:
    """Truncated, renormalized Bose-Einstein populations over Fock levels."""
    if n_th < 0:
        raise ValueError(f"n_th must be >= 0, got {n_th}")
    if n_th == 0:
        pops = np.zeros(space.nmax + 1)
        pops[0] = 1.0
        return pops
    q = n_th / (n_th + 1.0)
    pops = (1.0 - q) * q ** np.arange(space.nmax + 1)
    tail = 1.0 - pops.sum()
    if tail > TAIL_WARN:
        warnings.warn(
            f"thermal tail weight {tail:.2e} beyond nmax={space.nmax} exceeds "
            f"{TAIL_WARN:.0e}; nmax is too small for n_th={n_th:.3g}",
            stacklevel=2,
        )
    return pops / pops.sum()


def thermal_resonator_state(space: SpaceDims, n_th: float,
                            tls: np.ndarray | None = None) -> DensityMatrix:
    """Thermal resonator (diagonal, truncated, renormalized) x given TLS state.

    tls is a 2x2 density matrix for the TLS factor; default is the TLS ground
    state |down><down|.
    """
    if tls is None:
        tls = np.diag([1.0, 0.0])
    tls = np.asarray(tls, dtype=complex)
    if tls.shape != (2, 2):
        raise DimensionError(f"TLS factor must be 2x2, got {tls.shape}")
    pops = thermal_fock_populations(space, n_th)
    rho = np.kron(np.diag(pops), tls).astype(complex)
    return DensityMatrix(rho, space)


def tls_thermal_factor(omega_z: float, theta: float) -> np.ndarray:
    """2x2 thermal TLS state at dimensionless inverse temperature theta."""
    w = np.exp(-omega_z * theta)
    return np.diag([1.0, w]) / (1.0 + w)


def expectation(rho: DensityMatrix, op: Operator) -> complex:
    """Tr(O rho); real to ~1e-10 for Hermitian O on a valid state."""
    if rho.space.dim != op.space.dim:
        raise DimensionError(
            f"state dim {rho.space.dim} != operator dim {op.space.dim}"
        )
    return complex(np.trace(op.matrix @ rho.matrix))
