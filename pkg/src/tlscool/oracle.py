"""Brute-force reference constructions for validating the fast paths.

Everything here is deliberately naive: dense eigendecomposition, explicit
Kronecker-product superoperators and scaling-and-squaring exponentials.
Capped at small dimension; for correctness checks only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .core import SpaceDims
from .dissipation import Generator
from .polariton import SystemParams, jc_hamiltonian

#: largest Hilbert-space dimension the d^2 x d^2 constructions accept
MAX_DIM = 16


class OracleDimensionError(ValueError):
    """Requested a brute-force construction beyond the small-dimension cap."""


@dataclass(frozen=True, eq=False)
class Superoperator:
    """d^2 x d^2 matrix acting on row-major vectorized density matrices,
    vec(rho) = rho.reshape(-1), so vec(A rho B) = (A kron B^T) vec(rho)."""

    matrix: np.ndarray
    dim: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.reshape(-1)).reshape(self.dim, self.dim)


def _check_dim(dim: int) -> None:
    if dim > MAX_DIM:
        raise OracleDimensionError(
            f"oracle is capped at dim <= {MAX_DIM}, got {dim}"
        )


def dense_diagonalize_jc(params: SystemParams, space: SpaceDims):
    """Full Hermitian eigendecomposition of the coupled Hamiltonian.

    Returns (eigenvalues ascending, eigenvectors as columns).
    """
    h = jc_hamiltonian(params, space).matrix
    return np.linalg.eigh(h)


def build_superoperator(generator: Generator) -> Superoperator:
    """Explicit matrix form of the generator's action."""
    dim = generator.space.dim
    _check_dim(dim)
    eye = np.eye(dim)
    h = generator.hamiltonian
    s = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, rate in generator.dissipators:
        o = op.toarray() if sp.issparse(op) else np.asarray(op)
        oo = o.conj().T @ o
        s = s + rate * (
            np.kron(o, o.conj())
            - 0.5 * np.kron(oo, eye)
            - 0.5 * np.kron(eye, oo.T)
        )
    return Superoperator(matrix=s, dim=dim)


def expm_evolve(superop: Superoperator, rho0: np.ndarray, t: float) -> np.ndarray:
    """exp(S t) applied to vec(rho0) via scaling-and-squaring."""
    _check_dim(superop.dim)
    propagated = scipy.linalg.expm(superop.matrix * t) @ rho0.reshape(-1)
    return propagated.reshape(superop.dim, superop.dim)
