import numpy as np
import pytest

from tlscool import SpaceDims, SystemParams

#: dimensionless hbar*omega_m/(k_B T) for 200 MHz (angular) at 0.1 K,
#: frozen from CODATA constants (see test_scenarios for the derivation)
THETA_200MHZ_100MK = 0.09598486146732442


def fig1_params(**overrides) -> SystemParams:
    """Published fig-1 parameter set (rate detuning delta_b left at delta_l
    unless overridden)."""
    base = dict(
        omega_z=0.9, lambda_c=0.05, g_c=0.05, kappa=0.15,
        gamma_m=1e-6, gamma_tau=2.5e-4, delta_l=-1.0,
        theta=THETA_200MHZ_100MK,
    )
    base.update(overrides)
    return SystemParams(**base)


@pytest.fixture
def small_space() -> SpaceDims:
    return SpaceDims(4)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def random_hermitian(rng, dim: int) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return x + x.conj().T


def random_density(rng, dim: int) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real
