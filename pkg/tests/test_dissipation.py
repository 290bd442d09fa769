import numpy as np
import pytest
import scipy.constants
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig1_params, random_hermitian
from tlscool.core import SpaceDims, number_operator, thermal_resonator_state
from tlscool.dissipation import (
    BARE_PRODUCT,
    POLARITON,
    Generator,
    bose_occupation,
    build_polariton_generator,
    build_simple_generator,
    build_transition_table,
    cavity_rates,
)
from tlscool.oracle import build_superoperator
from tlscool.polariton import build_polariton_basis
from tlscool.propagator import IntegratorConfig, propagate


def polariton_generator(params, nmax):
    space = SpaceDims(nmax)
    basis = build_polariton_basis(params, space)
    table = build_transition_table(basis, params)
    return basis, table, build_polariton_generator(basis, table, params)


def test_bose_limits():
    assert bose_occupation(50.0, 10.0) < 1e-200
    assert bose_occupation(1.0, np.log(2.0)) == pytest.approx(1.0, abs=1e-14)


def test_bose_codata_value():
    # theta for omega_m = 2*pi*200 MHz at T = 0.1 K, from CODATA constants
    theta = scipy.constants.hbar * 2 * np.pi * 200e6 / (scipy.constants.k * 0.1)
    assert theta == pytest.approx(0.09598486146732442, abs=1e-15)
    assert bose_occupation(1.0, theta) == pytest.approx(9.926307072169985, abs=1e-9)


def test_bose_rejects_nonpositive():
    with pytest.raises(ValueError):
        bose_occupation(0.0, 1.0)
    with pytest.raises(ValueError):
        bose_occupation(-1.0, 1.0)
    with pytest.raises(ValueError):
        bose_occupation(1.0, 0.0)


@settings(max_examples=40, deadline=None)
@given(
    omega=st.floats(min_value=1e-3, max_value=50.0),
    theta=st.floats(min_value=1e-3, max_value=10.0),
)
def test_bose_positive_and_decreasing(omega, theta):
    val = bose_occupation(omega, theta)
    assert val > 0
    assert bose_occupation(omega * 1.5, theta) < val


def test_cavity_rate_values():
    params = fig1_params()
    g_minus, g_plus = cavity_rates(1.0, params)
    # direct substitution: 0.0025*0.15/0.005625 and 0.000375/(0.005625+4)
    assert g_minus == pytest.approx(0.06666666666666668, rel=1e-12)
    assert g_plus == pytest.approx(9.361834919644251e-05, rel=1e-12)


def test_cavity_rates_vanish_without_coupling():
    params = fig1_params(g_c=0.0)
    assert cavity_rates(1.0, params) == (0.0, 0.0)


def test_cavity_rates_delta_b_override():
    params = fig1_params(delta_b=-0.98)
    g_minus, _ = cavity_rates(0.98, params)
    assert g_minus == pytest.approx(params.g_c**2 * params.kappa
                                    / (params.kappa**2 / 4), rel=1e-12)


def test_transition_table_rates_nonnegative():
    params = fig1_params()
    _, table, _ = polariton_generator(params, 6)
    for rec in table.records:
        assert rec.rate_down >= 0
        assert rec.rate_up >= 0
        assert rec.gamma0 >= 0
        if rec.n_th is not None:
            assert rec.n_th > 0


def test_transition_table_rate_formula():
    # down = Gamma0 (nbar+1) + A^2 Gamma_-, up = Gamma0 nbar + A^2 Gamma_+
    params = fig1_params()
    _, table, _ = polariton_generator(params, 5)
    for rec in table.records:
        if rec.n_th is None:
            continue
        a2, s2 = rec.a_coeff**2, rec.sigma_coeff**2
        gamma0 = a2 * params.gamma_m + s2 * params.gamma_tau
        assert rec.gamma0 == pytest.approx(gamma0, rel=1e-12)
        g_minus, g_plus = cavity_rates(rec.omega, params)
        assert rec.rate_down == pytest.approx(
            gamma0 * (rec.n_th + 1) + a2 * g_minus, rel=1e-12)
        assert rec.rate_up == pytest.approx(
            gamma0 * rec.n_th + a2 * g_plus, rel=1e-12)


def test_inverted_transition_policy():
    # strong coupling pushes high-manifold cross-branch frequencies negative;
    # rates must stay nonnegative and the Bose factor uses |omega|
    params = fig1_params(omega_z=1.0, lambda_c=0.45)
    basis, table, gen = polariton_generator(params, 4)
    inverted = [r for r in table.records if r.omega < 0]
    assert inverted, "expected at least one inverted transition"
    for rec in inverted:
        assert rec.n_th == pytest.approx(
            bose_occupation(-rec.omega, params.theta), rel=1e-12)
        assert rec.rate_down >= 0 and rec.rate_up >= 0
        # emission carries the larger thermal weight, now on the raising side
        assert rec.rate_up > rec.rate_down


def test_zero_frequency_transition_policy():
    # omega_z = 1, lambda = 1: omega_{1,-,g} = 1 - omega_1/2 - ... = 0 exactly
    params = fig1_params(omega_z=1.0, lambda_c=1.0, gamma_tau=1e-3)
    basis, table, _ = polariton_generator(params, 3)
    zero = [r for r in table.records if abs(r.omega) <= 1e-9]
    assert zero, "expected a zero-frequency transition"
    for rec in zero:
        assert rec.n_th is None
        g_minus, g_plus = cavity_rates(rec.omega, params)
        assert rec.rate_down == pytest.approx(rec.a_coeff**2 * g_minus, rel=1e-12)
        assert rec.rate_up == pytest.approx(rec.a_coeff**2 * g_plus, rel=1e-12)


def test_unitary_limit_has_no_dissipators():
    params = fig1_params(gamma_m=0.0, gamma_tau=0.0, g_c=0.0)
    _, _, gen = polariton_generator(params, 4)
    assert gen.dissipators == ()
    # populations are constant under a purely unitary diagonal generator
    rho = np.diag(np.linspace(1, 2, gen.space.dim))
    rho /= np.trace(rho)
    out = gen.apply(rho.astype(complex))
    assert np.max(np.abs(np.diag(out))) < 1e-15


def test_generator_rejects_negative_rate():
    params = fig1_params()
    space = SpaceDims(3)
    import scipy.sparse as sp

    op = sp.csr_array(np.eye(space.dim, dtype=complex))
    with pytest.raises(ValueError, match="rate"):
        Generator(basis_tag=POLARITON, hamiltonian=np.zeros((8, 8), dtype=complex),
                  dissipators=((op, -1.0),), space=space)


def test_generator_rejects_nonhermitian_hamiltonian():
    space = SpaceDims(3)
    h = np.zeros((space.dim, space.dim), dtype=complex)
    h[0, 1] = 1.0
    with pytest.raises(ValueError, match="Hermitian"):
        Generator(basis_tag=POLARITON, hamiltonian=h, dissipators=(), space=space)


def test_trace_and_hermiticity_preservation(rng):
    params = fig1_params()
    _, _, gen = polariton_generator(params, 4)
    simple = build_simple_generator(params, SpaceDims(4))
    for generator in (gen, simple):
        for _ in range(5):
            herm = random_hermitian(rng, generator.space.dim)
            out = generator.apply(herm)
            assert abs(np.trace(out)) < 1e-12 * np.max(np.abs(herm))
            assert np.max(np.abs(out - out.conj().T)) < 1e-12 * np.max(np.abs(herm))


@pytest.mark.parametrize("nmax", [2, 3])
@pytest.mark.parametrize("kind", ["polariton", "simple"])
def test_generator_matches_superoperator(rng, nmax, kind):
    params = fig1_params()
    space = SpaceDims(nmax)
    if kind == "polariton":
        _, _, gen = polariton_generator(params, nmax)
    else:
        gen = build_simple_generator(params, space)
    superop = build_superoperator(gen)
    for _ in range(5):
        x = rng.normal(size=(space.dim,) * 2) + 1j * rng.normal(size=(space.dim,) * 2)
        assert np.max(np.abs(gen.apply(x) - superop.apply(x))) < 1e-12


def test_detailed_balance_without_cavity():
    # g = 0: stationary state is diagonal with Boltzmann ratios per transition
    params = fig1_params(g_c=0.0, gamma_tau=1e-3, gamma_m=1e-4, theta=0.5)
    basis, table, gen = polariton_generator(params, 3)
    superop = build_superoperator(gen)
    eigvals, eigvecs = np.linalg.eig(superop.matrix)
    idx = np.argmin(np.abs(eigvals))
    assert abs(eigvals[idx]) < 1e-12
    dim = gen.space.dim
    rho_ss = eigvecs[:, idx].reshape(dim, dim)
    rho_ss = rho_ss / np.trace(rho_ss)
    offdiag = rho_ss - np.diag(np.diag(rho_ss))
    assert np.max(np.abs(offdiag)) < 1e-10
    pops = np.diag(rho_ss).real
    for rec in table.records:
        if rec.n_th is None or rec.gamma0 == 0:
            continue
        ratio = pops[rec.upper] / pops[rec.lower]
        assert ratio == pytest.approx(np.exp(-rec.omega * params.theta), abs=1e-6)


def test_simple_generator_fields():
    params = fig1_params()
    space = SpaceDims(4)
    gen = build_simple_generator(params, space)
    assert gen.basis_tag == BARE_PRODUCT
    assert len(gen.dissipators) == 4
    from tlscool.polariton import jc_hamiltonian

    assert np.max(np.abs(gen.hamiltonian
                         - jc_hamiltonian(params, space).matrix)) == 0


def test_simple_generator_damped_oscillator_steady_state():
    # lambda = g = gamma_tau = 0: bare resonator relaxes to the bath occupation
    theta = 1.2
    n_m = bose_occupation(1.0, theta)
    params = fig1_params(lambda_c=0.0, g_c=0.0, gamma_tau=0.0,
                         gamma_m=0.2, theta=theta)
    space = SpaceDims(12)
    gen = build_simple_generator(params, space)
    rho = thermal_resonator_state(space, 2.0 * n_m)
    cfg = IntegratorConfig(dt=0.05)
    rho = propagate(rho, gen, 100.0, cfg)
    n_op = number_operator(space)
    n_end = float(np.trace(n_op.matrix @ rho.matrix).real)
    assert n_end == pytest.approx(n_m, abs=1e-3)


def test_polariton_generator_basis_mismatch():
    params = fig1_params()
    basis_a, table_a, _ = polariton_generator(params, 4)
    basis_b = build_polariton_basis(params, SpaceDims(4))
    with pytest.raises(ValueError, match="different basis"):
        build_polariton_generator(basis_b, table_a, params)
