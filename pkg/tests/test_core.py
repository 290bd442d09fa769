import numpy as np
import pytest

from tlscool.core import (
    DensityMatrix,
    DimensionError,
    Operator,
    SpaceDims,
    build_ladder,
    build_tls_ops,
    expectation,
    number_operator,
    thermal_fock_populations,
    thermal_resonator_state,
    tls_thermal_factor,
    top_level_projector,
)


def test_space_dims():
    space = SpaceDims(5)
    assert space.dim == 12
    with pytest.raises(ValueError):
        SpaceDims(1)


def test_tensor_ordering_round_trip():
    # canonical-basis round trip: index <-> (fock level, TLS state) and the
    # diagonal operators agree with that labelling
    space = SpaceDims(3)
    num = number_operator(space).matrix
    sz = build_tls_ops(space)[2].matrix
    for n in range(space.nmax + 1):
        for s in (0, 1):
            idx = space.product_index(n, s)
            assert space.fock_level(idx) == n
            assert space.tls_state(idx) == s
            e = np.zeros(space.dim)
            e[idx] = 1.0
            assert num[idx, idx].real == n
            assert sz[idx, idx].real == (1.0 if s else -1.0)
            assert np.allclose(num @ e, n * e)


def test_ladder_matrix_elements():
    space = SpaceDims(2)
    b = build_ladder(space).matrix
    # Fock-factor entries (0,1)=1 and (1,2)=sqrt(2), both TLS columns
    for s in (0, 1):
        assert b[space.product_index(0, s), space.product_index(1, s)] == 1.0
        assert b[space.product_index(1, s), space.product_index(2, s)] == (
            pytest.approx(np.sqrt(2), abs=0))
    # all other entries vanish
    mask = np.ones_like(b, dtype=bool)
    for s in (0, 1):
        mask[space.product_index(0, s), space.product_index(1, s)] = False
        mask[space.product_index(1, s), space.product_index(2, s)] = False
    assert np.all(b[mask] == 0)


def test_number_diagonal():
    space = SpaceDims(2)
    b = build_ladder(space).matrix
    num = b.conj().T @ b
    assert np.allclose(np.diag(num).real, [0, 0, 1, 1, 2, 2], atol=0)


def test_commutator_truncation_artifact():
    space = SpaceDims(4)
    b = build_ladder(space).matrix
    comm = b @ b.conj().T - b.conj().T @ b
    expected = np.eye(space.dim)
    for s in (0, 1):
        expected[space.product_index(4, s), space.product_index(4, s)] = -4.0
    assert np.max(np.abs(comm - expected)) < 1e-14


def test_tls_conjugation_identities():
    space = SpaceDims(3)
    sm, sp, sz = (op.matrix for op in build_tls_ops(space))
    assert np.max(np.abs(sz @ sm @ sz + sm)) < 1e-15
    assert np.max(np.abs(sz @ sp @ sz + sp)) < 1e-15
    assert np.array_equal(sz @ sz, np.eye(space.dim))
    assert np.max(np.abs(sp @ sm + sm @ sp - np.eye(space.dim))) == 0


def test_thermal_state_ground_limit():
    space = SpaceDims(4)
    rho = thermal_resonator_state(space, 0.0)
    expected = np.zeros((space.dim, space.dim))
    expected[0, 0] = 1.0
    assert np.array_equal(rho.matrix, expected)


def test_thermal_state_trace_and_mean():
    space = SpaceDims(80)
    with pytest.warns(UserWarning, match="tail weight"):
        rho = thermal_resonator_state(space, 10.0)
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-14
    # independent oracle: direct geometric sums over the truncated ladder
    q = 10.0 / 11.0
    weights = (1 - q) * q ** np.arange(81)
    mean_oracle = float((np.arange(81) * weights).sum() / weights.sum())
    assert mean_oracle == pytest.approx(9.964035808123969, abs=1e-12)
    n_op = number_operator(space)
    assert expectation(rho, n_op).real == pytest.approx(mean_oracle, abs=1e-12)


def test_thermal_populations_geometric():
    space = SpaceDims(60)
    pops = thermal_fock_populations(space, 2.0)
    ratio = pops[1:] / pops[:-1]
    assert np.allclose(ratio, 2.0 / 3.0, atol=1e-12)


def test_tls_thermal_factor():
    tls = tls_thermal_factor(0.9, 1.0)
    assert abs(np.trace(tls) - 1.0) < 1e-15
    assert tls[1, 1].real / tls[0, 0].real == pytest.approx(np.exp(-0.9), abs=1e-15)


def test_expectation_examples(rng):
    space = SpaceDims(40)
    n_op = number_operator(space)
    ground = thermal_resonator_state(space, 0.0)
    assert expectation(ground, n_op) == 0
    # thermal n_th=1: mean from the geometric-series oracle
    rho = thermal_resonator_state(space, 1.0)
    q = 0.5
    weights = (1 - q) * q ** np.arange(41)
    mean_oracle = (np.arange(41) * weights).sum() / weights.sum()
    assert expectation(rho, n_op).real == pytest.approx(mean_oracle, abs=1e-12)
    assert mean_oracle == pytest.approx(1.0, abs=1e-10)
    # identity for any valid state
    eye = Operator(np.eye(space.dim, dtype=complex), space)
    assert expectation(rho, eye).real == pytest.approx(1.0, abs=1e-12)


def test_expectation_real_for_hermitian(rng):
    from conftest import random_density

    space = SpaceDims(4)
    rho = DensityMatrix(random_density(rng, space.dim), space)
    n_op = number_operator(space)
    assert abs(expectation(rho, n_op).imag) < 1e-10


def test_expectation_dimension_mismatch():
    rho = thermal_resonator_state(SpaceDims(3), 0.0)
    with pytest.raises(DimensionError):
        expectation(rho, number_operator(SpaceDims(4)))


def test_density_matrix_validation(rng):
    space = SpaceDims(2)
    good = np.eye(space.dim, dtype=complex) / space.dim
    DensityMatrix(good, space)
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(good * 1.001, space)
    bad_herm = good.copy()
    bad_herm[0, 1] = 1e-3
    with pytest.raises(ValueError, match="Hermiticity"):
        DensityMatrix(bad_herm, space)
    bad_eig = good.copy()
    bad_eig[0, 0] = -1e-3
    bad_eig[1, 1] = good[1, 1] + 1e-3 + good[0, 0]
    with pytest.raises(ValueError, match="eigenvalue"):
        DensityMatrix(bad_eig, space)


def test_operator_dimension_check():
    with pytest.raises(DimensionError):
        Operator(np.eye(5, dtype=complex), SpaceDims(2))


def test_top_level_projector():
    space = SpaceDims(3)
    proj = top_level_projector(space).matrix
    assert proj[space.product_index(3, 0), space.product_index(3, 0)] == 1
    assert proj[space.product_index(3, 1), space.product_index(3, 1)] == 1
    assert np.trace(proj) == 2
