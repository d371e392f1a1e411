import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperbits import instances
from hyperbits.exceptions import DimensionMismatchError, ValidationError
from hyperbits.qsim import (
    DensityMatrix,
    Observable,
    apply_local,
    expectation,
    matrix_from_dict,
    matrix_to_dict,
    maximally_entangled,
    partial_trace_first,
    partial_trace_last,
    permute_subsystems,
    pure_state,
    purify,
    tensor,
)

Z = np.diag([1.0, -1.0])


def test_tensor_identity_and_diagonal():
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(tensor(Z, np.eye(2)), np.diag([1, 1, -1, -1]))


def test_tensor_index_formula(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    t = tensor(a, b)
    for i in range(2):
        for j in range(2):
            for k in range(3):
                for l in range(3):
                    assert abs(t[i * 3 + k, j * 3 + l] - a[i, j] * b[k, l]) <= 1e-14


def test_partial_trace_product_states(rng):
    for _ in range(10):
        sa = instances.density_matrix(2, rng)
        sb = instances.density_matrix(3, rng)
        joint = DensityMatrix(tensor(sa.matrix, sb.matrix), (2, 3))
        assert np.allclose(partial_trace_first(joint, 2).matrix, sb.matrix, atol=1e-12)
        assert np.allclose(partial_trace_last(joint, 3).matrix, sa.matrix, atol=1e-12)
        assert partial_trace_first(joint, 2).dims == (3,)


def test_partial_trace_bell_marginal():
    phi = pure_state(maximally_entangled(2), (2, 2))
    assert np.allclose(partial_trace_first(phi, 2).matrix, np.eye(2) / 2)


def test_partial_trace_preserves_trace(rng):
    for _ in range(50):
        rho = instances.density_matrix(4, rng)
        assert abs(np.trace(partial_trace_first(rho, 2).matrix) - 1) < 1e-12


def test_partial_trace_bad_dim():
    with pytest.raises(DimensionMismatchError):
        partial_trace_first(np.eye(4) / 4, 3)


def test_expectation_basics(rng):
    rho = instances.density_matrix(3, rng)
    assert expectation(rho, np.eye(3)) == pytest.approx(1, abs=1e-12)
    assert expectation(np.diag([1.0, 0.0]), Z) == 1.0


def test_expectation_double_loop(rng):
    for _ in range(20):
        rho = instances.density_matrix(4, rng).matrix
        obs = instances.observable(4, rng)
        naive = sum(rho[j, i] * obs[i, j] for i in range(4) for j in range(4))
        assert expectation(rho, obs) == pytest.approx(naive.real, abs=1e-12)


def test_expectation_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        expectation(np.eye(2) / 2, np.eye(3))


def test_purify_pure_and_mixed(rng):
    psi = purify(np.diag([1.0, 0.0]))
    assert psi.size == 2 and abs(abs(psi[0]) - 1) < 1e-12
    for rho in (np.eye(2) / 2, instances.density_matrix(3, rng).matrix):
        psi = purify(rho)
        anc = psi.size // rho.shape[0]
        marg = partial_trace_last(np.outer(psi, psi.conj()), anc)
        assert np.allclose(marg.matrix, rho, atol=1e-9)


def test_maximally_entangled(rng):
    phi = maximally_entangled(1)
    assert phi.shape == (1,) and phi[0] == 1
    phi4 = maximally_entangled(4)
    assert np.vdot(phi4, tensor(np.eye(4), np.eye(4)) @ phi4).real == pytest.approx(1)
    a = rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4))
    val = np.vdot(phi4, tensor(a, b) @ phi4)
    assert val == pytest.approx(np.trace(a @ b.T) / 4, abs=1e-12)


def test_apply_local_matches_kron(rng):
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    op = rng.normal(size=(3, 3))
    out = apply_local(op, psi, (2, 3, 2), 1)
    assert np.allclose(out, np.kron(np.kron(np.eye(2), op), np.eye(2)) @ psi)


def test_permute_subsystems(rng):
    a, b = rng.normal(size=(2, 2)), rng.normal(size=(3, 3))
    assert np.allclose(permute_subsystems(np.kron(a, b), (2, 3), (1, 0)), np.kron(b, a))


def test_density_matrix_validation():
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(DimensionMismatchError):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_observable_validation():
    with pytest.raises(ValidationError):
        Observable(2 * np.eye(2))
    assert Observable(Z).is_projective()
    assert not Observable(0.5 * Z).is_projective()


def test_matrix_dict_roundtrip(rng):
    m = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    assert np.array_equal(matrix_from_dict(matrix_to_dict(m)), m)
    with pytest.raises(ValidationError):
        matrix_from_dict({"rows": 2})


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_partial_traces_commute_with_trace(da, db, seed):
    rho = instances.density_matrix(da * db, np.random.default_rng(seed), (da, db))
    left = partial_trace_last(partial_trace_first(rho, da), db).matrix
    assert abs(left[0, 0] - 1) < 1e-10
    ra = partial_trace_last(rho, db)
    rb = partial_trace_first(rho, da)
    assert ra.dim == da and rb.dim == db
