import numpy as np
import pytest

from hyperbits import instances
from hyperbits.exceptions import ValidationError
from hyperbits.qsim import DensityMatrix, expectation, maximally_entangled, pure_state, tensor
from hyperbits.tsirelson import (
    QuantumStrategy,
    VectorStrategy,
    correlation_table,
    embed,
    extract,
    realify,
)

Z = np.diag([1.0, -1.0])


def _gram_vs_quantum(vs):
    qs = embed(vs)
    return np.max(np.abs(correlation_table(qs) - vs.gram()))


def test_embed_aligned_and_orthogonal():
    e1, e2 = [1.0, 0.0], [0.0, 1.0]
    assert correlation_table(embed(VectorStrategy([e1], [e1])))[0, 0] == pytest.approx(1.0)
    assert correlation_table(embed(VectorStrategy([e1], [e2])))[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_embed_random_table(rng):
    vs = instances.vector_strategy(rng, 3, 3, 4)
    qs = embed(vs)
    for i, a in enumerate(qs.alice_obs):
        for j, b in enumerate(qs.bob_obs):
            assert expectation(qs.rho, tensor(a, b)) == pytest.approx(vs.xs[i] @ vs.ys[j], abs=1e-9)


def test_embed_compresses_long_vectors(rng):
    xs = np.zeros((2, 20))
    xs[0, 17] = 1.0
    xs[1, :2] = [0.6, 0.0]
    ys = np.zeros((1, 20))
    ys[0, 17] = -0.5
    assert _gram_vs_quantum(VectorStrategy(xs, ys)) <= 1e-12


def test_vector_strategy_checks():
    with pytest.raises(ValidationError):
        VectorStrategy([[1.0, 1.0]], [[1.0]])
    vs = VectorStrategy([[1.0]], [[0.0, 1.0]])
    assert vs.dim == 2
    back = VectorStrategy.from_dict(vs.to_dict())
    assert np.array_equal(back.gram(), vs.gram())


def test_extract_product_and_singlet():
    rho = DensityMatrix(np.diag([1.0, 0, 0, 0]), (2, 2))
    vs = extract(QuantumStrategy(rho, [Z], [Z]))
    assert vs.xs[1] @ vs.ys[1] == pytest.approx(1.0)
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    vs = extract(QuantumStrategy(pure_state(singlet, (2, 2)), [Z], [Z]))
    assert vs.xs[1] @ vs.ys[1] == pytest.approx(-1.0)


def test_extract_random_matches_density_matrix(rng):
    for _ in range(10):
        qs = instances.quantum_strategy(rng, 2, 2)
        vs = extract(qs)
        table = correlation_table(qs, include_identity=True)
        assert np.max(np.abs(vs.gram() - table)) <= 1e-9
        assert np.all(np.linalg.norm(vs.xs, axis=1) <= 1 + 1e-9)
        assert np.array_equal(vs.xs[0], vs.ys[0])


def test_extract_then_embed_roundtrip(rng):
    qs = instances.quantum_strategy(rng, 2, 3, dims=(2, 3))
    vs = extract(qs)
    assert _gram_vs_quantum(vs) <= 1e-9


def test_realify_preserves_real_inner_product(rng):
    u = rng.normal(size=5) + 1j * rng.normal(size=5)
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert realify(u) @ realify(v) == pytest.approx(np.vdot(u, v).real)


def test_quantum_strategy_roundtrip(rng):
    qs = instances.quantum_strategy(rng, 1, 2)
    back = QuantumStrategy.from_dict(qs.to_dict())
    assert np.allclose(correlation_table(back), correlation_table(qs))


def test_maximally_entangled_embed_state():
    qs = embed(VectorStrategy([[1.0]], [[1.0]]))
    assert np.allclose(qs.rho.matrix, pure_state(maximally_entangled(2)).matrix)
