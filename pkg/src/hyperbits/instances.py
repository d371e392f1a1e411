"""Seeded random instances for sweeps and tests.

Every generator takes an explicit ``numpy.random.Generator``.
"""
import numpy as np

from .qsim import DensityMatrix
from .protocols import BobRecord, EBitProtocol, HyperbitProtocol
from .queries import EncodingScheme
from .tsirelson import QuantumStrategy, VectorStrategy


def unit_vector(d, rng):
    v = rng.normal(size=d)
    while np.linalg.norm(v) < 1e-12:
        v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def ball_vector(d, rng):
    """Uniform point in the d-dimensional unit ball."""
    return unit_vector(d, rng) * rng.random() ** (1 / d)


def density_matrix(dim, rng, dims=None):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix((m + m.conj().T) / 2, dims)


def _random_eigenbasis(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _from_spectrum(v, spectrum):
    m = (v * spectrum) @ v.conj().T
    return (m + m.conj().T) / 2


def projective_observable(dim, rng):
    """Observable with eigenvalues +/-1 in a Haar-random basis."""
    return _from_spectrum(_random_eigenbasis(dim, rng), rng.choice([-1.0, 1.0], size=dim))


def observable(dim, rng):
    """Observable with eigenvalues uniform in [-1, 1] in a Haar-random basis."""
    return _from_spectrum(_random_eigenbasis(dim, rng), rng.uniform(-1, 1, size=dim))


def vector_strategy(rng, n_x, n_y, dim):
    return VectorStrategy(
        np.array([ball_vector(dim, rng) for _ in range(n_x)]),
        np.array([ball_vector(dim, rng) for _ in range(n_y)]),
    )


def quantum_strategy(rng, n_a, n_b, dims=(2, 2)):
    da, db = dims
    return QuantumStrategy(
        density_matrix(da * db, rng, dims),
        [observable(da, rng) for _ in range(n_a)],
        [observable(db, rng) for _ in range(n_b)],
    )


def ebit_protocol(rng, n_alice, n_bob, dims=(2, 2)):
    """Random state, projective Alice observables, contraction Bob observables."""
    da, db = dims
    return EBitProtocol(
        density_matrix(da * db, rng, dims),
        {f"a{i}": projective_observable(da, rng) for i in range(n_alice)},
        {f"b{j}": (observable(db, rng), observable(db, rng)) for j in range(n_bob)},
    )


def hyperbit_protocol(rng, n_alice, n_bob, dim, direct=True):
    """Random hyperbit protocol; ``direct`` gives c = q = 0 for every record."""
    encode = {f"a{i}": ball_vector(dim, rng) for i in range(n_alice)}
    bob = {}
    for j in range(n_bob):
        recs = {}
        for A in (1, -1):
            meas = unit_vector(dim, rng)
            if direct:
                recs[A] = BobRecord(meas, 0.0, 0.0)
            else:
                c = rng.uniform(-1, 1)
                recs[A] = BobRecord(meas, c, rng.random())
        bob[f"b{j}"] = recs
    return HyperbitProtocol(encode, bob)


def encoding(rng, n, dim, uniform=False, unit=False, sparsity=0.0):
    """Random priors over 2**n inputs and hyperbits of dimension ``dim``.

    ``sparsity`` is the chance that an input gets prior 0.
    """
    size = 2**n
    if uniform:
        priors = np.full(size, 1 / size)
    else:
        priors = rng.random(size) * (rng.random(size) >= sparsity)
        if priors.sum() == 0:
            priors[rng.integers(size)] = 1.0
        priors = priors / priors.sum()
    make = unit_vector if unit else ball_vector
    return EncodingScheme(priors, np.array([make(dim, rng) for _ in range(size)]))
