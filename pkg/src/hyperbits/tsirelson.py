"""Tsirelson's vector/operator correspondence in both directions.

``extract`` turns a bipartite state with local observables into real vectors
whose inner products are the correlations ``tr(A_k (x) B_m rho)``;
``embed`` goes the other way using a gamma family on a maximally entangled
state. Only the correlation table is preserved, never the operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import MAX_CLIFFORD_GENERATORS, RANK_CUTOFF, STRUCT_TOL
from . import clifford
from .exceptions import DimensionMismatchError, ValidationError
from .qsim import (
    DensityMatrix,
    Observable,
    apply_local,
    expectation,
    matrix_from_dict,
    matrix_to_dict,
    maximally_entangled,
    pure_state,
    purify,
    tensor,
)

__all__ = [
    "QuantumStrategy",
    "VectorStrategy",
    "realify",
    "embed",
    "extract",
    "correlation_table",
]


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    rho: DensityMatrix
    alice_obs: tuple
    bob_obs: tuple

    def __post_init__(self):
        if len(self.rho.dims) != 2:
            raise DimensionMismatchError("strategy state must be bipartite (dims of length 2)")
        da, db = self.rho.dims
        alice = tuple(o if isinstance(o, Observable) else Observable(o) for o in self.alice_obs)
        bob = tuple(o if isinstance(o, Observable) else Observable(o) for o in self.bob_obs)
        if any(o.dim != da for o in alice) or any(o.dim != db for o in bob):
            raise DimensionMismatchError("observable dimension does not match its tensor factor")
        object.__setattr__(self, "alice_obs", alice)
        object.__setattr__(self, "bob_obs", bob)

    @property
    def dims(self):
        return self.rho.dims

    def to_dict(self):
        return {
            "dims": list(self.dims),
            "rho": matrix_to_dict(self.rho.matrix),
            "alice": [matrix_to_dict(o.matrix) for o in self.alice_obs],
            "bob": [matrix_to_dict(o.matrix) for o in self.bob_obs],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            rho = DensityMatrix(matrix_from_dict(d["rho"]), d["dims"])
            return cls(
                rho,
                [matrix_from_dict(m) for m in d["alice"]],
                [matrix_from_dict(m) for m in d["bob"]],
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed quantum strategy: {exc}") from None


def _as_rows(vectors):
    rows = [np.asarray(v, dtype=float).reshape(-1) for v in vectors]
    if not rows:
        return rows, 0
    return rows, max(r.size for r in rows)


@dataclass(frozen=True, eq=False)
class VectorStrategy:
    """Two families of real vectors in the unit ball, padded to one dimension."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xr, nx = _as_rows(self.xs)
        yr, ny = _as_rows(self.ys)
        d = max(nx, ny, 1)
        xs = np.array([np.pad(r, (0, d - r.size)) for r in xr]).reshape(len(xr), d)
        ys = np.array([np.pad(r, (0, d - r.size)) for r in yr]).reshape(len(yr), d)
        for name, arr in (("x", xs), ("y", ys)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name}-vectors contain non-finite values")
            norms = np.linalg.norm(arr, axis=1)
            if norms.size and norms.max() > 1 + STRUCT_TOL:
                raise ValidationError(f"{name}-vector norm {norms.max():.12g} exceeds 1")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def dim(self):
        return self.xs.shape[1]

    def gram(self):
        """Table of inner products <x_k, y_m>."""
        return self.xs @ self.ys.T

    def compressed(self):
        """Same inner products and norms, expressed in a basis of the spanned subspace."""
        stacked = np.vstack([self.xs, self.ys])
        if not stacked.size:
            return self
        _, s, vt = np.linalg.svd(stacked, full_matrices=False)
        r = max(int(np.sum(s > RANK_CUTOFF * max(s[0], 1.0))), 1)
        basis = vt[:r].T
        return VectorStrategy(self.xs @ basis, self.ys @ basis)

    def to_dict(self):
        return {
            "xs": [[float(v) for v in row] for row in self.xs],
            "ys": [[float(v) for v in row] for row in self.ys],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["xs"], d["ys"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed vector strategy: {exc}") from None


def realify(z):
    """Map complex amplitudes (a_j + i b_j) to the real list (..., a_j, b_j, ...)."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    return np.column_stack([z.real, z.imag]).reshape(-1)


def embed(vs, max_generators=MAX_CLIFFORD_GENERATORS):
    """Quantum strategy on a maximally entangled state reproducing ``vs.gram()``.

    Alice's observable for x is ``sum_i x_i gamma_i``; Bob's is the transpose of
    the same construction for y. Vectors longer than the generator limit are
    first re-expressed in a basis of their span.
    """
    if vs.dim > max_generators:
        vs = vs.compressed()
    fam = clifford.generate(vs.dim, max_generators)
    rho = pure_state(maximally_entangled(fam.dim), (fam.dim, fam.dim))
    alice = [clifford.embed_vector(fam, x) for x in vs.xs]
    bob = [Observable(clifford.embed_vector(fam, y).matrix.T) for y in vs.ys]
    return QuantumStrategy(rho, alice, bob)


def extract(qs):
    """Real vectors with <x_k, y_m> = tr(A_k (x) B_m rho).

    Vectors come from a purification |psi> of rho: x_k = (A_k (x) 1 (x) 1_E)|psi>
    and y_m = (1 (x) B_m (x) 1_E)|psi>, realified. Index 0 of both families is
    the identity operator, so ``xs[0] == ys[0]``.
    """
    psi = purify(qs.rho.matrix)
    da, db = qs.dims
    dims = (da, db, psi.size // (da * db))
    base = realify(psi)
    xs = [base] + [realify(apply_local(a.matrix, psi, dims, 0)) for a in qs.alice_obs]
    ys = [base] + [realify(apply_local(b.matrix, psi, dims, 1)) for b in qs.bob_obs]
    return VectorStrategy(np.array(xs), np.array(ys))


def correlation_table(qs, include_identity=False):
    """Direct evaluation of tr(A_k (x) B_m rho) with the density matrix."""
    da, db = qs.dims
    alice = [o.matrix for o in qs.alice_obs]
    bob = [o.matrix for o in qs.bob_obs]
    if include_identity:
        alice = [np.eye(da)] + alice
        bob = [np.eye(db)] + bob
    return np.array([[expectation(qs.rho, tensor(a, b)) for b in bob] for a in alice])
