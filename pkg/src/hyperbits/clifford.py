"""Anticommuting Hermitian involutions (gamma matrices) of any rank."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._config import MAX_CLIFFORD_GENERATORS, STRUCT_TOL
from .exceptions import ResourceLimitError, ValidationError
from .qsim import Observable

__all__ = ["GammaFamily", "generate", "embed_vector", "anticommutator_defect"]

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class GammaFamily:
    d: int
    dim: int
    gammas: tuple

    def matrices(self):
        return np.stack([g.matrix for g in self.gammas])


def _kron_all(factors):
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


@lru_cache(maxsize=None)
def _family(d):
    # Jordan-Wigner: generator pair k is Z^(k) (x) {X, Y} (x) I^(n-k-1)
    n = (d + 1) // 2
    gammas = []
    for k in range(n):
        for p in (_X, _Y):
            if len(gammas) == d:
                break
            gammas.append(Observable(_kron_all([_Z] * k + [p] + [_I] * (n - k - 1))))
    return GammaFamily(d=d, dim=2**n, gammas=tuple(gammas))


def generate(d, max_generators=MAX_CLIFFORD_GENERATORS):
    """Deterministic family of ``d`` pairwise anticommuting Hermitian involutions.

    The Hilbert dimension is ``2 ** ceil(d / 2)``.
    """
    d = int(d)
    if d < 1:
        raise ValidationError("need at least one generator")
    if d > max_generators:
        raise ResourceLimitError(f"{d} generators exceeds the limit of {max_generators}")
    return _family(d)


def embed_vector(fam, v):
    """Observable ``sum_i v_i gamma_i``; its square is |v|^2 times the identity."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size > fam.d:
        raise ValidationError(f"vector of length {v.size} needs more than {fam.d} generators")
    if np.linalg.norm(v) > 1 + STRUCT_TOL:
        raise ValidationError(f"vector norm {np.linalg.norm(v):.12g} exceeds 1")
    m = np.tensordot(v, fam.matrices()[: v.size], axes=1) if v.size else np.zeros((fam.dim,) * 2)
    return Observable(m)


def anticommutator_defect(fam):
    """Max-entry deviation of {g_i, g_j} from 2 delta_ij I over all pairs."""
    g = fam.matrices()
    eye = np.eye(fam.dim)
    worst = 0.0
    for i in range(fam.d):
        for j in range(i, fam.d):
            ac = g[i] @ g[j] + g[j] @ g[i] - (2 * eye if i == j else 0)
            worst = max(worst, float(np.max(np.abs(ac))))
    return worst
