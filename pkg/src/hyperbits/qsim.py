"""Dense complex-matrix kernel: states, observables, tensor products, partial traces.

Everything here is a pure function of immutable inputs. Matrices are plain
``numpy`` arrays; :class:`DensityMatrix` and :class:`Observable` wrap an array
after validating it and mark the copy read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from ._config import EQUIV_TOL, MAX_TOTAL_DIM, RANK_CUTOFF, STRUCT_TOL
from .exceptions import DimensionMismatchError, ResourceLimitError, ValidationError

__all__ = [
    "DensityMatrix",
    "Observable",
    "as_matrix",
    "hermitize",
    "tensor",
    "partial_trace_first",
    "partial_trace_last",
    "expectation",
    "purify",
    "maximally_entangled",
    "pure_state",
    "apply_local",
    "permute_subsystems",
    "matrix_to_dict",
    "matrix_from_dict",
]


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_matrix(m):
    """Return the underlying complex array of a matrix-like argument."""
    if isinstance(m, (DensityMatrix, Observable)):
        return m.matrix
    return np.asarray(m, dtype=complex)


def hermitize(m):
    m = as_matrix(m)
    return (m + m.conj().T) / 2


def _check_square(m, what):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{what} must be a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_TOTAL_DIM:
        raise ResourceLimitError(f"{what} dimension {m.shape[0]} exceeds limit {MAX_TOTAL_DIM}")


def _check_dims(dims, dim):
    if dims is None:
        return (dim,)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or prod(dims) != dim:
        raise DimensionMismatchError(f"subsystem dims {dims} do not multiply to {dim}")
    return dims


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    ``dims`` records the tensor-factor structure (default: one factor).
    """

    matrix: np.ndarray
    dims: tuple = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        _check_square(m, "density matrix")
        if not np.all(np.isfinite(m)):
            raise ValidationError("density matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > STRUCT_TOL:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1) > STRUCT_TOL:
            raise ValidationError(f"density matrix trace {tr.real:.3g} != 1")
        if np.linalg.eigvalsh(hermitize(m))[0] < -STRUCT_TOL:
            raise ValidationError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "dims", _check_dims(self.dims, m.shape[0]))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix with spectrum inside [-1, 1]."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        _check_square(m, "observable")
        if not np.all(np.isfinite(m)):
            raise ValidationError("observable has non-finite entries")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > STRUCT_TOL:
            raise ValidationError("observable is not Hermitian")
        ev = np.linalg.eigvalsh(hermitize(m))
        if ev[0] < -1 - STRUCT_TOL or ev[-1] > 1 + STRUCT_TOL:
            raise ValidationError(
                f"observable spectrum [{ev[0]:.6g}, {ev[-1]:.6g}] leaves [-1, 1]"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def is_projective(self, tol=EQUIV_TOL):
        m = self.matrix
        return np.max(np.abs(m @ m - np.eye(self.dim))) <= tol

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def tensor(a, b):
    """Kronecker product ``a (x) b``; entry (i*dB + k, j*dB + l) is a[i, j] * b[k, l]."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace_first(rho, dim_first):
    """Trace out a leading factor of dimension ``dim_first``."""
    m = as_matrix(rho)
    dim = m.shape[0]
    if dim_first < 1 or dim % dim_first:
        raise DimensionMismatchError(f"{dim_first} does not divide {dim}")
    rest = dim // dim_first
    out = np.einsum("ijik->jk", m.reshape(dim_first, rest, dim_first, rest))
    dims = None
    if isinstance(rho, DensityMatrix) and len(rho.dims) > 1 and rho.dims[0] == dim_first:
        dims = rho.dims[1:]
    return DensityMatrix(out, dims)


def partial_trace_last(rho, dim_last):
    """Trace out a trailing factor of dimension ``dim_last``."""
    m = as_matrix(rho)
    dim = m.shape[0]
    if dim_last < 1 or dim % dim_last:
        raise DimensionMismatchError(f"{dim_last} does not divide {dim}")
    rest = dim // dim_last
    out = np.einsum("ijkj->ik", m.reshape(rest, dim_last, rest, dim_last))
    dims = None
    if isinstance(rho, DensityMatrix) and len(rho.dims) > 1 and rho.dims[-1] == dim_last:
        dims = rho.dims[:-1]
    return DensityMatrix(out, dims)


def expectation(rho, obs):
    """Real expectation value ``tr(obs rho)``."""
    r, o = as_matrix(rho), as_matrix(obs)
    if r.shape != o.shape:
        raise DimensionMismatchError(f"state {r.shape} and observable {o.shape} differ")
    val = np.einsum("ji,ij->", r, o)
    if abs(val.imag) > STRUCT_TOL:
        raise ValidationError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def purify(rho):
    """Purification on system (x) ancilla with ancilla dimension equal to the rank.

    The returned vector is indexed ``system * rank + ancilla``.
    """
    m = hermitize(rho)
    w, v = np.linalg.eigh(m)
    keep = w > RANK_CUTOFF
    return (v[:, keep] * np.sqrt(w[keep])).reshape(-1)


def maximally_entangled(dim):
    """``sum_i |i>|i> / sqrt(dim)``; <Phi|A (x) B|Phi> = tr(A B^T) / dim."""
    if dim < 1:
        raise ValidationError("dimension must be positive")
    return np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)


def pure_state(psi, dims=None):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), dims)


def apply_local(op, psi, dims, axis):
    """Apply ``op`` to tensor factor ``axis`` of the vector ``psi`` with factor ``dims``."""
    op = as_matrix(op)
    if op.shape != (dims[axis], dims[axis]):
        raise DimensionMismatchError(f"operator {op.shape} does not act on factor {dims[axis]}")
    t = np.asarray(psi).reshape(dims)
    t = np.tensordot(op, t, axes=([1], [axis]))
    return np.moveaxis(t, 0, axis).reshape(-1)


def permute_subsystems(m, dims, perm):
    """Reorder the tensor factors of a square matrix; new factor k is old factor perm[k]."""
    m = as_matrix(m)
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    t = t.transpose(list(perm) + [n + p for p in perm])
    d = prod(dims)
    return t.reshape(d, d)


def matrix_to_dict(m):
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in m.real.reshape(-1)],
        "im": [float(x) for x in m.imag.reshape(-1)],
    }


def matrix_from_dict(d):
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", [0.0] * (rows * cols)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix record: {exc}") from None
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise ValidationError("matrix record entry count does not match rows x cols")
    return (re + 1j * im).reshape(rows, cols)
