"""Pairwise-unbiased queries on a hyperbit encoding and the biases Bob achieves.

Alice's input ``j`` (of ``2**n``) arrives with prior ``p_j`` and is encoded as
the hyperbit ``h_j``. Query ``i`` has the +/-1 answer ``F[i, j]``. Measuring
with unit vector ``u`` gives bias ``<u, x_i>`` where
``x_i = sum_j F[i, j] p_j h_j``; the best ``u`` is parallel to ``x_i``.
For a query matrix with orthogonal rows the squared optimal biases sum to
``2**n * sum_j p_j**2 |h_j|**2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import EQUIV_TOL, MAX_HADAMARD_ORDER
from .exceptions import DimensionMismatchError, ResourceLimitError, ValidationError
from .hyperball import MeasurementVector

__all__ = [
    "QueryMatrix",
    "EncodingScheme",
    "BiasReport",
    "KoenigReport",
    "RACResult",
    "hadamard",
    "biases",
    "check_identity",
    "check_split",
    "measured_biases",
    "check_suboptimal",
    "two_bit_inputs",
    "symmetric_koenig_encoding",
    "koenig_compare",
    "KOENIG_BENCHMARK",
    "optimize_rac",
]

PATHOLOGY_THRESHOLD = 1e-6
KOENIG_BENCHMARK = 1.5 * (1 + 1 / np.sqrt(3))


@dataclass(frozen=True, eq=False)
class QueryMatrix:
    """Square +/-1 matrix of size 2**n with pairwise orthogonal rows."""

    rows: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.rows)
        if f.ndim != 2 or f.shape[0] != f.shape[1] or f.shape[0] < 1:
            raise ValidationError(f"query matrix must be square, got shape {f.shape}")
        size = f.shape[0]
        if size & (size - 1):
            raise ValidationError(f"query matrix size {size} is not a power of two")
        if not np.all(np.isin(f, (-1, 1))):
            raise ValidationError("query matrix entries must be +1 or -1")
        f = f.astype(np.int64)
        if not np.array_equal(f @ f.T, size * np.eye(size, dtype=np.int64)):
            raise ValidationError("query matrix rows are not pairwise orthogonal")
        if not np.array_equal(f.T @ f, size * np.eye(size, dtype=np.int64)):
            raise ValidationError("query matrix columns are not pairwise orthogonal")
        f.setflags(write=False)
        object.__setattr__(self, "rows", f)

    @property
    def size(self):
        return self.rows.shape[0]

    @property
    def n(self):
        return self.size.bit_length() - 1

    def trivial_rows(self):
        """Indices of rows without any -1 (queries carrying no information)."""
        return [i for i in range(self.size) if np.all(self.rows[i] == 1)]

    def to_dict(self):
        return {"n": self.n, "rows": self.rows.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            qm = cls(np.array(d["rows"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed query matrix: {exc}") from None
        if "n" in d and int(d["n"]) != qm.n:
            raise ValidationError(f"declared n={d['n']} but matrix has size {qm.size}")
        return qm


def hadamard(n, max_order=MAX_HADAMARD_ORDER):
    """Sylvester Hadamard matrix: entry (i, j) is (-1)**popcount(i & j)."""
    if n < 0:
        raise ValidationError("order must be non-negative")
    if n > max_order:
        raise ResourceLimitError(f"Hadamard order {n} exceeds the limit of {max_order}")
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        h = np.block([[h, h], [h, -h]])
    return QueryMatrix(h)


@dataclass(frozen=True, eq=False)
class EncodingScheme:
    priors: np.ndarray
    hyperbits: np.ndarray

    def __post_init__(self):
        p = np.array(self.priors, dtype=float).reshape(-1)
        h = np.array(self.hyperbits, dtype=float)
        if h.ndim == 1:
            h = h[:, None]
        if h.ndim != 2 or h.shape[0] != p.size:
            raise DimensionMismatchError(
                f"{p.size} priors but hyperbit array has shape {h.shape}"
            )
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValidationError("priors must be non-negative and sum to 1")
        norms = np.linalg.norm(h, axis=1)
        if norms.max() > 1 + 1e-10:
            raise ValidationError(f"hyperbit norm {norms.max():.12g} exceeds 1")
        p.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "hyperbits", h)

    @property
    def size(self):
        return self.priors.size

    @property
    def dim(self):
        return self.hyperbits.shape[1]

    def padded(self):
        """Extend with zero-prior inputs until the input count is a power of two."""
        target = 1 << (self.size - 1).bit_length()
        if target == self.size:
            return self
        extra = target - self.size
        return EncodingScheme(
            np.concatenate([self.priors, np.zeros(extra)]),
            np.vstack([self.hyperbits, np.zeros((extra, self.dim))]),
        )

    def average(self):
        return self.priors @ self.hyperbits

    def to_dict(self):
        return {
            "priors": [float(x) for x in self.priors],
            "hyperbits": [[float(v) for v in row] for row in self.hyperbits],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["priors"], d["hyperbits"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed encoding: {exc}") from None


@dataclass(frozen=True, eq=False)
class BiasReport:
    signals: np.ndarray  # x_i, one row per query
    biases: np.ndarray  # E_i = |x_i|
    measurements: tuple  # optimal unit vectors, one per query
    average: np.ndarray  # x_avg
    answer_probs: np.ndarray  # P(I_i = +1)
    lhs: float
    rhs: float
    trivial_rows: tuple
    pathological: tuple  # queries whose answer is almost fixed by the priors

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)

    def rows(self):
        """One (i, E_i, E_i**2) triple per query."""
        return [(i, float(e), float(e * e)) for i, e in enumerate(self.biases)]

    def to_dict(self):
        return {
            "biases": [float(e) for e in self.biases],
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "average_norm": float(np.linalg.norm(self.average)),
            "trivial_rows": list(self.trivial_rows),
            "pathological": list(self.pathological),
        }


def _aligned(F, enc):
    enc = enc.padded()
    if enc.size != F.size:
        raise DimensionMismatchError(f"{enc.size} inputs but query matrix has size {F.size}")
    return enc


def _identity_rhs(F, enc):
    norms_sq = np.einsum("ij,ij->i", enc.hyperbits, enc.hyperbits)
    return float(F.size * np.sum(enc.priors**2 * norms_sq))


def biases(F, enc):
    """Optimal-measurement biases for every query, with both sides of the identity."""
    enc = _aligned(F, enc)
    signals = F.rows @ (enc.priors[:, None] * enc.hyperbits)
    e = np.linalg.norm(signals, axis=1)
    fallback = np.eye(enc.dim)[0]
    meas = tuple(
        MeasurementVector(s / n if n > 1e-15 else fallback) for s, n in zip(signals, e)
    )
    p_plus = ((F.rows + 1) // 2) @ enc.priors
    pathological = tuple(
        i for i, pp in enumerate(p_plus) if max(pp, 1 - pp) > 1 - PATHOLOGY_THRESHOLD
    )
    return BiasReport(
        signals=signals,
        biases=e,
        measurements=meas,
        average=enc.average(),
        answer_probs=p_plus,
        lhs=float(np.sum(e**2)),
        rhs=_identity_rhs(F, enc),
        trivial_rows=tuple(F.trivial_rows()),
        pathological=pathological,
    )


def check_identity(F, enc):
    """|sum_i E_i**2 - 2**n sum_j p_j**2 |h_j|**2| for the optimal Bob."""
    return biases(F, enc).residual


def check_split(F, enc):
    """Residual of the split form: informative biases plus |x_avg|**2 against the RHS."""
    trivial = F.trivial_rows()
    if len(trivial) != 1:
        raise ValidationError("split form needs exactly one all-ones query")
    rep = biases(F, enc)
    informative = np.delete(rep.biases, trivial[0])
    x_avg = enc.padded().average()
    return abs(float(np.sum(informative**2) + x_avg @ x_avg) - rep.rhs)


def _meas_array(meas, dim):
    out = []
    for m in meas:
        c = m.coords if isinstance(m, MeasurementVector) else MeasurementVector(m).coords
        if c.size > dim:
            raise DimensionMismatchError(f"measurement of dimension {c.size} > hyperbit dimension {dim}")
        out.append(np.pad(c, (0, dim - c.size)))
    return np.array(out)


def measured_biases(F, enc, meas):
    """Biases <u_i, x_i> obtained with the given measurement per query."""
    enc = _aligned(F, enc)
    if len(meas) != F.size:
        raise DimensionMismatchError(f"need {F.size} measurements, got {len(meas)}")
    signals = F.rows @ (enc.priors[:, None] * enc.hyperbits)
    return np.einsum("ij,ij->i", _meas_array(meas, enc.dim), signals)


def check_suboptimal(F, enc, meas):
    """Slack 2**n sum_j p_j**2 |h_j|**2 - sum_i <u_i, x_i>**2, non-negative up to rounding."""
    e = measured_biases(F, enc, meas)
    return _identity_rhs(F, _aligned(F, enc)) - float(np.sum(e**2))


# -- two-bit inputs ------------------------------------------------------------


def two_bit_inputs():
    """Input j = a0 + 2 a1; rows 1, 2, 3 of ``hadamard(2)`` ask a0, a1 and a0 xor a1."""
    return [(j & 1, j >> 1) for j in range(4)]


def symmetric_koenig_encoding():
    """h = ((-1)**a0, (-1)**a1, (-1)**(a0 xor a1)) / sqrt(3) with uniform priors."""
    h = [[(-1) ** a0, (-1) ** a1, (-1) ** (a0 ^ a1)] for a0, a1 in two_bit_inputs()]
    return EncodingScheme(np.full(4, 0.25), np.array(h, dtype=float) / np.sqrt(3))


@dataclass(frozen=True)
class KoenigReport:
    biases: tuple  # E(a0), E(a1), E(a0 xor a1)
    success_probs: tuple
    p_sum: float
    e_sq_sum: float
    benchmark: float = KOENIG_BENCHMARK

    @property
    def strengthened_holds(self):
        return self.e_sq_sum <= 1 + EQUIV_TOL

    @property
    def koenig_holds(self):
        return self.p_sum <= self.benchmark + EQUIV_TOL

    def to_dict(self):
        return {
            "biases": list(self.biases),
            "success_probs": list(self.success_probs),
            "p_sum": self.p_sum,
            "e_sq_sum": self.e_sq_sum,
            "benchmark": self.benchmark,
            "strengthened_holds": bool(self.strengthened_holds),
            "koenig_holds": bool(self.koenig_holds),
        }


def koenig_compare(enc):
    """Sum of success probabilities and of squared biases for a0, a1, a0 xor a1."""
    if enc.size != 4:
        raise ValidationError(f"two-bit encoding needs 4 inputs, got {enc.size}")
    if not np.allclose(enc.priors, 0.25, atol=1e-12, rtol=0):
        raise ValidationError("two-bit comparison assumes uniform priors")
    rep = biases(hadamard(2), enc)
    e = tuple(float(x) for x in rep.biases[1:])
    probs = tuple((1 + x) / 2 for x in e)
    return KoenigReport(e, probs, float(sum(probs)), float(sum(x * x for x in e)))


# -- random access codes -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RACResult:
    encoding: EncodingScheme
    biases: tuple
    min_bias: float

    @property
    def success_prob(self):
        return (1 + self.min_bias) / 2


def optimize_rac(rng, dim=3, starts=8):
    """Best 2 -> 1 random access code over unit hyperbits, by constrained search.

    Maximizes t subject to |x_1| >= t and |x_2| >= t (the a0 and a1 queries)
    over four free vectors normalized inside the objective; several seeded
    starts, best kept.
    """
    from scipy.optimize import minimize

    F = hadamard(2).rows[1:3].astype(float)
    p = np.full(4, 0.25)

    def unpack(z):
        h = z[:-1].reshape(4, dim)
        return h / np.linalg.norm(h, axis=1, keepdims=True)

    def signals(z):
        return F @ (p[:, None] * unpack(z))

    cons = [
        {"type": "ineq", "fun": lambda z, k=k: np.sum(signals(z)[k] ** 2) - z[-1] ** 2}
        for k in range(2)
    ]
    best = None
    for _ in range(starts):
        z0 = np.append(rng.normal(size=4 * dim), 0.1)
        res = minimize(
            lambda z: -z[-1],
            z0,
            constraints=cons,
            bounds=[(None, None)] * (4 * dim) + [(0, 1)],
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 1000},
        )
        e = np.linalg.norm(signals(res.x), axis=1)
        if best is None or e.min() > best[1].min():
            best = (res.x, e)
    enc = EncodingScheme(p, unpack(best[0]))
    return RACResult(enc, tuple(float(x) for x in best[1]), float(best[1].min()))
