"""Mutual-information accounting for one-hyperbit protocols with pairwise-independent bits.

Alice's input ``j`` is uniform over ``2**n`` values and her bits are rows of a
query matrix, ``a_i = F[i, j]``. Bob measures the hyperbit with ``u_i`` and
takes the outcome as his guess ``b_i``. :func:`ic_audit` computes each joint
distribution of ``(a_i, b_i)`` exactly and every intermediate quantity in
the chain

    sum_i I(a_i : b_i) <= sum_i <u_i, x_i>**2 / (1 - <u_i, x_avg>**2)
                       <= sum_i |x_i|**2 / (1 - |x_avg|**2) <= 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._config import EQUIV_TOL
from .exceptions import DimensionMismatchError, ValidationError
from .hyperball import MeasurementVector
from .queries import EncodingScheme, QueryMatrix

__all__ = [
    "binary_entropy",
    "taylor_bound_check",
    "mutual_information",
    "BitEnsemble",
    "ICReport",
    "joint_distribution",
    "optimal_measurements",
    "ic_audit",
]


def binary_entropy(t):
    """Shannon entropy in bits of a coin with bias ``t``; 0 at both endpoints."""
    arr = np.asarray(t, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValidationError("binary entropy argument outside [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -arr * np.log2(arr) - (1 - arr) * np.log2(1 - arr)
    h = np.where((arr == 0) | (arr == 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


def taylor_bound_check(resolution):
    """Largest value of (1 - h((1 + x) / 2)) - x**2 over an even grid on [-1, 1]."""
    if resolution < 2:
        raise ValidationError("grid needs at least two points")
    x = np.linspace(-1.0, 1.0, int(resolution))
    gap = 1 - binary_entropy(np.clip((1 + x) / 2, 0, 1)) - x**2
    return float(gap.max())


def _entropy(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(joint):
    """I(X:Y) in bits for a 2x2 joint probability table."""
    j = np.asarray(joint, dtype=float)
    if j.shape != (2, 2):
        raise ValidationError(f"joint table must be 2x2, got {j.shape}")
    if np.any(j < 0) or abs(j.sum() - 1) > 1e-12:
        raise ValidationError("joint table entries must be non-negative and sum to 1")
    val = _entropy(j.sum(axis=1)) + _entropy(j.sum(axis=0)) - _entropy(j.reshape(-1))
    return max(val, 0.0)


@dataclass(frozen=True, eq=False)
class BitEnsemble:
    """Bits ``a_i = F[i, j]`` for the chosen rows, with ``j`` uniform over all inputs."""

    queries: QueryMatrix
    rows: tuple

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        F = self.queries
        if not rows:
            raise ValidationError("ensemble needs at least one bit")
        if any(not 0 <= r < F.size for r in rows):
            raise ValidationError(f"row index out of range for size {F.size}")
        vals = F.rows[list(rows)]
        for k, r in enumerate(rows):
            if np.sum(vals[k] == 1) * 2 != F.size:
                raise ValidationError(f"bit from row {r} is not uniform")
        # exhaustive check of every pair's joint distribution over the inputs
        for k, l in combinations(range(len(rows)), 2):
            for alpha in (1, -1):
                for beta in (1, -1):
                    hits = np.sum((vals[k] == alpha) & (vals[l] == beta))
                    if hits * 4 != F.size:
                        raise ValidationError(
                            f"bits from rows {rows[k]} and {rows[l]} are not independent"
                        )
        object.__setattr__(self, "rows", rows)

    @property
    def values(self):
        return self.queries.rows[list(self.rows)]

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True, eq=False)
class ICReport:
    joints: np.ndarray  # joints[k][alpha_idx, beta_idx], index 0 is +1
    mutual_info: np.ndarray
    taylor_terms: np.ndarray  # per-bit right side after the entropy bound
    bound_terms: np.ndarray  # <u, x_i>**2 / (1 - <u, x_avg>**2)
    cs_terms: np.ndarray  # (<u, x_i>**2, |x_i|**2) per bit
    cs_bound_total: float  # sum |x_i|**2 / (1 - |x_avg|**2)
    bayes_residual: float

    @property
    def total(self):
        return float(self.mutual_info.sum())

    @property
    def bound_total(self):
        return float(self.bound_terms.sum())

    @property
    def bound_holds(self):
        return self.total <= 1 + EQUIV_TOL

    @property
    def chain_holds(self):
        """Every inequality layer, each within the equivalence tolerance."""
        return bool(
            np.all(self.mutual_info <= self.taylor_terms + EQUIV_TOL)
            and np.all(np.abs(self.taylor_terms - self.bound_terms) <= EQUIV_TOL)
            and np.all(self.cs_terms[:, 0] <= self.cs_terms[:, 1] + 1e-12)
            and self.total <= self.bound_total + EQUIV_TOL
            and self.bound_total <= self.cs_bound_total + EQUIV_TOL
            and self.cs_bound_total <= 1 + EQUIV_TOL
        )

    def to_dict(self):
        return {
            "mutual_info": [float(v) for v in self.mutual_info],
            "total": self.total,
            "bound_terms": [float(v) for v in self.bound_terms],
            "bound_total": self.bound_total,
            "cs_bound_total": self.cs_bound_total,
            "bayes_residual": self.bayes_residual,
            "bound_holds": self.bound_holds,
            "chain_holds": self.chain_holds,
        }


def _uniform(enc, size):
    if not isinstance(enc, EncodingScheme):
        enc = EncodingScheme(np.full(len(enc), 1 / len(enc)), enc)
    if enc.size != size:
        raise DimensionMismatchError(f"{enc.size} hyperbits for {size} inputs")
    if not np.allclose(enc.priors, 1 / size, atol=1e-12, rtol=0):
        raise ValidationError("information-causality audit assumes uniform priors")
    return enc


def joint_distribution(bit_values, hyperbits, priors, u):
    """P(a = alpha, b = beta) with P(b = beta | j) = (1 + beta <u, h_j>) / 2."""
    proj = hyperbits @ u
    joint = np.empty((2, 2))
    for ia, alpha in enumerate((1, -1)):
        mask = bit_values == alpha
        for ib, beta in enumerate((1, -1)):
            joint[ia, ib] = np.sum(priors[mask] * (1 + beta * proj[mask]) / 2)
    if np.any(joint < -1e-12) or np.any(joint > 1 + 1e-12):
        raise ValidationError("joint probabilities leave [0, 1]")
    return np.clip(joint, 0.0, 1.0)


def optimal_measurements(ensemble, enc):
    """Unit vectors parallel to each audited signal x_i (fixed axis when x_i = 0)."""
    enc = _uniform(enc, ensemble.queries.size)
    out = []
    for row in ensemble.values:
        x = row @ (enc.priors[:, None] * enc.hyperbits)
        n = np.linalg.norm(x)
        out.append(MeasurementVector(x / n if n > 1e-15 else np.eye(enc.dim)[0]))
    return out


def _ratio(num, den):
    if num <= 1e-30:
        return 0.0
    return num / den


def ic_audit(ensemble, enc, meas):
    """Exact mutual informations and every intermediate bound for the audited bits."""
    enc = _uniform(enc, ensemble.queries.size)
    if len(meas) != len(ensemble):
        raise DimensionMismatchError(f"need {len(ensemble)} measurements, got {len(meas)}")
    p, H = enc.priors, enc.hyperbits
    x_avg = p @ H
    avg_sq = float(x_avg @ x_avg)
    joints, mi, taylor, bound, cs = [], [], [], [], []
    bayes = 0.0
    for row, m in zip(ensemble.values, meas):
        u = m.coords if isinstance(m, MeasurementVector) else MeasurementVector(m).coords
        if u.size > enc.dim:
            raise DimensionMismatchError("measurement longer than the hyperbits")
        u = np.pad(u, (0, enc.dim - u.size))
        joint = joint_distribution(row, H, p, u)
        joints.append(joint)
        mi.append(mutual_information(joint))

        p_b = joint.sum(axis=0)
        p_a = joint.sum(axis=1)
        t = 0.0
        for ib, beta in enumerate((1, -1)):
            if p_b[ib] <= 0:
                continue
            direct = joint[ib, ib] / p_b[ib]  # P(a = beta | b = beta)
            # Bayes: P(b | a) from the conditional average hyperbit
            cond = (row == beta)
            p_b_given_a = 0.5 * (1 + beta * (p[cond] @ H[cond] / p_a[ib]) @ u)
            via_bayes = p_b_given_a * p_a[ib] / p_b[ib]
            bayes = max(bayes, abs(direct - via_bayes))
            t += p_b[ib] * (2 * direct - 1) ** 2
        taylor.append(t)

        x_i = row @ (p[:, None] * H)
        num = float(u @ x_i) ** 2
        bound.append(_ratio(num, 1 - float(u @ x_avg) ** 2))
        cs.append((num, float(x_i @ x_i)))

    cs = np.array(cs).reshape(-1, 2)
    return ICReport(
        joints=np.array(joints),
        mutual_info=np.array(mi),
        taylor_terms=np.array(taylor),
        bound_terms=np.array(bound),
        cs_terms=cs,
        cs_bound_total=_ratio(float(cs[:, 1].sum()), 1 - avg_sq),
        bayes_residual=bayes,
    )
