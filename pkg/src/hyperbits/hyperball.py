"""Hyperbit states and measurements.

A hyperbit state is a real vector in the unit ball of any finite dimension; a
measurement is a unit vector and the +/-1 outcome has expectation equal to the
inner product of the two. Vectors of different length are compared after
zero-padding the shorter one, which is an isometric embedding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import STRUCT_TOL
from .exceptions import ValidationError

__all__ = [
    "HyperbitState",
    "MeasurementVector",
    "pad",
    "expect",
    "sample",
    "scale",
    "postprocess_expectation",
    "sample_postprocessed",
]


def _coords(values, what):
    c = np.array(values, dtype=float).reshape(-1)
    if c.size < 1:
        raise ValidationError(f"{what} needs at least one coordinate")
    if not np.all(np.isfinite(c)):
        raise ValidationError(f"{what} has non-finite coordinates")
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class HyperbitState:
    coords: np.ndarray

    def __post_init__(self):
        c = _coords(self.coords, "hyperbit state")
        n = np.linalg.norm(c)
        if n > 1 + STRUCT_TOL:
            raise ValidationError(f"hyperbit norm {n:.12g} exceeds 1")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.size

    @property
    def norm(self):
        return float(np.linalg.norm(self.coords))

    def to_dict(self):
        return {"coords": [float(x) for x in self.coords]}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["coords"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed hyperbit record: {exc}") from None


@dataclass(frozen=True, eq=False)
class MeasurementVector:
    coords: np.ndarray

    def __post_init__(self):
        c = _coords(self.coords, "measurement vector")
        n = np.linalg.norm(c)
        if abs(n - 1) > STRUCT_TOL:
            raise ValidationError(f"measurement vector norm {n:.12g} is not 1")
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.size

    @classmethod
    def normalized(cls, values):
        v = np.asarray(values, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(v / n)

    def to_dict(self):
        return {"coords": [float(x) for x in self.coords]}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["coords"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed measurement record: {exc}") from None


def _vec(v):
    if isinstance(v, (HyperbitState, MeasurementVector)):
        return v.coords
    return np.asarray(v, dtype=float).reshape(-1)


def pad(u, v):
    """Zero-pad the shorter of two coordinate arrays to the common length."""
    u, v = _vec(u), _vec(v)
    n = max(u.size, v.size)
    return np.pad(u, (0, n - u.size)), np.pad(v, (0, n - v.size))


def expect(state, meas):
    u, v = pad(state, meas)
    return float(np.dot(u, v))


def sample(state, meas, rng, size=None):
    """Draw +/-1 outcomes; +1 has probability (1 + expect) / 2."""
    p = (1 + expect(state, meas)) / 2
    p = min(max(p, 0.0), 1.0)
    u = rng.random(size)
    return np.where(u < p, 1, -1) if size is not None else (1 if u < p else -1)


def scale(state, lam):
    if not 0 <= lam <= 1:
        raise ValidationError(f"scale factor {lam} outside [0, 1]")
    return HyperbitState(lam * _vec(state))


def postprocess_expectation(raw, c, q):
    """Expectation after discard-with-probability-|c| then flip-with-probability-q."""
    return c + (1 - abs(c)) * (1 - 2 * q) * raw


def sample_postprocessed(outcomes, c, q, rng):
    """Apply the discard/flip postprocessing to an array of raw +/-1 outcomes."""
    outcomes = np.asarray(outcomes)
    n = outcomes.shape
    discard = rng.random(n) < abs(c)
    flip = rng.random(n) < q
    kept = np.where(flip, -outcomes, outcomes)
    return np.where(discard, 1 if c >= 0 else -1, kept)
