"""One-bit-plus-entanglement protocols and their single-hyperbit equivalents.

An :class:`EBitProtocol` shares a bipartite state; on input ``a`` Alice measures a
projective +/-1 observable and sends the outcome ``A``; on input ``b`` Bob
measures an observable chosen by ``(b, A)`` and answers with its outcome.

A :class:`HyperbitProtocol` shares a uniformly random coin ``A``; Alice sends the
hyperbit ``A * encode[a]``, Bob measures it with ``meas`` from record
``bob[b][A]`` and post-processes the raw outcome: with probability ``|c|`` he
outputs ``sign(c)``, otherwise he flips the outcome with probability ``q``.
His answer expectation is therefore ``c + c' <A x, meas>`` with
``c' = (1 - |c|)(1 - 2q)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from ._config import EQUIV_TOL, STRUCT_TOL
from .exceptions import (
    DimensionMismatchError,
    PostprocessingInfeasibleError,
    UnknownInputError,
    UnsupportedFormError,
    ValidationError,
)
from .hyperball import (
    HyperbitState,
    MeasurementVector,
    expect,
    sample,
    sample_postprocessed,
)
from .qsim import (
    DensityMatrix,
    Observable,
    expectation,
    matrix_from_dict,
    matrix_to_dict,
    partial_trace_first,
    permute_subsystems,
    tensor,
)
from . import tsirelson

logger = logging.getLogger(__name__)

MESSAGES = (1, -1)

__all__ = [
    "EBitProtocol",
    "BobRecord",
    "HyperbitProtocol",
    "message_bias",
    "is_symmetric",
    "symmetrize",
    "eval_ebit",
    "sample_ebit",
    "ebit_table",
    "eval_hyperbit",
    "sample_hyperbit",
    "hyperbit_table",
    "ebit_to_hyperbit",
    "hyperbit_to_ebit",
    "feasibility_margins",
    "protocol_from_dict",
]


def _msg_key(A):
    return "+1" if A == 1 else "-1"


def _parse_msg(key):
    try:
        A = int(key)
    except ValueError:
        raise ValidationError(f"message key {key!r} is not +1 or -1") from None
    if A not in MESSAGES:
        raise ValidationError(f"message key {key!r} is not +1 or -1")
    return A


# -- e-bit protocols -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EBitProtocol:
    """Shared state, Alice's projective observables and Bob's message-indexed observables.

    ``alice`` maps each input label to an observable with square 1; ``bob`` maps
    each input label to a pair ``(B_plus, B_minus)`` used after messages +1 and -1.
    """

    rho: DensityMatrix
    alice: dict
    bob: dict

    def __post_init__(self):
        if len(self.rho.dims) != 2:
            raise DimensionMismatchError("protocol state must carry bipartite dims")
        da, db = self.rho.dims
        alice = {}
        for a, obs in self.alice.items():
            obs = obs if isinstance(obs, Observable) else Observable(obs)
            if obs.dim != da:
                raise DimensionMismatchError(f"Alice observable {a!r} is not {da}x{da}")
            if not obs.is_projective(EQUIV_TOL):
                raise ValidationError(f"Alice observable {a!r} is not projective")
            alice[a] = obs
        bob = {}
        for b, pair in self.bob.items():
            if len(pair) != 2:
                raise ValidationError(f"Bob input {b!r} needs one observable per message")
            pair = tuple(o if isinstance(o, Observable) else Observable(o) for o in pair)
            if any(o.dim != db for o in pair):
                raise DimensionMismatchError(f"Bob observable {b!r} is not {db}x{db}")
            bob[b] = pair
        if not alice or not bob:
            raise ValidationError("protocol needs at least one input on each side")
        object.__setattr__(self, "alice", MappingProxyType(alice))
        object.__setattr__(self, "bob", MappingProxyType(bob))

    @property
    def dims(self):
        return self.rho.dims

    def bob_obs(self, b, A):
        return self.bob[b][0 if A == 1 else 1]

    def to_dict(self):
        return {
            "kind": "ebit",
            "dims": list(self.dims),
            "rho": matrix_to_dict(self.rho.matrix),
            "alice": {str(a): matrix_to_dict(o.matrix) for a, o in self.alice.items()},
            "bob": {
                str(b): {_msg_key(A): matrix_to_dict(self.bob_obs(b, A).matrix) for A in MESSAGES}
                for b in self.bob
            },
        }

    @classmethod
    def from_dict(cls, d):
        try:
            rho = DensityMatrix(matrix_from_dict(d["rho"]), d["dims"])
            alice = {a: matrix_from_dict(m) for a, m in d["alice"].items()}
            bob = {}
            for b, rec in d["bob"].items():
                by_msg = {_parse_msg(k): matrix_from_dict(m) for k, m in rec.items()}
                if set(by_msg) != set(MESSAGES):
                    raise ValidationError(f"Bob input {b!r} must define messages +1 and -1")
                bob[b] = (by_msg[1], by_msg[-1])
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed ebit protocol: {exc}") from None
        return cls(rho, alice, bob)


def _check_inputs(p, a, b):
    alice = p.alice if isinstance(p, EBitProtocol) else p.encode
    if a not in alice:
        raise UnknownInputError(f"unknown Alice input {a!r}")
    if b not in p.bob:
        raise UnknownInputError(f"unknown Bob input {b!r}")


def _projector(obs, A):
    return (np.eye(obs.dim) + A * obs.matrix) / 2


def message_bias(p, a):
    """Expectation of Alice's message on input ``a``: tr(A_a (x) 1 rho)."""
    if a not in p.alice:
        raise UnknownInputError(f"unknown Alice input {a!r}")
    return expectation(p.rho, tensor(p.alice[a], np.eye(p.dims[1])))


def is_symmetric(p, tol=EQUIV_TOL):
    return all(abs(message_bias(p, a)) <= tol for a in p.alice)


def symmetrize(p):
    """Multiply Alice's message by a shared uniform coin C.

    Each party gets a coin register holding the same classical bit; Alice
    measures ``A_a (x) Z`` and Bob, seeing coin value ``C``, uses
    ``B_{b, C A'}``. Message biases become 0 and the answer table is unchanged.
    """
    da, db = p.dims
    coin = np.zeros((4, 4))
    coin[0, 0] = coin[3, 3] = 0.5
    # factors (A, B, C_A, C_B) -> (A, C_A, B, C_B)
    joint = permute_subsystems(np.kron(p.rho.matrix, coin), (da, db, 2, 2), (0, 2, 1, 3))
    rho = DensityMatrix(joint, (2 * da, 2 * db))
    z = np.diag([1.0, -1.0])
    zero, one = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    alice = {a: np.kron(o.matrix, z) for a, o in p.alice.items()}
    bob = {
        b: tuple(
            np.kron(p.bob_obs(b, A).matrix, zero) + np.kron(p.bob_obs(b, -A).matrix, one)
            for A in MESSAGES
        )
        for b in p.bob
    }
    return EBitProtocol(rho, alice, bob)


def eval_ebit(p, a, b):
    """Exact answer expectation: sum over A of tr(P_{a,A} (x) B_{b,A} rho)."""
    _check_inputs(p, a, b)
    return sum(
        expectation(p.rho, tensor(_projector(p.alice[a], A), p.bob_obs(b, A))) for A in MESSAGES
    )


def ebit_table(p):
    return np.array([[eval_ebit(p, a, b) for b in p.bob] for a in p.alice])


def sample_ebit(p, a, b, shots, rng):
    """Monte-Carlo mean of Bob's answer, simulating the measurements shot by shot.

    Alice's outcome is drawn from tr(P_{a,A} (x) 1 rho); Bob's answer from his
    conditional state, obtained by a partial trace over Alice's factor.
    """
    _check_inputs(p, a, b)
    da, db = p.dims
    probs, means = [], []
    for A in MESSAGES:
        proj = tensor(_projector(p.alice[a], A), np.eye(db))
        post = proj @ p.rho.matrix @ proj
        pa = float(np.trace(post).real)
        probs.append(max(pa, 0.0))
        if pa <= STRUCT_TOL:
            means.append(0.0)
            continue
        bob_state = partial_trace_first(post / pa, da)
        means.append(expectation(bob_state, p.bob_obs(b, A)))
    probs = np.array(probs) / sum(probs)
    n_plus = rng.binomial(shots, probs[0])
    total = 0
    for n, m in ((n_plus, means[0]), (shots - n_plus, means[1])):
        ones = rng.binomial(n, min(max((1 + m) / 2, 0.0), 1.0))
        total += 2 * ones - n
    return total / shots


# -- hyperbit protocols ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BobRecord:
    """Bob's measurement and discard/flip post-processing for one (b, A)."""

    meas: MeasurementVector
    c: float
    q: float

    def __post_init__(self):
        meas = self.meas if isinstance(self.meas, MeasurementVector) else MeasurementVector(self.meas)
        c, q = float(self.c), float(self.q)
        if abs(c) > 1 + STRUCT_TOL:
            raise ValidationError(f"|c| = {abs(c):.12g} exceeds 1")
        if not -STRUCT_TOL <= q <= 1 + STRUCT_TOL:
            raise ValidationError(f"flip probability {q:.12g} outside [0, 1]")
        object.__setattr__(self, "meas", meas)
        object.__setattr__(self, "c", min(max(c, -1.0), 1.0))
        object.__setattr__(self, "q", min(max(q, 0.0), 1.0))

    @property
    def discard_prob(self):
        return abs(self.c)

    @property
    def discard_output(self):
        return 1 if self.c >= 0 else -1

    @property
    def c_prime(self):
        return (1 - abs(self.c)) * (1 - 2 * self.q)

    @property
    def is_direct(self):
        return self.c == 0 and self.q == 0

    def to_dict(self):
        return {"meas": [float(x) for x in self.meas.coords], "c": self.c, "q": self.q}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["meas"], d.get("c", 0.0), d.get("q", 0.0))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed Bob record: {exc}") from None

    @classmethod
    def from_affine(cls, c, c_prime, meas):
        """Record realizing expectation ``c + c_prime * raw``; requires |c| + |c'| <= 1."""
        if abs(c) >= 1 - 1e-12:
            return cls(meas, c, 0.5)
        q = 0.5 * (1 - c_prime / (1 - abs(c)))
        return cls(meas, c, min(max(q, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class HyperbitProtocol:
    """Input-indexed hyperbit encodings and Bob's per-(b, A) records.

    ``construction`` names how a converted protocol was obtained; it has no
    effect on evaluation.
    """

    encode: dict
    bob: dict
    construction: str = field(default="direct")

    def __post_init__(self):
        enc = {
            a: h if isinstance(h, HyperbitState) else HyperbitState(h)
            for a, h in self.encode.items()
        }
        bob = {}
        for b, recs in self.bob.items():
            recs = {A: r if isinstance(r, BobRecord) else BobRecord(**r) for A, r in recs.items()}
            if set(recs) != set(MESSAGES):
                raise ValidationError(f"Bob input {b!r} needs records for messages +1 and -1")
            bob[b] = MappingProxyType(recs)
        if not enc or not bob:
            raise ValidationError("protocol needs at least one input on each side")
        object.__setattr__(self, "encode", MappingProxyType(enc))
        object.__setattr__(self, "bob", MappingProxyType(bob))

    @property
    def is_direct(self):
        return all(r.is_direct for recs in self.bob.values() for r in recs.values())

    def to_dict(self):
        return {
            "kind": "hyperbit",
            "construction": self.construction,
            "encode": {str(a): [float(x) for x in h.coords] for a, h in self.encode.items()},
            "bob": {
                str(b): {_msg_key(A): recs[A].to_dict() for A in MESSAGES}
                for b, recs in self.bob.items()
            },
        }

    @classmethod
    def from_dict(cls, d):
        try:
            encode = {a: HyperbitState(v) for a, v in d["encode"].items()}
            bob = {
                b: {_parse_msg(k): BobRecord.from_dict(r) for k, r in recs.items()}
                for b, recs in d["bob"].items()
            }
            return cls(encode, bob, d.get("construction", "direct"))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed hyperbit protocol: {exc}") from None


def eval_hyperbit(h, a, b):
    """Exact answer expectation, averaged over the shared coin."""
    _check_inputs(h, a, b)
    x = h.encode[a].coords
    total = 0.0
    for A in MESSAGES:
        r = h.bob[b][A]
        total += r.c + r.c_prime * expect(A * x, r.meas)
    return total / 2


def hyperbit_table(h):
    return np.array([[eval_hyperbit(h, a, b) for b in h.bob] for a in h.encode])


def sample_hyperbit(h, a, b, shots, rng):
    """Monte-Carlo mean: draw the coin, measure the hyperbit, post-process."""
    _check_inputs(h, a, b)
    x = h.encode[a].coords
    n_plus = rng.binomial(shots, 0.5)
    total = 0
    for A, n in ((1, n_plus), (-1, shots - n_plus)):
        if n == 0:
            continue
        r = h.bob[b][A]
        raw = sample(A * x, r.meas, rng, size=n)
        total += int(sample_postprocessed(raw, r.c, r.q, rng).sum())
    return total / shots


# -- conversions -----------------------------------------------------------------


def _unit(v, fallback):
    n = np.linalg.norm(v)
    if n <= 1e-12:
        return np.asarray(fallback, dtype=float), 0.0
    return v / n, float(n)


def _affine_parts(ps):
    """Vector data of a symmetrized protocol, reduced to the span of Alice's vectors.

    Returns Alice's encodings (rows) and, per Bob input, the identity overlaps
    ``c[A]`` and the projections ``w[A]`` of y_{b,A} onto that span, so that
    the conditional answer expectation is ``c[A] + <A x_a, w[A]>``. The last
    item maps ``(b, A)`` to the norm of the full part of y_{b,A} orthogonal to
    the identity vector, before projection.
    """
    alice_labels, bob_labels = list(ps.alice), list(ps.bob)
    bob_ops = [ps.bob_obs(b, A) for b in bob_labels for A in MESSAGES]
    qs = tsirelson.QuantumStrategy(ps.rho, [ps.alice[a] for a in alice_labels], bob_ops)
    vs = tsirelson.extract(qs)
    y1 = vs.ys[0]
    xa = vs.xs[1:]
    _, s, vt = np.linalg.svd(xa, full_matrices=False)
    basis = vt[: max(int(np.sum(s > 1e-10 * s[0])), 1)].T
    enc = xa @ basis
    parts, full = {}, {}
    for j, b in enumerate(bob_labels):
        c, w = {}, {}
        for k, A in enumerate(MESSAGES):
            y = vs.ys[1 + 2 * j + k]
            c[A] = float(y @ y1)
            w[A] = (y - c[A] * y1) @ basis
            full[b, A] = float(np.linalg.norm(y - c[A] * y1))
        parts[b] = (c, w)
    return alice_labels, enc, parts, full


def feasibility_margins(p, projected=True):
    """|c| + |c'| of the per-message decomposition for every (b, A).

    With ``projected=False`` c' is the norm of the whole component orthogonal
    to the identity vector rather than of its projection onto Alice's span.
    Values above 1 mean the decomposition has no valid flip probability.
    """
    ps = p if is_symmetric(p) else symmetrize(p)
    _, _, parts, full = _affine_parts(ps)
    return {
        (b, A): abs(c[A]) + (float(np.linalg.norm(w[A])) if projected else full[b, A])
        for b, (c, w) in parts.items()
        for A in MESSAGES
    }


def _factorize(enc, targets, offsets, eps=1e-7):
    """Re-factor the answer table as <X(a), W_b> with |X(a)| <= 1, |W_b| <= 1 - |c_b|.

    Solved as a semidefinite feasibility problem on the joint Gram matrix,
    minimizing the worst ratio |W_b| / (1 - |c_b|). Encodings are then read off
    the Gram matrix and the Bob vectors solved exactly from the table.
    """
    import cvxpy as cp

    na, nb = targets.shape
    caps = np.array([(1 - abs(c)) ** 2 for c in offsets])
    Z = cp.Variable((na + nb, na + nb), symmetric=True)
    t = cp.Variable()
    cons = [Z >> 0, Z[:na, na:] == targets]
    cons += [Z[i, i] <= 1 - eps for i in range(na)]
    cons += [Z[na + j, na + j] <= t * caps[j] for j in range(nb)]
    cp.Problem(cp.Minimize(t), cons).solve(solver=cp.CLARABEL)
    if Z.value is None:
        return None
    gram = (Z.value[:na, :na] + Z.value[:na, :na].T) / 2 + eps * np.eye(na)
    ev, evec = np.linalg.eigh(gram)
    X = evec * np.sqrt(np.clip(ev, eps / 2, None))
    W = np.linalg.solve(X, targets)
    return X, W.T


def ebit_to_hyperbit(p, strategy="auto"):
    """Hyperbit protocol with the same answer expectation on every input pair.

    The protocol is symmetrized if needed and its vectors extracted. Each
    y_{b,A} is split into its overlap ``c`` with the identity vector and its
    projection onto the span of Alice's vectors; Bob measures the normalized
    projection and post-processes with ``c' = |projection|``. The component
    orthogonal to every hyperbit Alice can send never affects an outcome, so
    dropping it is exact.

    ``strategy="per_message"`` stops there. ``"auto"`` falls back, per Bob
    input, to a coin-averaged split when some ``|c| + |c'|`` exceeds 1, and
    finally to a semidefinite re-factorization of the whole table. Raises
    :class:`PostprocessingInfeasibleError` when nothing fits.
    """
    if strategy not in ("auto", "per_message"):
        raise ValueError(f"unknown strategy {strategy!r}")
    ps = p if is_symmetric(p) else symmetrize(p)
    alice_labels, enc, parts, _ = _affine_parts(ps)
    fallback = np.eye(enc.shape[1])[0]
    encode = {a: HyperbitState(enc[i]) for i, a in enumerate(alice_labels)}

    bob, violations, used = {}, [], "per_message"
    for b, (c, w) in parts.items():
        units = {A: _unit(w[A], fallback) for A in MESSAGES}
        worst = max(abs(c[A]) + units[A][1] for A in MESSAGES)
        if worst <= 1 + EQUIV_TOL:
            bob[b] = {A: BobRecord.from_affine(c[A], units[A][1], units[A][0]) for A in MESSAGES}
            continue
        if strategy == "per_message":
            violations += [(b, A, abs(c[A]) + units[A][1]) for A in MESSAGES]
            continue
        cbar = (c[1] + c[-1]) / 2
        u, n = _unit((w[1] - w[-1]) / 2, fallback)
        if abs(cbar) + n <= 1 + EQUIV_TOL:
            bob[b] = {A: BobRecord.from_affine(cbar, n, A * u) for A in MESSAGES}
            used = "coin_averaged"
        else:
            violations.append((b, None, abs(cbar) + n))

    if violations and strategy == "auto":
        logger.info("vector decomposition infeasible for %d Bob inputs; re-factorizing", len(violations))
        bob_labels = list(parts)
        offsets = [(parts[b][0][1] + parts[b][0][-1]) / 2 for b in bob_labels]
        targets = np.array(
            [[float(x @ (parts[b][1][1] - parts[b][1][-1])) / 2 for b in bob_labels] for x in enc]
        )
        fac = _factorize(enc, targets, offsets)
        if fac is not None:
            X, W = fac
            margins = [abs(cb) + np.linalg.norm(Wb) for cb, Wb in zip(offsets, W)]
            if max(margins) <= 1 + EQUIV_TOL and np.linalg.norm(X, axis=1).max() <= 1 + STRUCT_TOL:
                encode = {a: HyperbitState(X[i]) for i, a in enumerate(alice_labels)}
                fb = np.eye(X.shape[1])[0]
                bob = {}
                for b, cb, Wb in zip(bob_labels, offsets, W):
                    u, n = _unit(Wb, fb)
                    bob[b] = {A: BobRecord.from_affine(cb, n, A * u) for A in MESSAGES}
                violations, used = [], "factorized"
    if violations:
        raise PostprocessingInfeasibleError(
            f"no postprocessing with |c| + |c'| <= 1 for {len(violations)} Bob record(s)",
            violations,
        )
    return HyperbitProtocol(encode, bob, used)


def hyperbit_to_ebit(h):
    """Entanglement-plus-one-bit protocol reproducing a direct-measurement hyperbit protocol.

    Alice's vectors are lifted to unit length with one extra coordinate so her
    observables are projective; Bob's effective vector for input b is
    ``(meas[b, +1] - meas[b, -1]) / 2``. Alice sends her outcome and Bob
    answers with its product with his own outcome.
    """
    if not h.is_direct:
        raise UnsupportedFormError(
            "only protocols with c = 0 and q = 0 are supported; compose postprocessing classically"
        )
    alice_labels, bob_labels = list(h.encode), list(h.bob)
    d = max(
        [h.encode[a].dim for a in alice_labels]
        + [h.bob[b][A].meas.dim for b in bob_labels for A in MESSAGES]
    )
    xs = []
    for a in alice_labels:
        x = np.pad(h.encode[a].coords, (0, d - h.encode[a].dim))
        xs.append(np.append(x, np.sqrt(max(1 - x @ x, 0.0))))
    ys = []
    for b in bob_labels:
        m = [np.pad(h.bob[b][A].meas.coords, (0, d - h.bob[b][A].meas.dim)) for A in MESSAGES]
        ys.append(np.append((m[0] - m[1]) / 2, 0.0))
    xs = np.array(xs)
    xs /= np.maximum(np.linalg.norm(xs, axis=1), 1.0)[:, None]
    qs = tsirelson.embed(tsirelson.VectorStrategy(xs, np.array(ys)))
    alice = dict(zip(alice_labels, qs.alice_obs))
    bob = {b: (o.matrix, -o.matrix) for b, o in zip(bob_labels, qs.bob_obs)}
    return EBitProtocol(qs.rho, alice, bob)


def protocol_from_dict(d):
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "ebit":
        return EBitProtocol.from_dict(d)
    if kind == "hyperbit":
        return HyperbitProtocol.from_dict(d)
    raise ValidationError(f"protocol kind must be 'ebit' or 'hyperbit', got {kind!r}")
