"""Command-line entry point: conversions, identity checks, IC audits and sweeps.

Exit codes: 0 success, 1 a bound or equivalence was violated (a finding),
2 invalid input, 3 conversion infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__, instances
from ._config import EQUIV_TOL
from .exceptions import (
    HyperbitError,
    PostprocessingInfeasibleError,
    UnsupportedFormError,
    ValidationError,
)
from .hyperball import MeasurementVector
from .infocausality import BitEnsemble, ic_audit, optimal_measurements
from .protocols import (
    EBitProtocol,
    ebit_table,
    ebit_to_hyperbit,
    feasibility_margins,
    hyperbit_table,
    hyperbit_to_ebit,
    protocol_from_dict,
)
from .queries import (
    KOENIG_BENCHMARK,
    EncodingScheme,
    QueryMatrix,
    biases,
    hadamard,
    koenig_compare,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FINDING, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Report:
    command: str
    meta: dict
    header: list
    rows: list
    summary: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    status: int = EXIT_OK

    def to_json(self):
        payload = {
            "command": self.command,
            "meta": self.meta,
            "summary": self.summary,
            "table": [dict(zip(self.header, r)) for r in self.rows],
            **self.extra,
        }
        return json.dumps(payload, indent=2, sort_keys=True, default=_plain) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        meta = " ".join(f"{k}={self.meta[k]}" for k in sorted(self.meta))
        buf.write(f"# {self.command} {meta}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()

    def render(self, fmt):
        return self.to_csv() if fmt == "csv" else self.to_json()


class InputError(HyperbitError):
    pass


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def parse_file(path, loader):
    """Load ``path`` and build an object; schema problems become InputError."""
    raw = load_json(path)
    try:
        return loader(raw)
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError, IndexError) as exc:
        raise InputError(f"{path} does not match the expected schema: {exc!r}") from None


def _meta(args):
    return {
        "seed": args.seed,
        "trials": args.trials,
        "tol": args.tol,
        "version": __version__,
    }


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- convert ----------------------------------------------------------------------


def _equivalence_rows(p, q):
    """Per input pair: original expectation, converted expectation, residual."""
    orig = ebit_table(p) if isinstance(p, EBitProtocol) else hyperbit_table(p)
    conv = ebit_table(q) if isinstance(q, EBitProtocol) else hyperbit_table(q)
    a_labels = list(p.alice if isinstance(p, EBitProtocol) else p.encode)
    b_labels = list(p.bob)
    rows = []
    for i, a in enumerate(a_labels):
        for j, b in enumerate(b_labels):
            rows.append([str(a), str(b), float(orig[i, j]), float(conv[i, j]),
                         float(abs(orig[i, j] - conv[i, j]))])
    return rows


def cmd_convert(args):
    meta = _meta(args)
    if args.inputs:
        p = parse_file(args.inputs[0], protocol_from_dict)
        if isinstance(p, EBitProtocol):
            q = ebit_to_hyperbit(p, strategy=args.strategy)
        else:
            q = hyperbit_to_ebit(p)
        rows = _equivalence_rows(p, q)
        worst = max(r[-1] for r in rows)
        rep = Report(
            "convert", meta, ["a", "b", "original", "converted", "residual"], rows,
            summary={"max_residual": worst, "from": p.to_dict()["kind"],
                     "construction": getattr(q, "construction", "tsirelson")},
            extra={"converted": q.to_dict()},
        )
        rep.status = EXIT_FINDING if worst > args.tol else EXIT_OK
        return rep

    rng = np.random.default_rng(args.seed)
    rows, infeasible, literal_bad, per_msg_bad = [], 0, 0, 0
    for t in range(args.trials):
        p = instances.ebit_protocol(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        literal = max(feasibility_margins(p, projected=False).values())
        projected = max(feasibility_margins(p).values())
        literal_bad += literal > 1 + EQUIV_TOL
        per_msg_bad += projected > 1 + EQUIV_TOL
        try:
            h = ebit_to_hyperbit(p, strategy=args.strategy)
        except PostprocessingInfeasibleError as exc:
            infeasible += 1
            logger.warning("trial %d: %s", t, exc)
            rows.append([t, len(p.alice), len(p.bob), literal, projected, "infeasible", ""])
            continue
        worst = float(np.abs(ebit_table(p) - hyperbit_table(h)).max())
        rows.append([t, len(p.alice), len(p.bob), literal, projected, h.construction, worst])
    residuals = [r[-1] for r in rows if r[-1] != ""]
    worst = max(residuals) if residuals else 0.0
    rep = Report(
        "convert", meta,
        ["trial", "n_alice", "n_bob", "margin_unprojected", "margin_projected",
         "construction", "max_residual"],
        rows,
        summary={
            "max_residual": worst,
            "infeasible": infeasible,
            "unprojected_infeasible": int(literal_bad),
            "per_message_infeasible": int(per_msg_bad),
        },
    )
    if infeasible:
        rep.status = EXIT_INFEASIBLE
    elif worst > args.tol:
        rep.status = EXIT_FINDING
    return rep


# -- identity ---------------------------------------------------------------------


def _load_queries(path, n):
    if path is None:
        return hadamard(n)
    return parse_file(path, QueryMatrix.from_dict)


def cmd_identity(args):
    meta = _meta(args)
    if args.inputs:
        enc = parse_file(args.inputs[0], EncodingScheme.from_dict).padded()
        F = _load_queries(args.inputs[1] if len(args.inputs) > 1 else None, enc.size.bit_length() - 1)
        rep_b = biases(F, enc)
        rows = [list(r) for r in rep_b.rows()]
        rep = Report("identity", meta, ["i", "E", "E_sq"], rows, summary=rep_b.to_dict())
        rep.status = EXIT_FINDING if rep_b.residual > args.tol else EXIT_OK
        return rep

    rng = np.random.default_rng(args.seed)
    rows = []
    for t in range(args.trials):
        n = int(rng.integers(1, args.max_n + 1))
        dim = int(rng.integers(1, args.max_dim + 1))
        enc = instances.encoding(rng, n, dim, sparsity=0.2)
        r = biases(hadamard(n), enc)
        rows.append([t, n, dim, r.lhs, r.rhs, r.residual])
    worst = max(r[-1] for r in rows) if rows else 0.0
    rep = Report("identity", meta, ["trial", "n", "dim", "lhs", "rhs", "residual"], rows,
                 summary={"max_residual": worst})
    rep.status = EXIT_FINDING if worst > args.tol else EXIT_OK
    return rep


# -- ic ---------------------------------------------------------------------------


def _parse_rows(text, F):
    if text is None:
        return [i for i in range(F.size) if i not in F.trivial_rows()]
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--rows must be comma-separated integers, got {text!r}") from None


def _ensemble_from_dict(d, n):
    """{"bits": [row, ...]} with optional "queries" (a query-matrix dict)."""
    F = QueryMatrix.from_dict(d["queries"]) if "queries" in d else hadamard(n)
    return BitEnsemble(F, [int(r) for r in d["bits"]])


def cmd_ic(args):
    meta = _meta(args)
    if args.inputs:
        enc = parse_file(args.inputs[0], EncodingScheme.from_dict)
        n = enc.size.bit_length() - 1
        if len(args.inputs) > 1:
            ens = parse_file(args.inputs[1], lambda d: _ensemble_from_dict(d, n))
        else:
            F = hadamard(n)
            ens = BitEnsemble(F, _parse_rows(args.rows, F))
        if args.meas:
            meas = parse_file(args.meas, lambda d: [MeasurementVector(m) for m in d["measurements"]])
        else:
            meas = optimal_measurements(ens, enc)
        r = ic_audit(ens, enc, meas)
        rows = [[int(row), float(i), float(b)] for row, i, b in zip(ens.rows, r.mutual_info, r.bound_terms)]
        rep = Report("ic", meta, ["row", "mutual_info", "bound_term"], rows, summary=r.to_dict())
        rep.status = EXIT_OK if r.bound_holds and r.chain_holds else EXIT_FINDING
        return rep

    rng = np.random.default_rng(args.seed)
    F = hadamard(2)
    ens = BitEnsemble(F, _parse_rows(args.rows, F))
    rows, worst, chain_ok = [], 0.0, True
    for t in range(args.trials):
        dim = int(rng.integers(1, args.max_dim + 1))
        enc = instances.encoding(rng, 2, dim, uniform=True, unit=True)
        r = ic_audit(ens, enc, optimal_measurements(ens, enc))
        rows.append([t, dim, r.total, r.bound_total, r.chain_holds])
        worst = max(worst, r.total)
        chain_ok &= r.chain_holds
    rep = Report("ic", meta, ["trial", "dim", "total", "bound_total", "chain_holds"], rows,
                 summary={"max_total": worst, "chain_holds": bool(chain_ok)})
    rep.status = EXIT_OK if worst <= 1 + args.tol and chain_ok else EXIT_FINDING
    return rep


# -- koenig -----------------------------------------------------------------------


def cmd_koenig(args):
    meta = _meta(args)
    if args.inputs:
        enc = parse_file(args.inputs[0], EncodingScheme.from_dict)
        r = koenig_compare(enc)
        rows = [[name, e, p] for name, e, p in zip(("a0", "a1", "a0^a1"), r.biases, r.success_probs)]
        rep = Report("koenig", meta, ["query", "E", "P"], rows, summary=r.to_dict())
        rep.status = EXIT_OK if r.e_sq_sum <= 1 + args.tol else EXIT_FINDING
        return rep

    rng = np.random.default_rng(args.seed)
    rows, worst = [], 0.0
    for t in range(args.trials):
        dim = int(rng.integers(1, args.max_dim + 1))
        r = koenig_compare(instances.encoding(rng, 2, dim, uniform=True, unit=True))
        rows.append([t, dim, r.p_sum, r.e_sq_sum])
        worst = max(worst, r.e_sq_sum)
    rep = Report("koenig", meta, ["trial", "dim", "p_sum", "e_sq_sum"], rows,
                 summary={"max_e_sq_sum": worst, "benchmark": KOENIG_BENCHMARK})
    rep.status = EXIT_OK if worst <= 1 + args.tol else EXIT_FINDING
    return rep


COMMANDS = {
    "convert": cmd_convert,
    "identity": cmd_identity,
    "ic": cmd_ic,
    "koenig": cmd_koenig,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hyperbits",
        description="Hyperbit protocol conversions, bias identities and information-causality audits.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials):
        p.add_argument("inputs", nargs="*", help="input files; omit to run a seeded random sweep")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--tol", type=float, default=EQUIV_TOL)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--max-dim", type=int, default=8)

    p = sub.add_parser("convert", help="convert between e-bit and hyperbit protocols")
    common(p, 20)
    p.add_argument("--strategy", choices=("auto", "per_message"), default="auto")

    p = sub.add_parser("identity", help="check the squared-bias identity")
    common(p, 1000)
    p.add_argument("--max-n", type=int, default=4)

    p = sub.add_parser("ic", help="audit information causality for pairwise-independent bits")
    common(p, 10_000)
    p.add_argument("--rows", default=None, help="comma-separated audited query rows")
    p.add_argument("--meas", default=None, help='JSON file {"measurements": [[...], ...]}')

    p = sub.add_parser("koenig", help="compare the squared-bias bound with the success-sum bound")
    common(p, 1000)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        rep = COMMANDS[args.command](args)
    except (InputError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PostprocessingInfeasibleError, UnsupportedFormError) as exc:
        print(f"conversion infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(rep.render(args.format), args.out)
    return rep.status


if __name__ == "__main__":
    sys.exit(main())
