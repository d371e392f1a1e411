import json
import subprocess
import sys

import numpy as np
import pytest

from hyperbits import instances
from hyperbits.cli import main
from hyperbits.protocols import BobRecord, HyperbitProtocol
from hyperbits.queries import EncodingScheme, hadamard, symmetric_koenig_encoding


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_convert_sweep_json(capsys):
    code, out = run(["convert", "--trials", "5", "--seed", "3"], capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert rep["meta"] == {"seed": 3, "trials": 5, "tol": 1e-9, "version": "0.1.0"}
    assert rep["summary"]["max_residual"] <= 1e-8
    assert rep["summary"]["infeasible"] == 0
    assert len(rep["table"]) == 5


def test_convert_ebit_file(tmp_path, capsys):
    p = instances.ebit_protocol(np.random.default_rng(1), 2, 3)
    code, out = run(["convert", write(tmp_path / "p.json", p.to_dict())], capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert rep["converted"]["kind"] == "hyperbit"
    assert len(rep["table"]) == 6
    assert all(row["residual"] <= 1e-8 for row in rep["table"])


def test_convert_hyperbit_file(tmp_path, capsys):
    h = instances.hyperbit_protocol(np.random.default_rng(2), 2, 2, 3)
    code, out = run(["convert", write(tmp_path / "h.json", h.to_dict())], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert rep["converted"]["kind"] == "ebit"
    assert rep["summary"]["max_residual"] <= 1e-9


def test_convert_postprocessed_hyperbit_exit_3(tmp_path, capsys):
    h = instances.hyperbit_protocol(np.random.default_rng(2), 1, 1, 2, direct=False)
    code, out = run(["convert", write(tmp_path / "h.json", h.to_dict())], capsys)
    assert code == 3 and out.out == ""


def test_convert_per_message_infeasible_exit_3(tmp_path, capsys):
    p = instances.ebit_protocol(np.random.default_rng(1120), 6, 3, dims=(3, 2))
    path = write(tmp_path / "p.json", p.to_dict())
    code, _ = run(["convert", path, "--strategy", "per_message"], capsys)
    assert code == 3
    code, out = run(["convert", path], capsys)
    assert code == 0
    assert json.loads(out.out)["summary"]["construction"] == "factorized"


def test_malformed_json_no_partial_output(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out_path = tmp_path / "report.json"
    code, out = run(["convert", str(bad), "--out", str(out_path)], capsys)
    assert code == 2
    assert not out_path.exists()
    assert list(tmp_path.iterdir()) == [bad]
    assert "not valid JSON" in out.err


def test_schema_violation_exit_2(tmp_path, capsys):
    code, _ = run(["convert", write(tmp_path / "x.json", {"kind": "ebit", "rho": 3})], capsys)
    assert code == 2
    code, _ = run(["convert", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_identity_uniform_unit_file(tmp_path, capsys):
    enc = instances.encoding(np.random.default_rng(0), 3, 4, uniform=True, unit=True)
    code, out = run(["identity", write(tmp_path / "e.json", enc.to_dict())], capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert abs(rep["summary"]["lhs"] - 1) <= 1e-12
    assert len(rep["table"]) == 8


def test_identity_duplicated_row_exit_2(tmp_path, capsys):
    enc = instances.encoding(np.random.default_rng(0), 2, 2)
    rows = hadamard(2).rows.tolist()
    rows[3] = rows[2]
    code, _ = run(
        ["identity", write(tmp_path / "e.json", enc.to_dict()), write(tmp_path / "f.json", {"rows": rows})],
        capsys,
    )
    assert code == 2


def test_identity_sweep(capsys):
    code, out = run(["identity", "--trials", "200", "--format", "csv"], capsys)
    assert code == 0
    lines = out.out.splitlines()
    assert lines[0].startswith("# identity ") and "seed=0" in lines[0] and "version=0.1.0" in lines[0]
    assert lines[1] == "trial,n,dim,lhs,rhs,residual"
    assert len(lines) == 202
    assert max(float(line.split(",")[-1]) for line in lines[2:]) <= 1e-9


def test_ic_perfect_bit(tmp_path, capsys):
    enc = EncodingScheme([0.5, 0.5], [[1.0], [-1.0]])
    code, out = run(["ic", write(tmp_path / "e.json", enc.to_dict())], capsys)
    assert code == 0
    assert json.loads(out.out)["summary"]["total"] == pytest.approx(1.0, abs=1e-12)


def test_ic_dependent_ensemble_exit_2(tmp_path, capsys):
    enc = symmetric_koenig_encoding()
    e = write(tmp_path / "e.json", enc.to_dict())
    code, _ = run(["ic", e, write(tmp_path / "ens.json", {"bits": [1, 1]})], capsys)
    assert code == 2
    code, _ = run(["ic", e, "--rows", "1,1"], capsys)
    assert code == 2
    code, _ = run(["ic", e, write(tmp_path / "ens2.json", {"bits": [1, 2, 3]})], capsys)
    assert code == 0


def test_ic_sweep(capsys):
    code, out = run(["ic", "--trials", "300"], capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert rep["summary"]["max_total"] <= 1 + 1e-9 and rep["summary"]["chain_holds"]


def test_koenig_file_and_arity(tmp_path, capsys):
    code, out = run(["koenig", write(tmp_path / "k.json", symmetric_koenig_encoding().to_dict())], capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert abs(rep["summary"]["e_sq_sum"] - 1) <= 1e-9
    assert rep["summary"]["p_sum"] == pytest.approx(2.36603, abs=1e-5)
    zero = EncodingScheme(np.full(4, 0.25), np.zeros((4, 2)))
    code, out = run(["koenig", write(tmp_path / "z.json", zero.to_dict())], capsys)
    assert json.loads(out.out)["summary"]["p_sum"] == 1.5
    eight = instances.encoding(np.random.default_rng(0), 3, 2, uniform=True)
    code, _ = run(["koenig", write(tmp_path / "k8.json", eight.to_dict())], capsys)
    assert code == 2


def test_identity_finding_exit_1(tmp_path, capsys):
    enc = instances.encoding(np.random.default_rng(0), 2, 2)
    code, _ = run(["identity", write(tmp_path / "e.json", enc.to_dict()), "--tol", "-1"], capsys)
    assert code == 1


@pytest.mark.parametrize("cmd", ["convert", "identity", "ic", "koenig"])
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_byte_identical_reports(tmp_path, capsys, cmd, fmt):
    outs = []
    for k in range(2):
        path = tmp_path / f"{k}.{fmt}"
        assert main([cmd, "--seed", "11", "--trials", "8", "--format", fmt, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    main([cmd, "--seed", "12", "--trials", "8", "--format", fmt, "--out", str(tmp_path / "other")])
    assert (tmp_path / "other").read_bytes() != outs[0]


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "hyperbits", "koenig", "--trials", "3", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "trial,dim,p_sum,e_sq_sum"
