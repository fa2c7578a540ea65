import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from embedlab import cli, io
from embedlab.errors import InvalidInput

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(arrays(np.float64, (3, 3), elements=finite))
def test_real_matrix_round_trip_is_exact(M):
    back = io.matrix_from_json(json.loads(io.dumps(io.matrix_to_json(M))))
    assert np.array_equal(back, M)


@given(arrays(np.float64, (2, 2), elements=finite), arrays(np.float64, (2, 2), elements=finite))
def test_complex_matrix_round_trip_is_exact(re, im):
    M = re + 1j * im
    back = io.matrix_from_json(json.loads(io.dumps(io.matrix_to_json(M))))
    assert np.array_equal(back.real, M.real) and np.array_equal(back.imag, M.imag)


def test_schema_errors():
    for bad in ({}, {"d": 2}, {"d": 2, "entries": [[1, 0]]}, {"d": 0, "entries": []}, {"d": 2, "entries": [["x", 0], [0, 1]]}):
        with pytest.raises(InvalidInput):
            io.matrix_from_json(bad)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_matrix(tmp_path, name, M):
    path = tmp_path / name
    path.write_text(io.dumps(io.matrix_to_json(np.asarray(M, dtype=float))))
    return str(path)


def test_embed_check_identity(capsys, tmp_path):
    code, out, _ = run(capsys, "embed-check", "--matrix", write_matrix(tmp_path, "i.json", np.eye(3)))
    assert code == 0 and json.loads(out)["status"] == "Embeddable"


def test_embed_check_negative_and_circulant(capsys, tmp_path):
    path = write_matrix(tmp_path, "p.json", [[1 / 3, 2 / 3], [2 / 3, 1 / 3]])
    code, out, _ = run(capsys, "embed-check", "--matrix", path)
    assert code == 2 and json.loads(out)["status"] == "NotEmbeddable"
    code, out, _ = run(capsys, "embed-check", "--circulant", "0.1", "0.1")
    assert code == 0 and json.loads(out)["witness"][0]["duration"] == 1.0
    code, out, _ = run(capsys, "embed-check", "--circulant", "1", "0")
    assert code == 2


def test_embed_check_limit_witness_is_strict_json(capsys, tmp_path):
    path = write_matrix(tmp_path, "e.json", [[1, 1], [0, 0]])
    code, out, _ = run(capsys, "embed-check", "--matrix", path)
    w = json.loads(out)["witness"][0]
    assert code == 0 and w["duration"] is None and w["limit"]


def test_malformed_input_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = run(capsys, "embed-check", "--matrix", str(bad))
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "invalid-input"
    code, _, err = run(capsys, "embed-check", "--matrix", str(tmp_path / "missing.json"))
    assert code == 1 and json.loads(err)["error"] == "invalid-input"
    path = write_matrix(tmp_path, "ns.json", [[0.5, 0.5], [0.6, 0.5]])
    code, _, err = run(capsys, "embed-check", "--matrix", path)
    assert code == 1


def test_qembed_round_trip(capsys, tmp_path):
    path = write_matrix(tmp_path, "p.json", [[1 / 3, 2 / 3], [2 / 3, 1 / 3]])
    code, out, _ = run(capsys, "qembed", "--matrix", path)
    obj = json.loads(out)
    assert code == 0 and obj["achieved_error"] < 1e-9
    assert np.allclose(io.matrix_from_json(obj["achieved"]), [[1 / 3, 2 / 3], [2 / 3, 1 / 3]])
    assert [s["kind"] for s in obj["stages"]] == ["classical", "dephasing", "unitary"]
    H = io.matrix_from_json(obj["stages"][2]["hamiltonian"])
    assert np.allclose(H, H.conj().T)


def test_qembed_function_and_negative(capsys, tmp_path):
    path = write_matrix(tmp_path, "f.json", [[1, 1, 0], [0, 0, 1], [0, 0, 0]])
    code, out, _ = run(capsys, "qembed", "--matrix", path)
    assert code == 0 and json.loads(out)["achieved_error"] < 1e-9
    half = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    code, out, _ = run(capsys, "qembed", "--matrix", write_matrix(tmp_path, "h.json", half), "--seed", "1")
    assert code == 2 and json.loads(out)["status"] == "NoRealizationFound"


def test_region_scan_rows_and_determinism(capsys, tmp_path):
    code, out1, _ = run(capsys, "region-scan", "--grid", "9", "--threads", "1")
    lines = out1.strip().split("\n")
    assert code == 0 and lines[0] == "a,b,classification" and len(lines) == 82
    assert lines[1] == "0.0,0.0,ClassicalEmbeddable"
    code, out2, _ = run(capsys, "region-scan", "--grid", "9", "--threads", "2")
    assert out1 == out2
    png = tmp_path / "r.png"
    run(capsys, "region-scan", "--grid", "5", "--threads", "1", "--plot", str(png))
    assert png.stat().st_size > 0


def test_cost_table_rows(capsys):
    code, out, _ = run(capsys, "cost-table", "--function", "f1", "--bits", "32", "--mem", "1,2,4,...")
    lines = out.strip().split("\n")
    assert code == 0 and len(lines) == 1 + 33
    assert lines[1].split(",")[:4] == ["1", str(2**32 + 1), str(2**32 + 2), str(2**32 + 1)]
    assert lines[-1].split(",")[0] == str(2**32)
    code, _, err = run(capsys, "cost-table", "--function", "f1")
    assert code == 1


def test_cost_table_from_file(capsys, tmp_path):
    path = tmp_path / "f.json"
    path.write_text("[1, 2, 0]")
    code, out, _ = run(capsys, "cost-table", "--function", str(path), "--mem", "0,1")
    rows = out.strip().split("\n")
    assert code == 0 and rows[1].startswith("0,inf")


def test_typicality_seed_determinism(capsys, monkeypatch):
    code, a, _ = run(capsys, "typicality", "--d", "100", "--trials", "50", "--seed", "7")
    monkeypatch.setenv("EMBEDLAB_SEED", "7")
    code, b, _ = run(capsys, "typicality", "--d", "100", "--trials", "50")
    assert code == 0 and a == b
    monkeypatch.setenv("EMBEDLAB_SEED", "oops")
    code, _, err = run(capsys, "typicality", "--d", "100", "--trials", "5")
    assert code == 1


def test_access_region(capsys, tmp_path):
    p, g = tmp_path / "p.json", tmp_path / "g.json"
    p.write_text("[0.9, 0.1]")
    g.write_text(json.dumps([np.e / (1 + np.e), 1 / (1 + np.e)]))
    code, out, _ = run(capsys, "access-region", "--p", str(p), "--gamma", str(g))
    lp = json.loads(out)["memory_ground_interval"]
    code, out, _ = run(capsys, "access-region", "--p", str(p), "--gamma", str(g), "--closed-form")
    cf = json.loads(out)
    assert cf["memory_ground_interval"] == pytest.approx(lp, abs=1e-9)
    assert cf["memoryless_ground_interval"][0] == pytest.approx(0.731059, abs=1e-6)
    p.write_text("[0.5, 0.3, 0.2]")
    g.write_text("[0.5, 0.3, 0.2]")
    code, _, err = run(capsys, "access-region", "--p", str(p), "--gamma", str(g), "--closed-form")
    assert code == 1 and json.loads(err)["error"] == "unsupported-dimension"


def test_qubit_path_and_audit_pipeline(capsys, tmp_path):
    traj = tmp_path / "t.csv"
    code, _, _ = run(
        capsys, "qubit-path", "--x", "0", "--z", "-0.3333333333333333", "--zeta", "0.5", "--out", str(traj)
    )
    rows = traj.read_text().strip().split("\n")
    assert code == 0 and rows[0] == "step,x,z,R_plus,R_minus,radial_deviation" and len(rows) > 90
    code, out, _ = run(
        capsys, "free-energy-audit", "--trajectory", str(traj), "--levels", "0,1.0986122886681098", "--beta", "1"
    )
    lines = out.strip().split("\n")
    assert code == 0 and lines[0] == "t,F,F_Q,A" and len(lines) == len(rows)
    fq = [float(l.split(",")[2]) for l in lines[1:]]
    assert all(b <= a + 1e-8 for a, b in zip(fq, fq[1:]))


def test_free_energy_audit_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("step,x\n0,0.1\n1,0.2\n")
    code, _, err = run(capsys, "free-energy-audit", "--trajectory", str(bad), "--levels", "0,1", "--beta", "1")
    assert code == 1


def test_plots_are_written(capsys, tmp_path):
    for argv in (
        ["cost-table", "--function", "f2", "--bits", "8"],
        ["qubit-path", "--x", "0", "--z", "0.8", "--zeta", "0.25", "--descend"],
    ):
        png = tmp_path / (argv[0] + ".png")
        code, _, _ = run(capsys, *argv, "--plot", str(png))
        assert code == 0 and png.stat().st_size > 0
