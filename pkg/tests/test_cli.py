import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tanglekit.cli import VERIFY_COLUMNS, UsageError, main, parse_number, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


# -- gen -----------------------------------------------------------------------


def test_gen_ghz_file(tmp_path, capsys):
    path = tmp_path / "g4.json"
    code, out, _ = run(capsys, "gen", "--family", "ghz", "--n", "4", "--out", str(path))
    assert code == 0
    assert "norm" in out and "basis" in out
    doc = json.loads(path.read_text())
    amps = np.array([complex(*a) for a in doc["amplitudes"]])
    nz = np.flatnonzero(amps)
    assert list(nz) == [0, 15]
    assert np.allclose(amps[nz], 1 / math.sqrt(2))


def test_gen_haar_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "gen", "--family", "haar", "--n", "5", "--seed", "7", "--out", str(a))[0] == 0
    assert run(capsys, "gen", "--family", "haar", "--n", "5", "--seed", "7", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_bad_n(capsys):
    code, _, err = run(capsys, "gen", "--family", "w", "--n", "0")
    assert code == 2 and "error" in err


def test_gen_stdout_and_params(capsys):
    code, out, err = run(capsys, "gen", "--family", "gghz", "--n", "3", "--param", "pi/6")
    assert code == 0
    doc = json.loads(out)
    assert doc["amplitudes"][0][0] == pytest.approx(math.cos(math.pi / 6))
    assert "norm" in err


def test_usage_errors_exit_2(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "gen", "--family", "ghz")[0] == 2


# -- analyze --------------------------------------------------------------------


def _gen(capsys, tmp_path, family, n, name):
    path = tmp_path / name
    assert run(capsys, "gen", "--family", family, "--n", str(n), "--out", str(path))[0] == 0
    return path


def test_analyze_ghz3(tmp_path, capsys):
    path = _gen(capsys, tmp_path, "ghz", 3, "g3.json")
    code, out, _ = run(capsys, "analyze", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["one_tangle"] == pytest.approx(1, abs=1e-10)
    assert rep["triples"][0]["three_tangle"] == pytest.approx(1, abs=1e-10)


def test_analyze_product(tmp_path, capsys):
    path = _gen(capsys, tmp_path, "product", 3, "p.json")
    code, out, _ = run(capsys, "analyze", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["one_tangle"] == 0
    assert all(p["two_tangle"] == 0 for p in rep["pairs"])
    assert rep["triples"][0]["three_tangle"] == 0


def test_analyze_corrupted(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_qubits": 3, "amplitudes": [[1, 0]]')
    assert run(capsys, "analyze", str(bad))[0] == 2
    assert run(capsys, "analyze", str(tmp_path / "missing.json"))[0] == 2


def test_analyze_source_must_be_unique(tmp_path, capsys):
    path = _gen(capsys, tmp_path, "ghz", 3, "g3.json")
    assert run(capsys, "analyze", str(path), "--family", "ghz", "--n", "3")[0] == 2
    assert run(capsys, "analyze")[0] == 2


def test_analyze_hard_violation_exit_1(capsys):
    # GHZ_5: the odd-N n4 sum rule identity fails (sum 2 against tau_1 = 1)
    code, out, _ = run(capsys, "analyze", "--family", "ghz", "--n", "5", "--roof-restarts", "2")
    assert code == 1
    rep = json.loads(out)
    assert [v["id"] for v in rep["verdicts"] if v["status"] == "violation"] == ["n4sum"]


def test_analyze_csv_and_focus(tmp_path, capsys):
    out_path = tmp_path / "r.csv"
    code, _, _ = run(capsys, "analyze", "--family", "w", "--n", "3", "--focus", "2", "--format", "csv", "--out", str(out_path))
    assert code == 0
    header, row = rows_of(out_path.read_text())
    rec = dict(zip(header, row))
    assert rec["focus"] == "2"
    assert float(rec["two_tangle_1"]) == pytest.approx(2 / 3, abs=1e-12)
    assert float(rec["one_tangle"]) == pytest.approx(8 / 9, abs=1e-12)


# -- verify ---------------------------------------------------------------------------


def test_verify_ckw(tmp_path, capsys):
    out_path = tmp_path / "ckw.csv"
    code, _, err = run(capsys, "verify", "--check", "ckw", "--n", "3", "--samples", "1000", "--seed", "42", "--out", str(out_path))
    assert code == 0
    rows = rows_of(out_path.read_text())
    assert tuple(rows[0]) == VERIFY_COLUMNS
    assert len(rows) == 1001
    res = [abs(float(r[VERIFY_COLUMNS.index("residual")])) for r in rows[1:]]
    assert max(res) <= 1e-8
    assert "max|residual|" in err


def test_verify_ov_n5(capsys):
    code, out, _ = run(capsys, "verify", "--check", "ov", "--n", "5", "--samples", "1000")
    assert code == 0
    assert len(rows_of(out)) == 1001


def test_verify_ckw_wrong_n(capsys):
    assert run(capsys, "verify", "--check", "ckw", "--n", "4")[0] == 2


def test_verify_bad_check(capsys):
    assert run(capsys, "verify", "--check", "nope", "--n", "3")[0] == 2


def test_verify_bad_samples(capsys):
    assert run(capsys, "verify", "--check", "ov", "--n", "3", "--samples", "0")[0] == 2


def test_verify_header_always_and_17_digits(capsys):
    code, out, _ = run(capsys, "verify", "--check", "n4sum", "--n", "3", "--samples", "3", "--seed", "5")
    assert code == 0
    rows = rows_of(out)
    lhs = rows[1][VERIFY_COLUMNS.index("lhs")]
    assert float(lhs) == float(format(float(lhs), ".17g"))
    assert len(lhs.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) >= 15


def test_verify_byte_identical_and_thread_independent(tmp_path, capsys, monkeypatch):
    args = ["verify", "--check", "all", "--n", "4", "--samples", "3", "--seed", "9", "--roof-restarts", "2"]
    monkeypatch.setenv("TANGLEKIT_THREADS", "1")
    a = tmp_path / "a.csv"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    b = tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("TANGLEKIT_THREADS", "2")
    c = tmp_path / "c.csv"
    monkeypatch.setattr("os.cpu_count", lambda: 2)
    assert run(capsys, *args, "--out", str(c))[0] == 0
    assert a.read_bytes() == c.read_bytes()


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "--check", "criterion", "--n", "3", "--samples", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc) == 2 and doc[0]["verdicts"][-1]["id"] == "criterion"


# -- sweep ---------------------------------------------------------------------------------


def test_sweep_ghz_w(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "ghz_w", "--n", "3", "--param", "0:pi/2:pi/40")
    assert code == 0
    rows = rows_of(out)
    header, body = rows[0], rows[1:]
    assert len(body) == 21
    col = header.index("three_tangle_2_3")
    tau = [float(r[col]) for r in body]
    assert tau[0] == pytest.approx(1, abs=1e-10)
    assert tau[-1] == pytest.approx(0, abs=1e-10)
    assert float(body[-1][0]) == pytest.approx(math.pi / 2)


def test_sweep_step_zero(capsys):
    assert run(capsys, "sweep", "--family", "gghz", "--n", "3", "--param", "0:1:0")[0] == 2


def test_sweep_malformed_range(capsys):
    assert run(capsys, "sweep", "--family", "gghz", "--n", "3", "--param", "0:1")[0] == 2
    assert run(capsys, "sweep", "--family", "gghz", "--n", "3", "--param", "0:x:1")[0] == 2
    assert run(capsys, "sweep", "--family", "gghz", "--n", "3", "--param", "1:0:0.5")[0] == 2


def test_sweep_single_point(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "gghz", "--n", "3", "--param", "0.3:0.3:0.1")
    assert code == 0
    assert len(rows_of(out)) == 2


# -- parsers ---------------------------------------------------------------------------------


def test_parse_number():
    assert parse_number("pi/4") == pytest.approx(math.pi / 4)
    assert parse_number("-2*pi + 1e-3") == pytest.approx(-2 * math.pi + 1e-3)
    for bad in ("__import__('os')", "pi/0", "x", "True"):
        with pytest.raises(UsageError):
            parse_number(bad)


def test_parse_range():
    assert parse_range("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("1:0:-0.5") == [1, 0.5, 0]
    assert len(parse_range("0:pi/2:pi/40")) == 21


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    proc = subprocess.run([sys.executable, "-m", "tanglekit", "gen", "--family", "w", "--n", "3", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "tanglekit", "analyze", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["one_tangle"] == pytest.approx(8 / 9)
