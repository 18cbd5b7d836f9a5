from __future__ import annotations

import io
import subprocess
import sys

import pytest

from phasesig.cli import allowed_misses, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_validate_ok():
    code, out, _ = call("--spec", "example3", "--command", "validate")
    assert code == 0
    assert "5 phases, 10 components, 4 physical types" in out


def test_signature_example1(tmp_path):
    code, out, _ = call("--spec", "example1", "--command", "signature", "--out-dir", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "signature_p3.csv").read_text().splitlines()
    assert rows[1:] == ["3,2,2,2,3,0.666666666667", "3,3,2,2,3,0.666666666667", "3,3,3,1,1,1"]
    assert "2/3" in out and "Phi_3" in out


def test_reliability_example2(tmp_path):
    code, out, _ = call("--spec", "example2", "--command", "reliability", "--out-dir", str(tmp_path))
    assert code == 0
    assert "t=10: R(t-)=0.9997680  R(t+)=0.9995362  jump=2.31795" in out
    lines = (tmp_path / "reliability.csv").read_text().splitlines()
    assert lines[0] == "t,side,R,jump"
    assert any(line.startswith("10.0,left,") for line in lines)


def test_outputs_are_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert call("--spec", "example3", "--command", "simulate", "--trials", "3000",
                    "--grid", "5", "--out-dir", str(d))[0] == 0
        assert call("--spec", "example3", "--command", "reliability", "--out-dir", str(d))[0] == 0
    for name in ("simulation.csv", "reliability.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_threads_flag_does_not_change_results(tmp_path):
    for n, d in (("1", "x"), ("2", "y")):
        call("--spec", "example1", "--command", "simulate", "--trials", "5000",
             "--threads", n, "--out-dir", str(tmp_path / d))
    assert (tmp_path / "x" / "simulation.csv").read_bytes() == (tmp_path / "y" / "simulation.csv").read_bytes()


def test_verify_passes(tmp_path):
    code, out, _ = call("--spec", "example1", "--command", "verify", "--trials", "20000",
                        "--out-dir", str(tmp_path))
    assert code == 0 and "0 of 6 points" in out
    assert (tmp_path / "verify.csv").read_text().splitlines()[0].endswith("analytic,contained")


def test_verify_exit_code_on_misses(tmp_path, monkeypatch):
    import phasesig.cli as cli
    monkeypatch.setattr(cli, "system_reliability", lambda *a, **k: 0.5)
    code, out, _ = call("--spec", "example1", "--command", "verify", "--trials", "2000",
                        "--out-dir", str(tmp_path))
    assert code == 2 and "MISS" in out


def test_parse_and_semantic_failures_exit_1(tmp_path):
    bad = tmp_path / "bad.pms"
    bad.write_text("boundaries 0 1 2\ntype u hazard 0.5 0.5\ncomponent A : u\n"
                   "phase 1 {A} and(comp A,)\nphase 2 {A} comp A\n")
    code, _, err = call("--spec", str(bad), "--command", "validate")
    assert code == 1 and "line 4" in err
    bad.write_text("boundaries 0 1 2\ntype u hazard 0.5\ncomponent A : u\n"
                   "phase 1 {A} comp A\nphase 2 {A} comp A\n")
    code, _, err = call("--spec", str(bad), "--command", "validate")
    assert code == 1 and "lifetime" in err
    code, _, err = call("--spec", str(tmp_path / "missing.pms"), "--command", "validate")
    assert code == 1


def test_relaxation_refused_exits_1(tmp_path):
    spec = tmp_path / "w.pms"
    spec.write_text("boundaries 0 1 2\ntype w global weibull(3, 2)\ncomponent A B : w\n"
                    "phase 1 {A} comp A\nphase 2 {A, B} or(comp A, comp B)\n")
    code, _, err = call("--spec", str(spec), "--command", "signature", "--relax-exponential",
                        "--out-dir", str(tmp_path))
    assert code == 1 and "history-dependent" in err


def test_bad_command_is_rejected():
    with pytest.raises(SystemExit):
        call("--spec", "example1", "--command", "explode")


def test_allowed_misses():
    assert allowed_misses(6) == 1
    assert allowed_misses(250) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "phasesig", "--spec", "example1", "--command", "validate"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "3 phases" in proc.stdout
