import json
import subprocess
import sys

import numpy as np
import pytest

from eacomm import cli
from eacomm.npa import SdpResult
from eacomm.report import Report, Row


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path, capsys):
    names = ["adaptive-ea-trit-rac", "chsh-ea-bit-rac", "facet-qubit-povm", "dense-coding",
             "na-ea-trit-rac"]
    for n in names:
        assert run(capsys, "strategy", n, "--out", tmp_path / f"{n}.json")[0] == 0
    return tmp_path


def test_eval_values(files, capsys):
    code, out, _ = run(capsys, "eval", "--strategy", files / "adaptive-ea-trit-rac.json", "--task", "rac",
                       "--json", files / "r.json")
    assert code == 0 and "0.9267766953" in out
    assert json.loads((files / "r.json").read_text())["value"] == pytest.approx((3 + 2**-0.5) / 4)
    code, out, _ = run(capsys, "eval", "--strategy", files / "facet-qubit-povm.json", "--task", "facet")
    assert code == 0 and "2.2500000000" in out
    code, out, _ = run(capsys, "eval", "--strategy", files / "dense-coding.json", "--task", "mesd")
    assert code == 0 and "1.0000000000" in out


def test_eval_writes_behavior_csv(files, capsys):
    code, _, _ = run(capsys, "eval", "--strategy", files / "chsh-ea-bit-rac.json", "--task", "rac",
                     "--json", files / "o.json", "--behavior-csv", files / "p.csv")
    assert code == 0 and (files / "p.csv").read_text().count("\n") > 4


def test_eval_input_errors(files, capsys):
    bad = files / "bad.json"
    bad.write_text("{oops")
    assert run(capsys, "eval", "--strategy", bad, "--task", "rac")[0] == 2
    assert run(capsys, "eval", "--strategy", files / "missing.json", "--task", "rac")[0] == 2
    # dimension mismatch between strategy and task
    assert run(capsys, "eval", "--strategy", files / "facet-qubit-povm.json", "--task", "rac")[0] == 2


def test_eval_invariant_violation(files, capsys):
    d = json.loads((files / "chsh-ea-bit-rac.json").read_text())
    d["alice"][0][0][0][0] = [0.95, 0.0]  # breaks completeness of Alice's first POVM
    path = files / "broken.json"
    path.write_text(json.dumps(d))
    code, _, err = run(capsys, "eval", "--strategy", path, "--task", "rac")
    assert code == 3 and "max violation" in err


def test_check_verdicts(files, capsys):
    code, out, _ = run(capsys, "check", "--strategy", files / "chsh-ea-bit-rac.json", "--json", files / "c.json")
    assert code == 0 and "NON-ADAPTIVE" in out
    assert json.loads((files / "c.json").read_text())["max_commutator"] < 1e-10
    code, out, _ = run(capsys, "check", "--strategy", files / "adaptive-ea-trit-rac.json", "--json", files / "c.json")
    assert code == 0 and "\nADAPTIVE" in out
    assert run(capsys, "check", "--strategy", files / "facet-qubit-povm.json")[0] == 2


def test_strategy_theta(files, capsys):
    out = files / "t.json"
    assert run(capsys, "strategy", "na-ea-trit-rac", "--theta", np.pi / 4, "--out", out)[0] == 0
    code, text, _ = run(capsys, "eval", "--strategy", out, "--task", "rac", "--json", files / "o.json")
    assert "0.8901650429" in text
    assert run(capsys, "strategy", "nonsense", "--out", out)[0] == 2


def test_optimize(files, capsys):
    out = files / "opt.json"
    code, _, _ = run(capsys, "optimize", "--task", "facet", "--class", "qubit-povm", "--restarts", 3,
                     "--seed", 5, "--out", out)
    assert code == 0
    d = json.loads(out.read_text())
    assert d["metadata"]["seed"] == 5 and d["strategy"]["kind"] == "qubit-prepare-measure"
    assert run(capsys, "optimize", "--task", "facet", "--class", "bogus", "--out", out)[0] == 2


def test_optimize_seed_from_environment(files, capsys, monkeypatch):
    monkeypatch.setenv("EACOMM_SEED", "9")
    out = files / "opt.json"
    assert run(capsys, "optimize", "--task", "rac", "--class", "unassisted-classical-2",
               "--restarts", 1, "--out", out)[0] == 0
    assert json.loads(out.read_text())["metadata"]["seed"] == 9
    monkeypatch.setenv("EACOMM_SEED", "x")
    assert run(capsys, "optimize", "--task", "rac", "--class", "unassisted-classical-2",
               "--restarts", 1, "--out", out)[0] == 2


def test_npa_solve_and_export(files, capsys):
    code, out, _ = run(capsys, "npa", "--task", "chsh", "--scenario", "chsh", "--level", 1, "--solve",
                       "--export", files / "chsh.dat-s", "--json", files / "n.json")
    assert code == 0
    assert json.loads((files / "n.json").read_text())["upper"] == pytest.approx(2 * 2**0.5, abs=1e-6)
    assert (files / "chsh.dat-s").exists()
    assert run(capsys, "npa", "--task", "rac", "--scenario", "rac-bit", "--level", 2)[0] == 2
    assert run(capsys, "npa", "--task", "rac", "--scenario", "nope", "--solve")[0] == 2
    assert run(capsys, "npa", "--task", "rac", "--scenario", "rac-bit", "--level", "7", "--solve")[0] == 2


def test_npa_solver_failure_exit_code(files, capsys, monkeypatch):
    fake = SdpResult(3.0, 2.0, 1.0, 1.0, 1.0, 200, False, "iteration limit", None, None, 0.0)
    monkeypatch.setattr(cli, "solve_sdp", lambda problem, tol: fake)
    code, _, err = run(capsys, "npa", "--task", "chsh", "--scenario", "chsh", "--level", 1, "--solve",
                       "--json", files / "n.json")
    assert code == 4 and "solver" in err


def test_report_exit_codes(files, capsys, monkeypatch):
    import eacomm.report as rep

    def fake(ok):
        row = Row("RAC", "x", "strategy", 1.0, "1", "eq", achieved=1.0 if ok else 0.5)
        row.judge()
        return lambda cfg: Report([row], cfg)

    monkeypatch.setattr(rep, "run_report", fake(True))
    assert run(capsys, "report", "--out", files / "r" / "report.md")[0] == 0
    assert (files / "r" / "report.json").exists()
    monkeypatch.setattr(rep, "run_report", fake(False))
    code, out, _ = run(capsys, "report", "--out", files / "report.md")
    assert code == 1 and "MISMATCH" in out


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    r = subprocess.run([sys.executable, "-m", "eacomm", "strategy", "chsh-ea-bit-rac", "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and out.exists()
