import json
import subprocess
import sys

import pytest

from fuchsian.cli import run
from fuchsian.constants import I3PLUS_REFERENCE

GAUSS = {"order": 2, "coeffs": [["-1/15"], ["1/2", "-23/15"], ["0", "1", "-1"]]}


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.fixture
def gauss_file(tmp_path):
    p = tmp_path / "gauss.json"
    p.write_text(json.dumps(GAUSS))
    return str(p)


@pytest.fixture
def chi1_file(tmp_path):
    p = tmp_path / "chi1.txt"
    p.write_text("0 0\n" + "".join(f"{k} {2 * 4 ** (k - 1)}\n" for k in range(1, 31)))
    return str(p)


def test_constants_i3plus(capsys):
    code, rep = _run(capsys, "constants", "--eval", "I3plus", "--digits", "60")
    assert code == 0
    assert rep["result"]["value"].startswith(I3PLUS_REFERENCE)
    assert rep["result"]["matches_printed"]


def test_fixtures_chi3_check(capsys):
    code, rep = _run(capsys, "fixtures", "chi3", "--check")
    assert code == 0
    checks = rep["result"]["checks"]
    assert all(checks[k]["holds"] for k in ("a_inverse", "b_cube", "c_square", "d_det",
                                           "e_involution"))


def test_guess_chi1(capsys, chi1_file):
    code, rep = _run(capsys, "guess", "--series", chi1_file)
    assert code == 0
    assert rep["result"]["ode"] == {"order": 1, "coeffs": [["-1"], ["0", "1", "-4"]]}
    assert rep["inputs"][chi1_file]


def test_guess_none_is_exit_4(capsys, tmp_path):
    p = tmp_path / "short.txt"
    p.write_text("".join(f"{k} {k * k + 1}\n" for k in range(25)))
    code, rep = _run(capsys, "guess", "--series", str(p), "--max-order", "1", "--max-degree", "0")
    assert code == 4 and rep["result"]["ode"] is None


def test_malformed_series(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 1\n1 2/0\n")
    code, rep = _run(capsys, "guess", "--series", str(p))
    assert code == 2 and "line 2" in rep["error"]


def test_malformed_ode_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"order": 1,\n "coeffs": [["1"] ["2"]]}')
    code, rep = _run(capsys, "analyze", "--ode", str(p))
    assert code == 2 and "line 2" in rep["error"]


def test_analyze(capsys, gauss_file):
    code, rep = _run(capsys, "analyze", "--ode", gauss_file)
    assert code == 0 and rep["result"]["fuchsian"]
    labels = [p["point"] for p in rep["result"]["singular_points"]]
    assert labels == ["0", "1", "inf"]


def test_frobenius(capsys, gauss_file):
    code, rep = _run(capsys, "frobenius", "--ode", gauss_file, "--point", "1", "--order", "5")
    assert code == 0 and rep["result"]["exact"]


def test_connect_and_recognize(capsys, gauss_file, tmp_path):
    out = tmp_path / "c.json"
    code = run(["connect", "--ode", gauss_file, "--from", "0", "--to", "1", "--digits", "80",
                "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["matrix"]["precision_estimate"] >= 75
    # the entries are Gamma quotients, not rational combinations of 1 and pi
    code, rep = _run(capsys, "recognize", "--matrix", str(out), "--basis", "1,pi", "--digits", "60")
    assert code == 4 and len(rep["result"]["unresolved"]) == 4


def test_monodromy(capsys, gauss_file):
    code, rep = _run(capsys, "monodromy", "--ode", gauss_file, "--points", "0,1,inf",
                     "--path", "inf=1i;3i", "--digits", "30")
    assert code == 0
    assert float(rep["result"]["relation"]["residual"]) < 1e-20


def test_recognize_value(capsys):
    code, rep = _run(capsys, "recognize", "--value", "1/3 + 2*pi", "--basis", "1,pi",
                     "--digits", "60")
    assert code == 0
    assert rep["result"]["value"]["real"] == {"one": "1/3", "pi": "2"}


def test_recognize_c014_round_trip(capsys, tmp_path):
    out = tmp_path / "c014.json"
    assert run(["fixtures", "c014", "--digits", "120", "--out", str(out)]) == 0
    code, rep = _run(capsys, "recognize", "--matrix", str(out), "--basis",
                     "1,pi,pi2,inv_pi,inv_pi2,sqrt3_over_pi,pi_sqrt3,I3plus", "--digits", "100")
    assert code == 0 and rep["result"]["unresolved"] == []


def test_ising_commands(capsys, tmp_path):
    code, rep = _run(capsys, "ising", "nickel", "--n", "1")
    assert code == 0 and sorted(p["w"] for p in rep["result"]["points"]) == ["-1/2", "1"]
    code, rep = _run(capsys, "ising", "s-of-w", "--w", "(-3+i*sqrt(7))/8", "--digits", "30")
    assert code == 0
    assert sorted(rep["result"]["moduli"])[0].startswith("0.70710678118654752440")
    f = tmp_path / "chi2.txt"
    code, rep = _run(capsys, "ising", "series", "--n", "2", "--order", "10", "--out", str(f))
    assert code == 0 and f.read_text().splitlines()[4] == "4 8"


def test_precondition_exit_code(capsys):
    code, rep = _run(capsys, "constants", "--eval", "nope")
    assert code == 2 and rep["status"] == 2


def test_deterministic(capsys, chi1_file):
    a = _run(capsys, "guess", "--series", chi1_file)
    b = _run(capsys, "guess", "--series", chi1_file)
    assert a == b


def test_console_script(chi1_file):
    proc = subprocess.run([sys.executable, "-m", "fuchsian.cli", "guess", "--series", chi1_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == 0


def test_connect_branch_from_rational(capsys, gauss_file):
    code, rep = _run(capsys, "connect", "--ode", gauss_file, "--from", "0", "--to", "inf",
                     "--waypoints", "1i", "--branch-from", "1")
    assert code == 0 and rep["result"]["matrix"]["precision_estimate"] >= 25
