import json
import subprocess
import sys
from pathlib import Path

import pytest

from wavecrit.cli import main, parse_range

CONFIGS = Path(__file__).parent.parent / "configs"
SMALL = ["--h", "0.0625", "--vmax", "4096", "--stretch", "0.0625"]


def cfg(name):
    return str(CONFIGS / f"{name}.cfg")


def test_classify_writes_json(tmp_path, capsys):
    assert main(["classify", cfg("strauss_glassey_system"), "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "classify.json").read_text())
    assert payload["verdict"] == "expected-stable"
    assert payload["s"] == ["-12/25", "2/5"]
    assert json.loads(capsys.readouterr().out) == payload


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVECRIT_OUT", str(tmp_path / "env"))
    assert main(["classify", cfg("strauss")]) == 0
    assert (tmp_path / "env" / "classify.json").exists()


def test_simulate_outputs(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", cfg("strauss"), "--out", str(out), "--snapshot", *SMALL]) == 0
    summary = json.loads((out / "simulate.json").read_text())
    assert summary["blowup"] is None
    assert abs(summary["fields"]["phi"]["rho_0.5"]["exponent"] - 1.0) < 0.15
    for name in ("rho_0.5", "r_1", "scri_u0", "moment"):
        head = (out / f"phi_{name}.csv").read_text().splitlines()[0]
        assert head == "t,value"
    assert (out / "snapshot.wcrt").read_bytes()[:4] == b"WCRT"


def test_simulate_is_deterministic(tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / str(k)
        assert main(["simulate", cfg("strauss"), "--out", str(out), *SMALL]) == 0
        texts.append([(out / f).read_text() for f in ("simulate.json", "phi_rho_0.5.csv")])
    assert texts[0] == texts[1]


def test_simulate_certifies_blowup(tmp_path):
    args = ["simulate", cfg("strauss"), "--amplitude", "20", "--certify", "--out", str(tmp_path),
            "--h", "0.03125", "--vmax", "256", "--stretch", "0.03125"]
    assert main(args) == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["label"] == "numerical" and len(cert["blowup_time_estimates"]) == 3


def test_sweep_flips_at_strauss_exponent(tmp_path):
    args = ["sweep", cfg("strauss"), "--param", "term.0.power", "--range", "2.38:2.46:0.02",
            "--out", str(tmp_path), "--jobs", "1"]
    assert main(args) == 0
    rows = [line.split(",") for line in (tmp_path / "sweep.csv").read_text().splitlines()]
    assert rows[0] == ["param", "verdict", "s_phi"]
    verdicts = {r[0]: r[1] for r in rows[1:]}
    assert verdicts["2.4"] == "expected-unstable" and verdicts["2.42"] == "expected-stable"


def test_catalog(capsys):
    assert main(["catalog", "strauss"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["value"] - 2.41421356) < 1e-8
    assert main(["catalog", "strauss_null", "--params", "3,3"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "critical"


def test_oracle(tmp_path):
    assert main(["oracle", "--p", "2", "--alpha", "1", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "oracle.json").read_text())
    assert payload["verdict"] == "blowup" and abs(payload["blowup_time"] - 2.718281828) < 1e-3
    assert (tmp_path / "trajectory.csv").read_text().startswith("t,x1\n")
    # hypotheses hold, but blow-up lies beyond the horizon
    assert main(["oracle", "--p", "1.01", "--alpha", "1", "--tmax", "100", "--out", str(tmp_path)]) == 4


@pytest.mark.parametrize("argv", [
    ["classify", "missing.cfg"],
    ["sweep", "CONFIG", "--param", "term.0.power", "--range", "3:2:0.1"],
    ["sweep", "CONFIG", "--param", "term.9.power", "--range", "2:3:0.5"],
    ["catalog", "nonsense"],
    ["catalog", "strauss_null", "--params", "3"],
    ["oracle"],
    ["oracle", "--p", "2", "--c", "-1"],
    ["simulate", str(CONFIGS / "strauss_tail.cfg")],
])
def test_usage_errors_exit_2(argv, tmp_path):
    argv = [cfg("strauss") if a == "CONFIG" else a for a in argv]
    if argv[0] != "catalog":
        argv += ["--out", str(tmp_path)]
    assert main(argv) == 2


def test_argument_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == 2


def test_parse_range_is_exact():
    vals = parse_range("2:2.1:0.05")
    assert [str(v) for v in vals] == ["2", "41/20", "21/10"]


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "wavecrit.cli", "catalog", "glassey", "--n", "2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["value"] == 3.0
    res = subprocess.run([sys.executable, "-m", "wavecrit.cli"], capture_output=True, text=True)
    assert res.returncode == 2
