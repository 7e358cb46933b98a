import csv
import json
import shutil

import numpy as np
import pytest

from transonic_wedge.cli import main
from transonic_wedge.config import RunConfig, load_config, parse_config
from transonic_wedge.errors import ConfigError

BASE = """\
gas:
  gamma: 1.4
upstream:
  mach: 2.0
  p: 1.0
  rho: 1.0
wedge:
  theta0_deg: {theta}
  bump:
    kind: compact-poly
    amplitude: 1.0e-3
    center: 2.0
    width: 1.5
grid:
  R: 8.0
  n1: 32
  n2: 32
"""


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_round_trip():
    cfg = parse_config(BASE.format(theta=22.95))
    again = parse_config(cfg.dump())
    assert again == cfg
    assert isinstance(again, RunConfig) and again.wedge.w0 == 0.0
    assert again.problem().theta0 == pytest.approx(np.radians(22.95))


def test_null_w0_round_trips():
    cfg = parse_config(BASE.format(theta=22.95).replace("wedge:\n", "wedge:\n  w0: null\n"))
    assert cfg.wedge.w0 is None and parse_config(cfg.dump()) == cfg


@pytest.mark.parametrize("edit, line, word", [
    (lambda t: t.replace("  p: 1.0\n", "  p: 1.0\n  pp: 2\n"), 6, "unknown key 'upstream.pp'"),
    (lambda t: t.replace("  rho: 1.0\n", "  rho: 1.0\n  rho: 2.0\n"), 7, "duplicate key 'upstream.rho'"),
    (lambda t: t.replace("  n1: 32\n", "  n1: many\n"), 16, "'grid.n1' must be int"),
    (lambda t: t.replace("  mach: 2.0\n", ""), 4, "missing key(s) 'upstream.mach'"),
])
def test_line_numbered_errors(edit, line, word):
    with pytest.raises(ConfigError) as e:
        parse_config(edit(BASE.format(theta=22.95)))
    assert f"line {line}:" in str(e.value) and word in str(e.value)


@pytest.mark.parametrize("edit", [
    lambda t: t.replace("gamma: 1.4", "gamma: 1.0"),
    lambda t: t.replace("rho: 1.0", "rho: -1.0"),
    lambda t: t + "solver:\n  outer: newton\n",
    lambda t: t + "sweep:\n  axis: mach\n",
    lambda t: t + "polar:\n  samples: 2\n",
    lambda t: "",
    lambda t: "gas: [1\n",
])
def test_semantic_errors(edit):
    with pytest.raises(ConfigError):
        parse_config(edit(BASE.format(theta=22.95)))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


def test_polar_command(tmp_path):
    cfg = write(tmp_path, BASE.format(theta=22.95))
    assert main(["polar", "--config", str(cfg), "--out", str(tmp_path / "p")]) == 0
    s = json.loads((tmp_path / "p" / "summary.json").read_text())
    assert s["theta_critical_deg"] == pytest.approx(22.97353176093794, abs=1e-7)
    assert s["theta_sonic_deg"] == pytest.approx(22.705986752585883, abs=1e-7)
    with open(tmp_path / "p" / "polar.csv") as f:
        assert len(list(csv.DictReader(f))) == 400


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("solve")
    cfg = write(d, BASE.format(theta=22.95))
    code = main(["solve", "--config", str(cfg), "--out", str(d / "a")])
    return d, cfg, code


def test_solve_outputs(solved):
    d, _, code = solved
    assert code == 0
    for name in ("config.yaml", "report.json", "timings.json", "iterations.jsonl", "eulerian.csv", "shock.csv"):
        assert (d / "a" / name).exists()
    rep = json.loads((d / "a" / "report.json").read_text())
    assert rep["summary"]["converged"]
    assert "timings" not in json.dumps(rep["summary"])


def test_solve_is_deterministic(solved):
    d, cfg, _ = solved
    assert main(["solve", "--config", str(cfg), "--out", str(d / "b")]) == 0
    for name in ("report.json", "eulerian.csv", "shock.csv", "iterations.jsonl"):
        assert (d / "a" / name).read_bytes() == (d / "b" / name).read_bytes()


def test_verify_passes_and_catches_fault(solved, capsys):
    d, _, _ = solved
    assert main(["verify", "--solution", str(d / "a"), "--out", str(d / "v")]) == 0
    assert json.loads((d / "v" / "verify.json").read_text())["passed"]
    bad = d / "bad"
    shutil.copytree(d / "a", bad)
    rows = list(csv.DictReader(open(bad / "shock.csv")))
    rows[1]["p"] = str(float(rows[1]["p"]) * 1.01)
    with open(bad / "shock.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    assert main(["verify", "--solution", str(bad), "--out", str(d / "v2")]) == 1
    out = json.loads((d / "v2" / "verify.json").read_text())
    assert not out["suites"]["rh"]["passed"] and out["suites"]["slip"]["passed"]
    assert "rh" in capsys.readouterr().out


@pytest.mark.parametrize("text, code", [
    (BASE.format(theta=25.0), 3),
    (BASE.format(theta=22.95).replace("mach: 2.0", "mach: 0.8"), 3),
    (BASE.format(theta=22.95) + "sweep:\n  values: []\n", 2),
    (BASE.format(theta=22.95).replace("gamma: 1.4", "gamma: 0.9"), 2),
])
def test_exit_codes(tmp_path, text, code):
    cfg = write(tmp_path, text)
    cmd = "sweep" if "sweep" in text else "solve"
    assert main([cmd, "--config", str(cfg), "--out", str(tmp_path / "o")]) == code
    if code == 3:
        rep = json.loads((tmp_path / "o" / "report.json").read_text())
        assert rep["error"]["exit_code"] == 3


def test_verify_needs_input(tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 2
