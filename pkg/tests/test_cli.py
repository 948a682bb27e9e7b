import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from exchange_only.cli import main, parse_angle, sweep_rows


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "text,value",
    [("pi", math.pi), ("2pi/3", 2 * math.pi / 3), ("acos(1/4)", math.acos(0.25)), ("1.5", 1.5), ("4*pi/3", 4 * math.pi / 3), ("-pi/2", -math.pi / 2), ("acos(1/4)/2", math.acos(0.25) / 2)],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("text", ["tau", "acos(2)", "pi/", ""])
def test_parse_angle_rejects(text):
    with pytest.raises(Exception):
        parse_angle(text)


@pytest.mark.parametrize("profile,n_corr", [("fig9a", 1), ("fig9b", 2)])
def test_synthesize_pi(profile, n_corr, tmp_path, capsys):
    out = tmp_path / "s.json"
    code, stdout, _ = run(["synthesize", "--phi", "pi", "--profile", profile, "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["core_pulses"] == 39
    assert len(doc["pulses"]) == 39 + n_corr
    assert "locally equivalent to CNOT: true" in stdout
    assert f"core pulses=39 corrections={n_corr}" in stdout
    assert "parallel=" in stdout


def test_synthesize_to_stdout_keeps_json_clean(capsys):
    code, stdout, stderr = run(["synthesize", "--phi", "1.0"], capsys)
    assert code == 0
    assert json.loads(stdout)["meta"]["phi"] == 1.0
    assert "core pulses=39" in stderr


@pytest.mark.parametrize("phi", ["0", "2pi/1", "-1", "nan?"])
def test_synthesize_usage_errors(phi, capsys):
    with pytest.raises(SystemExit) as err:
        main(["synthesize", "--phi", phi])
    assert err.value.code == 2


def test_bad_profile_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["synthesize", "--phi", "pi", "--profile", "custom:ss"])
    assert err.value.code == 2


def test_unachievable_alt_split(capsys):
    code, _, stderr = run(["synthesize", "--phi", "pi", "--alt-theta1", "1.25"], capsys)
    assert code == 2
    assert "unachievable" in stderr


PHI_GRID = ["0.2", "1.0", "pi/2", "2pi/3", "pi", "4.0", "5.0", "6.1"]
PROFILES = ["fig9a", "fig9b", "custom:lslslslslsl"]


@pytest.mark.parametrize("profile", PROFILES)
@pytest.mark.parametrize("phi", PHI_GRID)
def test_synthesize_verify_round_trip(phi, profile, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run(["synthesize", "--phi", phi, "--profile", profile, "--out", str(out)], capsys)[0] == 0
    code, stdout, _ = run(["verify", str(out), "--check-phi"], capsys)
    assert code == 0, stdout
    assert stdout.strip().endswith("PASS")


@pytest.mark.parametrize("theta1", ["acos(1/4)/2", "acos(1/4)/3", "0.9"])
def test_round_trip_alt(theta1, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run(["synthesize", "--phi", "pi", "--alt-theta1", theta1, "--out", str(out)], capsys)[0] == 0
    assert json.loads(out.read_text())["meta"]["alt_theta1"] == pytest.approx(parse_angle(theta1))
    assert run(["verify", str(out), "--check-phi"], capsys)[0] == 0


def _perturbed(src, dst, k, dt):
    doc = json.loads(src.read_text())
    doc["pulses"][k]["t"] += dt
    dst.write_text(json.dumps(doc))


def test_verify_detects_perturbation(tmp_path, capsys):
    src = tmp_path / "s.json"
    run(["synthesize", "--phi", "pi", "--out", str(src)], capsys)
    for k in (0, 5, 19, 38):
        bad = tmp_path / f"p{k}.json"
        _perturbed(src, bad, k, 0.1)
        code, stdout, _ = run(["verify", str(bad)], capsys)
        assert code == 1
        assert "FAIL" in stdout


def test_verify_site_zero_warns(tmp_path, capsys):
    src = tmp_path / "s.json"
    run(["synthesize", "--phi", "pi", "--out", str(src)], capsys)
    doc = json.loads(src.read_text())
    doc["pulses"].append({"pair": [0, 1], "t": 2 * math.pi - 1e-3})
    p = tmp_path / "z.json"
    p.write_text(json.dumps(doc))
    code, stdout, _ = run(["verify", str(p), "--format", "json", "--out", str(tmp_path / "r.json")], capsys)
    assert "warning: g-independence check skipped" in stdout
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["g_independence"].startswith("skipped")


def test_verify_schema_error(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"n_sites": 6, "pulses": [{"pair": [1, 2], "t": "x"}]}))
    code, _, stderr = run(["verify", str(p)], capsys)
    assert code == 2
    assert "$.pulses[0].t" in stderr
    p.write_text("{")
    assert run(["verify", str(p)], capsys)[0] == 2
    assert run(["verify", str(tmp_path / "missing.json")], capsys)[0] == 2
    p.write_text(json.dumps({"n_sites": 4, "pulses": []}))
    code, _, stderr = run(["verify", str(p)], capsys)
    assert code == 2 and "$.n_sites" in stderr


def test_verify_single_g(tmp_path, capsys):
    src = tmp_path / "s.json"
    run(["synthesize", "--phi", "1.0", "--profile", "fig9b", "--out", str(src)], capsys)
    code, stdout, _ = run(["verify", str(src), "--g", "0", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(stdout)
    assert {s["g"] for s in doc["sectors"]} == {0}


def test_outputs_byte_stable(tmp_path, capsys):
    for argv in (
        ["synthesize", "--phi", "2pi/3", "--profile", "fig9b"],
        ["sweep", "--curve", "u4tilde-theta", "--n-points", "50"],
        ["sweep", "--curve", "u3-phi", "--n-points", "50", "--format", "json"],
        ["nogo", "--trials", "5", "--random", "10", "--seed", "11", "--format", "json"],
    ):
        outs = []
        for k in range(2):
            path = tmp_path / f"o{k}"
            main(argv + ["--out", str(path)])
            outs.append(path.read_bytes())
        capsys.readouterr()
        assert outs[0] == outs[1]


def _read_sweep(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    return np.array([float(r["t"]) for r in rows]), np.array([float(r["phase"]) for r in rows])


def test_sweep_u3_phi(capsys):
    code, stdout, _ = run(["sweep", "--curve", "u3-phi", "--n-points", "400"], capsys)
    assert code == 0
    assert stdout.splitlines()[0] == "t,phase"
    t, ph = _read_sweep(stdout)
    assert len(t) == 400
    assert np.all(np.diff(ph) > 0)
    assert ph[0] < 0.05 and ph[-1] > 2 * math.pi - 0.05
    assert np.interp(1.91063, t, ph) == pytest.approx(math.pi, abs=1e-3)


def test_sweep_u4tilde_theta(capsys):
    code, stdout, _ = run(["sweep", "--curve", "u4tilde-theta", "--n-points", "200"], capsys)
    assert code == 0
    header = stdout.splitlines()[0]
    assert header.startswith("# theta_max=")
    theta_max = float(header.split("=")[1].split()[0])
    # grid-scan oracle on the closed form theta = t - pi + 2 atan(3 cot(t/2))
    ts = np.linspace(1e-4, math.pi - 1e-4, 200001)
    scan = np.max(ts - math.pi + 2 * np.arctan(3 / np.tan(ts / 2)))
    assert theta_max == pytest.approx(scan, abs=1e-9)
    t, th = _read_sweep(stdout)
    first = t < math.pi
    assert np.max(th[first]) <= theta_max + 1e-12


def test_sweep_rows_endpoints():
    rows = sweep_rows("u3-phi", 2)
    assert len(rows) == 2
    assert all(0 < t < math.pi for t, _ in rows)


def test_sweep_needs_two_points(capsys):
    assert run(["sweep", "--curve", "u3-phi", "--n-points", "1"], capsys)[0] == 2


def test_nogo(capsys):
    code, stdout, _ = run(["nogo", "--trials", "20", "--random", "50", "--seed", "5"], capsys)
    assert code == 0
    assert "seed=5" in stdout
    rows = [ln for ln in stdout.splitlines() if ln[:1].isdigit() and "-" in ln[:3]]
    assert len(rows) == 6
    for ln in rows:
        assert ln.split()[1:4] == ["1.0000", "2.0000", "1.0000"]
    assert stdout.strip().endswith("PASS")
    assert run(["nogo", "--trials", "0"], capsys)[0] == 2


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "exchange_only", "sweep", "--curve", "u3-phi", "--n-points", "3"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert out.stdout.startswith("t,phase\n")
    bad = subprocess.run([sys.executable, "-m", "exchange_only", "synthesize", "--phi", "0"], capture_output=True)
    assert bad.returncode == 2
