import re
import subprocess
import sys

import pytest

from ecobrake import cli, config

BUNDLED = config.BUNDLED.read_text()


def weak_brake(tmp_path, distance):
    path = tmp_path / "weak.yaml"
    path.write_text(BUNDLED.replace("u_min_ms2: -2.0", "u_min_ms2: -0.5")
                    .replace("distance_m: 500", f"distance_m: {distance}"))
    return str(path)


def strip_timing(report):
    return report.split("[timing]")[0]


@pytest.fixture(scope="module")
def both_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    code = cli.run(["--scenario", "case-study", "--method", "both", "--verify", "--quiet",
                    "--out-report", str(out / "r.txt"), "--out-traj", str(out / "t.csv")])
    return code, out


def test_case_study_both_verify(both_run):
    code, out = both_run
    assert code == cli.EXIT_OK
    report = (out / "r.txt").read_text()
    for section in ("[scenario]", "[indirect]", "[indirect.residuals]", "[indirect.checks]",
                    "[direct]", "[direct.saturation]", "[direct.checks]", "[comparison]", "[timing]"):
        assert section in report
    assert "FAIL" not in report
    durations = {k: float(v) for k, v in re.findall(r"^(dt_q\d_s) = (\S+)", report, re.M)}
    assert durations["dt_q1_s"] == pytest.approx(7.98, abs=0.05)
    assert (out / "t.indirect.csv").exists() and (out / "t.direct.csv").exists()


def test_report_numbers_have_nine_digits(both_run):
    report = (both_run[1] / "r.txt").read_text()
    assert "J = 14.0183809\n" in report


def test_deterministic(both_run, tmp_path):
    _, out = both_run
    code = cli.run(["--scenario", "case-study", "--method", "both", "--quiet",
                    "--out-report", str(tmp_path / "r.txt"), "--out-traj", str(tmp_path / "t.csv")])
    assert code == cli.EXIT_OK
    assert strip_timing((tmp_path / "r.txt").read_text()) == strip_timing((out / "r.txt").read_text())
    for name in ("t.indirect.csv", "t.direct.csv"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_bad_boundary_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(BUNDLED.replace("vf_kmh: 100", "vf_kmh: 170"))
    assert cli.run(["--scenario", str(path)]) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "boundary" in err and "bad.yaml:15" in err


def test_bad_dt_exit_1(capsys):
    assert cli.run(["--scenario", "case-study", "--dt", "0"]) == cli.EXIT_CONFIG


def test_weak_brake_short_distance_exit_2(tmp_path, capsys):
    # full braking at -0.5 m/s^2 already needs ~419 m, so 300 m is out of reach
    assert cli.run(["--scenario", weak_brake(tmp_path, 300), "--method", "direct"]) == cli.EXIT_SOLVER
    assert "Infeasible" in capsys.readouterr().err


def test_verification_failure_exit_3(tmp_path, capsys):
    # the indirect method ignores u_min; verification catches the violation
    code = cli.run(["--scenario", weak_brake(tmp_path, 300), "--method", "indirect", "--verify", "--quiet"])
    assert code == cli.EXIT_VERIFY
    assert "indirect:u_min_violation" in capsys.readouterr().err


def test_single_method_traj_path(tmp_path, capsys):
    traj = tmp_path / "plan.csv"
    assert cli.run(["--scenario", "case-study", "--method", "indirect", "--out-traj", str(traj)]) == 0
    assert traj.read_text().startswith("t_s,mode,s_m,v_ms,a_ms2,u_ms2,lambda_v\n")
    out = capsys.readouterr().out
    assert out.startswith("# eco-braking plan report") and "[comparison]" not in out


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "ecobrake.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "--method" in proc.stdout
