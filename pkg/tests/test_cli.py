import json

import numpy as np
import pytest

from conftest import SCENARIO_PATH
from mdncee import cli
from mdncee.simulate import McResult


def run_cli(argv):
    return cli.main(argv)


def read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def parse_sweep(text):
    lines = text.strip().split("\n")
    assert lines[0] == cli.SWEEP_SCHEMA
    header = lines[1].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[2:]]


def test_sweep_runs_and_is_byte_stable(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    argv = ["sweep", SCENARIO_PATH, "--scheme", "both", "--targets", "1e-2,1e-3", "--out"]
    assert run_cli(argv + [str(out1)]) == 0
    assert run_cli(argv + [str(out2)]) == 0
    assert read(out1 / "sweep.csv") == read(out2 / "sweep.csv")
    rows = parse_sweep(read(out1 / "sweep.csv"))
    assert len(rows) == 4
    assert (out1 / "plotdata" / "ee_vs_target_mdnc_goa.dat").exists()


def test_sweep_rows_are_self_consistent(paper_scenario, tmp_path):
    out = tmp_path / "o"
    assert run_cli(["sweep", SCENARIO_PATH, "--scheme", "both",
                    "--targets", "1e-2,1e-3", "--out", str(out)]) == 0
    s = paper_scenario
    for row in parse_sweep(read(out / "sweep.csv")):
        assert row["status"] == "ok"
        ee = float(row["ee"])
        pr = float(row["pr_out_exact"])
        e_tot = float(row["e_tot"])
        recomputed = s.M * s.alpha0 * s.T * (1.0 - pr) / e_tot
        assert ee == pytest.approx(recomputed, rel=1e-9)
        assert float(row["pr_out_approx"]) <= float(row["target"]) * (1 + 1e-6)


def test_sweep_brute_and_goa_agree(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["sweep", SCENARIO_PATH, "--mode", "goa,brute",
                    "--targets", "1e-3", "--out", str(out)]) == 0
    rows = parse_sweep(read(out / "sweep.csv"))
    by_mode = {r["mode"]: r for r in rows}
    assert by_mode["goa"]["relays"] == by_mode["brute"]["relays"]
    assert float(by_mode["goa"]["ee"]) == pytest.approx(float(by_mode["brute"]["ee"]), rel=1e-3)


def test_invalid_scenario_exits_2(tmp_path):
    bad = tmp_path / "bad.cfg"
    base = read(SCENARIO_PATH)
    bad.write_text(base.replace("beta = 0.1", "beta = 1.5"))
    assert run_cli(["sweep", str(bad), "--targets", "1e-3", "--out", str(tmp_path / "o")]) == 2


def test_all_targets_infeasible_exits_3(tmp_path):
    assert run_cli(["sweep", SCENARIO_PATH, "--targets", "1e-12",
                    "--out", str(tmp_path / "o")]) == 3


def test_infeasible_target_keeps_reason_and_run_continues(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["sweep", SCENARIO_PATH, "--targets", "1e-3,1e-12", "--out", str(out)]) == 0
    rows = parse_sweep(read(out / "sweep.csv"))
    status = {r["target"]: r["status"] for r in rows}
    assert status["0.001"] == "ok"
    assert status["1e-12"] == "infeasible"
    bad = [r for r in rows if r["status"] == "infeasible"][0]
    assert bad["reason"] != ""


def test_mc_mode_populates_empirical_columns(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["sweep", SCENARIO_PATH, "--mode", "mc", "--targets", "1e-3",
                    "--samples", "200000", "--seed", "4", "--out", str(out)]) == 0
    row = parse_sweep(read(out / "sweep.csv"))[0]
    assert row["pr_out_mc"] != "" and row["mc_stderr"] != ""


def test_energy_curve_output(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["energy-curve", SCENARIO_PATH, "--targets", "3e-3,1e-3",
                    "--out", str(out)]) == 0
    text = read(out / "energy_curve.csv")
    assert text.startswith(cli.ENERGY_SCHEMA)
    assert (out / "plotdata" / "edata_vs_outage_mdnc.dat").exists()


def test_relay_shift_identity_row(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["relay-shift", SCENARIO_PATH, "--deltas=-25,0,25",
                    "--targets", "1e-3", "--out", str(out)]) == 0
    lines = read(out / "relay_shift.csv").strip().split("\n")
    assert lines[0] == cli.SHIFT_SCHEMA
    rows = [dict(zip(lines[1].split(","), ln.split(","))) for ln in lines[2:]]
    zero = [r for r in rows if float(r["delta"]) == 0.0][0]
    assert zero["status"] == "ok"
    # delta = 0 reproduces the unshifted optimum
    from mdncee.model import build_link_coefficients, load_scenario
    from mdncee.optimizer import dinkelbach_solve
    s = load_scenario(SCENARIO_PATH)
    base = dinkelbach_solve(s, build_link_coefficients(s), 1e-3)
    assert float(zero["ee"]) == pytest.approx(base.ee, rel=1e-9)


def test_relay_shift_invalid_delta_row(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["relay-shift", SCENARIO_PATH, "--deltas=-1000,0",
                    "--targets", "1e-3", "--out", str(out)]) == 0
    text = read(out / "relay_shift.csv")
    assert "invalid" in text


def test_verify_passes_at_optimizer_point(tmp_path, capsys):
    out = tmp_path / "o"
    code = run_cli(["verify", SCENARIO_PATH, "--target", "1e-3",
                    "--samples", "300000", "--seed", "1", "--out", str(out)])
    assert code == 0
    report = json.loads(read(out / "verify.json"))
    assert report["pass"] is True
    assert abs(report["z_score"]) <= 3.0


def test_verify_explicit_point_deterministic(tmp_path, capsys):
    argv = ["verify", SCENARIO_PATH, "--relays", "0,1,2,3",
            "--user-powers", "0.7,0.7", "--relay-powers", "1.5,1.5,1.5,1.5",
            "--samples", "200000", "--seed", "3"]
    assert run_cli(argv) == 0
    first = json.loads(capsys.readouterr().out)
    assert run_cli(argv) == 0
    second = json.loads(capsys.readouterr().out)
    assert first == second


def test_verify_failure_exit_code(tmp_path, monkeypatch, capsys):
    # force a 5-sigma discrepancy through the simulation hook: the exit-code
    # plumbing must translate a failed 3-sigma band into code 4
    def shifted(s, coeffs, schedule, powers, mc, scheme="mdnc"):
        from mdncee.outage import outage_exact
        exact = outage_exact(s, coeffs, schedule, powers).total
        sigma = np.sqrt(exact * (1 - exact) / mc.samples)
        return McResult(outage=exact + 5 * sigma, stderr=sigma, ee=0.0,
                        samples=mc.samples, scheme=scheme)

    monkeypatch.setattr(cli, "monte_carlo_outage", shifted)
    code = run_cli(["verify", SCENARIO_PATH, "--relays", "0,1,2,3",
                    "--user-powers", "0.7,0.7", "--relay-powers", "1.5,1.5,1.5,1.5",
                    "--samples", "100000", "--seed", "3"])
    assert code == 4
