import json
import os

from nonsmooth_adm.cli import main
from nonsmooth_adm.sim import presets, save_scenario, trace_from_csv


def test_run_preset_writes_outputs(tmp_path, capsys):
    out = str(tmp_path / "run")
    code = main(["run", "--scenario", "fig3_one_dof", "--out", out,
                 "--set", "duration_s=0.5", "--plot"])
    assert code == 0
    trace = trace_from_csv(os.path.join(out, "trace.csv"))
    assert trace.t.size == 500
    metrics = json.load(open(os.path.join(out, "metrics.json")))
    assert metrics["torque_violations"] == 0
    for panel in ("position.svg", "force.svg", "torque.svg"):
        assert os.path.exists(os.path.join(out, panel))
    assert "ran fig3_one_dof" in capsys.readouterr().out


def test_run_override_changes_row_count(tmp_path):
    out = str(tmp_path / "run2")
    code = main(["run", "--scenario", "fig3_one_dof", "--out", out,
                 "--set", "duration_s=0.5", "--set", "h_s=0.00025"])
    assert code == 0
    trace = trace_from_csv(os.path.join(out, "trace.csv"))
    assert trace.t.size == 2000


def test_run_unknown_preset_lists_available(tmp_path, capsys):
    code = main(["run", "--scenario", "no_such_preset", "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "fig3_one_dof" in err and "linmotor_steps" in err


def test_run_bad_override_is_config_error(tmp_path, capsys):
    code = main(["run", "--scenario", "fig3_one_dof", "--out", str(tmp_path),
                 "--set", "bogus.path=3"])
    assert code == 2


def test_run_scenario_file(tmp_path):
    sc = presets()["msta_bench"]
    sc.duration = 0.5
    path = str(tmp_path / "bench.json")
    save_scenario(sc, path)
    out = str(tmp_path / "file_run")
    assert main(["run", "--scenario", path, "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "trace.csv"))


def test_simulation_failure_exit_code(tmp_path, capsys):
    code = main(["run", "--scenario", "fig5_two_dof", "--out", str(tmp_path / "x"),
                 "--set", "duration_s=1.0",
                 "--set", "controller.kind=naive",
                 "--set", "controller.kp=-5e6",
                 "--set", "controller.kd=-5e4",
                 "--set", "controller.torque_limits=[1e300,1e300]"])
    assert code == 3
    assert "step" in capsys.readouterr().err


def test_compare_outputs(tmp_path, capsys):
    out = str(tmp_path / "cmp")
    code = main(["compare", "--scenario", "fig3_one_dof", "--out", out, "--plot"])
    assert code == 0
    table = json.load(open(os.path.join(out, "metrics_compare.json")))
    assert table["proposed"]["torque_violations"] == 0
    naive = table["naive"]
    assert naive["rebound_count"] >= 1 or naive["steady_force_err"] > 0.2
    assert os.path.exists(os.path.join(out, "compare_force.svg"))


def test_compare_free_space_no_contact(tmp_path):
    out = str(tmp_path / "cmp_free")
    code = main(["compare", "--scenario", "msta_bench", "--out", out,
                 "--set", "duration_s=0.5"])
    assert code == 0
    table = json.load(open(os.path.join(out, "metrics_compare.json")))
    assert table["proposed"]["steady_force_err"] is None
    assert table["naive"]["steady_force_err"] is None


def test_sweep_command(tmp_path, capsys):
    out = str(tmp_path / "sweep")
    code = main(["sweep", "--scenario", "linmotor_steps", "--out", out,
                 "--set", "duration_s=3.0",
                 "--param", "fd_y", "--values=-1.5,-2.0"])
    assert code == 0
    table = json.load(open(os.path.join(out, "sweep.json")))
    assert table["param"] == "fd_y"
    assert [row["value"] for row in table["rows"]] == [-1.5, -2.0]
    assert all(row["torque_violations"] == 0 for row in table["rows"])


def test_verify_single_group(capsys):
    code = main(["verify", "--group", "prox"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS prox:closed-form-vs-minimizer" in out
    assert "projection:" not in out


def test_verify_unknown_group(capsys):
    assert main(["verify", "--group", "bogus"]) == 2


def test_verify_fault_injection(capsys):
    # forcing every tolerance to zero must fail and name the group
    code = main(["verify", "--group", "prox", "--tol-scale", "0"])
    out = capsys.readouterr().out
    assert code == 4
    assert "FAIL prox:" in out


def test_plot_from_trace(tmp_path):
    out = str(tmp_path / "p")
    assert main(["run", "--scenario", "msta_bench", "--out", out,
                 "--set", "duration_s=0.5"]) == 0
    out2 = str(tmp_path / "panels")
    code = main(["plot", "--scenario", os.path.join(out, "trace.csv"),
                 "--out", out2, "--limits", "50"])
    assert code == 0
    assert os.path.exists(os.path.join(out2, "position.svg"))


def test_plot_missing_file(tmp_path):
    assert main(["plot", "--scenario", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path)]) == 2
