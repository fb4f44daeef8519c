"""Scenario layer tests: config round trips, sweeps, CSV output, CLI, plots."""

import dataclasses
import math
import os

import pytest
import yaml

from latstep.cli import main
from latstep.errors import ConfigError
from latstep.gait import hip_amplitude
from latstep.reflex import TRACE_COLUMNS
from latstep.scenario import (
    SWEEP_COLUMNS,
    ScenarioConfig,
    SweepSpec,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    max_recoverable,
    run_scenario,
    run_sweep,
    save_config,
    write_sweep_csv,
    write_trace_csv,
)


def test_default_config_shape():
    cfg = default_config()
    assert len(cfg.disturbances) == 1
    d = cfg.disturbances[0]
    assert (d.force, d.t_start, d.duration) == (220.0, 2.5, 0.2)
    assert cfg.duration == 9.0
    assert cfg.dt == 1e-3
    assert cfg.reflex_enabled


def test_hip_amplitude_derived_from_speed():
    cfg = default_config()
    expected = hip_amplitude(cfg.forward_speed, cfg.stride_period, cfg.geom)
    assert cfg.amps.a_h0 == pytest.approx(expected, rel=1e-12)
    # explicit value wins over the derivation
    pinned = config_from_dict({"amplitudes": {"a_h0": 0.2}})
    assert pinned.amps.a_h0 == 0.2


def test_config_dict_round_trip():
    cfg = default_config()
    back = config_from_dict(config_to_dict(cfg))
    assert back == cfg


def test_config_yaml_file_round_trip(tmp_path):
    cfg = dataclasses.replace(default_config(), duration=7.5, out_dir="x")
    path = tmp_path / "cfg.yaml"
    save_config(cfg, str(path))
    back = load_config(str(path))
    assert back == cfg


def test_empty_config_is_valid(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    cfg = load_config(str(path))
    assert cfg.duration == 9.0
    assert cfg.disturbances == ()


def test_unknown_sections_and_keys_are_named():
    with pytest.raises(ConfigError, match="oszillator"):
        config_from_dict({"oszillator": {}})
    with pytest.raises(ConfigError, match="thresold"):
        config_from_dict({"reflex": {"thresold": 100}})
    with pytest.raises(ConfigError, match="scenario"):
        config_from_dict({"scenario": {"durration": 5}})
    with pytest.raises(ConfigError, match="oscillator"):
        config_from_dict({"oscillator": [1, 2]})
    with pytest.raises(ConfigError, match="disturbances"):
        config_from_dict({"disturbances": {"force": 1}})


def test_invalid_values_are_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"oscillator": {"beta": 1.5}})
    with pytest.raises(ConfigError):
        config_from_dict({"reflex": {"threshold": -10}})
    with pytest.raises(ConfigError):
        config_from_dict({"oscillator": {"a": "not-a-number"}})
    with pytest.raises(ConfigError):
        config_from_dict({"disturbances": [{"force": 10, "t_start": -1,
                                            "duration": 0.1}]})


def test_yaml_syntax_error_reports_line(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("oscillator:\n  a: 9\n bad indent: [\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(str(path))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yaml"))
    listy = tmp_path / "list.yaml"
    listy.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(str(listy))


def test_summary_has_flat_primitive_fields(default_result):
    s = default_result.summary
    for key in ("fallen", "triggered", "steps", "cycles_to_recover",
                "max_roll_deg", "first_plan_offset_m", "backend"):
        assert key in s
    assert isinstance(s["fallen"], bool)
    assert s["triggered"] is True
    assert s["cycles_to_recover"] == pytest.approx(
        (s["termination_time_s"] - s["trigger_time_s"]) / 0.6)


def test_sweep_rows_and_arms(default_sweep):
    rows = default_sweep.rows
    assert len(rows) == 22
    on = default_sweep.arm(True)
    off = default_sweep.arm(False)
    assert len(on) == len(off) == 11
    mags = [r["magnitude_n"] for r in on]
    assert mags == sorted(mags)
    assert all(r["error"] == "" for r in rows)
    # reflex widens the recoverable range on the same grid
    assert max_recoverable(on) > max_recoverable(off)


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(magnitudes=()).validate()
    with pytest.raises(ConfigError):
        SweepSpec(magnitudes=(100.0, 50.0)).validate()
    with pytest.raises(ConfigError):
        SweepSpec(magnitudes=(50.0,), duration=0.0).validate()


def test_sweep_captures_scenario_aborts():
    # a one-step budget exhausts mid-impact and aborts the run; the sweep
    # must record the abort in the row instead of crashing
    base = default_config()
    base = dataclasses.replace(
        base, duration=4.0, disturbances=(),
        reflex=dataclasses.replace(base.reflex, max_steps=1))
    spec = SweepSpec(magnitudes=(220.0,), t_start=2.5, duration=0.2,
                     with_and_without=False)
    sweep = run_sweep(spec, base)
    row = sweep.rows[0]
    assert "SafetyStopError" in row["error"]
    assert row["fallen"] is True and row["recovered"] is False
    assert "_episodes" not in row


def test_trace_csv_layout(tmp_path, default_result):
    path = tmp_path / "trace.csv"
    write_trace_csv(str(path), default_result)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 1 + default_result.run.n_ticks
    first = [float(v) for v in lines[1].split(",")]
    assert len(first) == len(TRACE_COLUMNS)
    assert first[0] == pytest.approx(1e-3)
    # repr round trip: cells parse back to the exact stored doubles
    t_col = default_result.run.trace["t_s"]
    assert float(lines[3].split(",")[0]) == t_col[2]


def test_trace_csv_requires_recording(tmp_path):
    cfg = dataclasses.replace(default_config(), duration=1.0, disturbances=())
    res = run_scenario(cfg, record_trace=False)
    with pytest.raises(Exception):
        write_trace_csv(str(tmp_path / "x.csv"), res)


def test_sweep_csv_layout(tmp_path, default_sweep):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(str(path), default_sweep)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 1 + len(default_sweep.rows)
    cells = lines[1].split(",")
    assert float(cells[0]) == 50.0
    assert cells[1] == "1"  # reflex arm flag serializes as 0/1


def test_scenario_config_is_immutable():
    cfg = default_config()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.duration = 5.0


def _write_quick_config(tmp_path, **scenario_overrides):
    data = {"scenario": {"duration": 2.0, **scenario_overrides},
            "disturbances": []}
    path = tmp_path / "quick.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_cli_run_writes_outputs(tmp_path, capsys):
    cfg_path = _write_quick_config(tmp_path)
    out_dir = str(tmp_path / "out")
    assert main(["run", cfg_path, "--out-dir", out_dir]) == 0
    captured = capsys.readouterr()
    assert "fallen" in captured.out
    assert os.path.exists(os.path.join(out_dir, "trace.csv"))
    assert os.path.exists(os.path.join(out_dir, "scenario.yaml"))
    # the echoed config reloads to the same scenario
    echoed = load_config(os.path.join(out_dir, "scenario.yaml"))
    assert echoed.duration == 2.0


def test_cli_run_with_impact_flags(tmp_path, capsys):
    out_dir = str(tmp_path / "out")
    rc = main(["run", "--force", "220", "--impact-time", "2.5",
               "--no-trace", "--out-dir", out_dir])
    assert rc == 0
    out = capsys.readouterr().out
    assert "reflex triggered" in out and "yes" in out


def test_cli_config_errors_exit_1(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("reflex:\n  thresold: 1\n")
    assert main(["run", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "config error" in err
    # impact extending past the run duration is a config error too
    cfg_path = _write_quick_config(tmp_path)
    assert main(["run", cfg_path, "--force", "100",
                 "--impact-time", "1.95"]) == 1


def test_cli_simulation_abort_exits_2(tmp_path, capsys):
    data = {"scenario": {"duration": 4.0}, "reflex": {"max_steps": 1},
            "disturbances": [{"force": 220.0, "t_start": 2.5,
                              "duration": 0.2}]}
    cfg_path = tmp_path / "budget.yaml"
    cfg_path.write_text(yaml.safe_dump(data))
    assert main(["run", str(cfg_path), "--no-trace"]) == 2
    err = capsys.readouterr().err
    assert "simulation abort" in err and "SafetyStopError" in err


def test_cli_sweep_and_plot(tmp_path, capsys):
    out_dir = str(tmp_path / "out")
    rc = main(["sweep", "--magnitudes", "60,220", "--out-dir", out_dir])
    assert rc == 0
    table = capsys.readouterr().out
    assert "force[N]" in table
    sweep_csv = os.path.join(out_dir, "sweep.csv")
    assert os.path.exists(sweep_csv)
    lines = open(sweep_csv).read().splitlines()
    assert len(lines) == 1 + 4  # two magnitudes, both arms

    rc = main(["plot", sweep_csv, "--out-dir", out_dir])
    assert rc == 0
    assert os.path.exists(os.path.join(out_dir, "sweep_roll.svg"))


def test_cli_bad_magnitudes_exit_1(capsys):
    assert main(["sweep", "--magnitudes", "abc"]) == 1
    assert main(["sweep", "--magnitudes", ""]) == 1
    assert main(["sweep", "--magnitudes", "300,100"]) == 1


def test_plot_trace_renders_deterministic_svgs(tmp_path, default_result):
    from latstep.plots import detect_kind, plot_trace

    trace_csv = tmp_path / "trace.csv"
    write_trace_csv(str(trace_csv), default_result)
    assert detect_kind(str(trace_csv)) == "trace"
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    paths_a = plot_trace(str(trace_csv), str(out_a))
    paths_b = plot_trace(str(trace_csv), str(out_b))
    assert [os.path.basename(p) for p in paths_a] == \
        ["accel.svg", "cog_zmp.svg", "roll.svg"]
    for pa, pb in zip(paths_a, paths_b):
        ba = open(pa, "rb").read()
        assert len(ba) > 1000
        assert ba == open(pb, "rb").read()


def test_plot_rejects_foreign_csv(tmp_path):
    from latstep.plots import detect_kind

    alien = tmp_path / "alien.csv"
    alien.write_text("foo,bar\n1,2\n")
    with pytest.raises(ConfigError):
        detect_kind(str(alien))
    empty = tmp_path / "empty_data.csv"
    empty.write_text("t_s,x_m\n")
    from latstep.plots import plot_trace
    with pytest.raises(ConfigError):
        plot_trace(str(empty), str(tmp_path))
