"""Scenario configuration, runs, sweeps, and CSV serialization.

Configs are YAML mappings with one section per subsystem; every field has a
default, so an empty file is a valid config. All outputs are deterministic:
repeated runs of the same config produce byte-identical CSV bytes.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .cpg import OscillatorParams
from .errors import ConfigError, LatstepError, NonFiniteStateError, SafetyStopError
from .gait import AmplitudeConfig, RobotGeometry, hip_amplitude
from .plant import Disturbance, PlantParams
from .reflex import Engine, Episode, ReflexConfig, RunResult, TRACE_COLUMNS


@dataclass(frozen=True)
class ScenarioConfig:
    osc: OscillatorParams = field(default_factory=OscillatorParams)
    geom: RobotGeometry = field(default_factory=RobotGeometry)
    amps: AmplitudeConfig = field(default_factory=AmplitudeConfig)
    reflex: ReflexConfig = field(default_factory=ReflexConfig)
    plant: PlantParams = field(default_factory=PlantParams)
    disturbances: tuple[Disturbance, ...] = ()
    duration: float = 9.0
    dt: float = 1e-3
    reflex_enabled: bool = True
    forward_speed: float = 0.5
    stride_period: float = 0.6
    out_dir: str = "out"

    def engine(self) -> Engine:
        return Engine(osc=self.osc, geom=self.geom, amps=self.amps,
                      reflex=self.reflex, plant_params=self.plant,
                      disturbances=self.disturbances, duration=self.duration,
                      dt=self.dt, reflex_enabled=self.reflex_enabled,
                      forward_speed=self.forward_speed,
                      stride_period=self.stride_period)


@dataclass(frozen=True)
class SweepSpec:
    """Impact magnitude sweep: one scenario per magnitude (per arm)."""

    magnitudes: tuple[float, ...]
    t_start: float = 2.5
    duration: float = 0.2
    with_and_without: bool = True

    def validate(self) -> "SweepSpec":
        if not self.magnitudes:
            raise ConfigError("sweep needs at least one magnitude")
        if any(b <= a for a, b in zip(self.magnitudes, self.magnitudes[1:])):
            raise ConfigError("sweep magnitudes must be strictly increasing")
        if not self.duration > 0.0:
            raise ConfigError("impact duration must be positive")
        return self


DEFAULT_SWEEP_MAGNITUDES = tuple(float(round(v)) for v in np.linspace(50.0, 340.0, 11))

_SECTION_TYPES = {
    "oscillator": OscillatorParams,
    "geometry": RobotGeometry,
    "amplitudes": AmplitudeConfig,
    "reflex": ReflexConfig,
    "plant": PlantParams,
}

_SCENARIO_KEYS = {
    "duration": float, "dt": float, "reflex_enabled": bool,
    "forward_speed": float, "stride_period": float, "out_dir": str,
}


def _coerce(section: str, cls, data: dict):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"section {section!r}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        ftype = str(fields[name].type)
        try:
            if ftype == "float":
                kwargs[name] = float(value)
            elif ftype == "int":
                kwargs[name] = int(value)
            elif ftype == "bool":
                kwargs[name] = bool(value)
            else:
                kwargs[name] = value
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"section {section!r}, key {name!r}: {exc}") from exc
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"section {section!r}: {exc}") from exc


def config_from_dict(data: dict | None) -> ScenarioConfig:
    """Build and validate a scenario config from a parsed YAML mapping."""
    data = dict(data or {})
    known = set(_SECTION_TYPES) | {"scenario", "disturbances"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")

    parts = {}
    for section, cls in _SECTION_TYPES.items():
        parts[section] = _coerce(section, cls, data.get(section, {}) or {})

    sc = dict(data.get("scenario", {}) or {})
    unknown = set(sc) - set(_SCENARIO_KEYS)
    if unknown:
        raise ConfigError(f"section 'scenario': unknown keys {sorted(unknown)}")
    sc_vals = {}
    for name, conv in _SCENARIO_KEYS.items():
        if name in sc:
            try:
                sc_vals[name] = conv(sc[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"section 'scenario', key {name!r}: {exc}") from exc

    dist_raw = data.get("disturbances", []) or []
    if not isinstance(dist_raw, list):
        raise ConfigError("'disturbances' must be a list of mappings")
    disturbances = tuple(
        _coerce(f"disturbances[{i}]", Disturbance, d).validate()
        for i, d in enumerate(dist_raw))

    cfg = ScenarioConfig(
        osc=parts["oscillator"].validate(),
        geom=parts["geometry"].validate(),
        amps=parts["amplitudes"],
        reflex=parts["reflex"].validate(),
        plant=parts["plant"].validate(),
        disturbances=disturbances,
        **sc_vals)
    # nominal hip amplitude defaults to the speed/stride demand when the
    # config does not pin it explicitly
    if "a_h0" not in (data.get("amplitudes") or {}):
        a_h0 = hip_amplitude(cfg.forward_speed, cfg.stride_period, cfg.geom)
        if a_h0 > 0.0:
            cfg = dataclasses.replace(
                cfg, amps=dataclasses.replace(cfg.amps, a_h0=a_h0))
    cfg.amps.validate()
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "oscillator": dataclasses.asdict(cfg.osc),
        "geometry": dataclasses.asdict(cfg.geom),
        "amplitudes": dataclasses.asdict(cfg.amps),
        "reflex": dataclasses.asdict(cfg.reflex),
        "plant": dataclasses.asdict(cfg.plant),
        "scenario": {
            "duration": cfg.duration, "dt": cfg.dt,
            "reflex_enabled": cfg.reflex_enabled,
            "forward_speed": cfg.forward_speed,
            "stride_period": cfg.stride_period, "out_dir": cfg.out_dir,
        },
        "disturbances": [dataclasses.asdict(d) for d in cfg.disturbances],
    }


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"invalid YAML in {path!r}{where}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config {path!r} must be a YAML mapping")
    return config_from_dict(data)


def save_config(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)


def default_config(**overrides) -> ScenarioConfig:
    """The canonical scenario: steady trot, 220 N / 0.2 s impact at 2.5 s."""
    cfg = config_from_dict({
        "disturbances": [{"force": 220.0, "t_start": 2.5, "duration": 0.2}],
    })
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    run: RunResult
    summary: dict


def _first_episode_summary(ep: Episode | None, stride_period: float) -> dict:
    if ep is None:
        return {
            "triggered": False, "trigger_time_s": math.nan, "direction": 0,
            "steps": 0, "termination_time_s": math.nan,
            "terminated_by": "", "cycles_to_recover": math.nan,
            "first_plan_offset_m": math.nan, "xdot_at_trigger_mps": math.nan,
            "episode_peak_filtered_mmps2": math.nan,
            "phase_ok": True, "phase_worst_error_rad": math.nan,
        }
    cycles = math.nan
    if ep.termination_time is not None:
        cycles = (ep.termination_time - ep.trigger_time) / stride_period
    return {
        "triggered": True, "trigger_time_s": ep.trigger_time,
        "direction": ep.direction, "steps": ep.steps,
        "termination_time_s": (math.nan if ep.termination_time is None
                               else ep.termination_time),
        "terminated_by": ep.terminated_by, "cycles_to_recover": cycles,
        "first_plan_offset_m": ep.first_plan_offset,
        "xdot_at_trigger_mps": ep.xdot_at_trigger,
        "episode_peak_filtered_mmps2": ep.peak_filtered,
        "phase_ok": ep.phase_ok,
        "phase_worst_error_rad": (ep.phase_worst_error if ep.phase_checked
                                  else math.nan),
    }


def summarize(run: RunResult, cfg: ScenarioConfig) -> dict:
    ep = run.episodes[0] if run.episodes else None
    out = {
        "fallen": run.fallen,
        "fall_time_s": math.nan if run.fall_time is None else run.fall_time,
        "n_episodes": len(run.episodes),
        "baseline_peak_filtered_mmps2": run.baseline_peak_filtered,
        "peak_filtered_mmps2": run.peak_filtered,
        "max_roll_deg": run.max_roll_deg,
        "separation_ok": run.separation_ok,
        "backend": run.backend,
    }
    out.update(_first_episode_summary(ep, cfg.stride_period))
    return out


def run_scenario(cfg: ScenarioConfig, record_trace: bool = True) -> ScenarioResult:
    """Run one scenario end to end. Deterministic; raises SafetyStopError or
    NonFiniteStateError on simulation aborts."""
    run = cfg.engine().run(record_trace=record_trace)
    return ScenarioResult(config=cfg, run=run, summary=summarize(run, cfg))


SWEEP_COLUMNS = (
    "magnitude_n", "reflex_enabled", "recovered", "fallen", "triggered",
    "trigger_time_s", "direction", "steps", "termination_time_s",
    "terminated_by", "cycles_to_recover", "max_roll_deg",
    "peak_filtered_mmps2", "first_plan_offset_m", "xdot_at_trigger_mps",
    "separation_ok", "phase_ok", "n_episodes", "error",
)


def _sweep_row(cfg: ScenarioConfig, magnitude: float, spec: SweepSpec,
               reflex_enabled: bool) -> dict:
    row_cfg = dataclasses.replace(
        cfg, reflex_enabled=reflex_enabled,
        disturbances=(Disturbance(force=magnitude, t_start=spec.t_start,
                                  duration=spec.duration),))
    row = {name: "" for name in SWEEP_COLUMNS}
    row["magnitude_n"] = magnitude
    row["reflex_enabled"] = reflex_enabled
    try:
        res = run_scenario(row_cfg, record_trace=False)
    except (SafetyStopError, NonFiniteStateError) as exc:
        # keep the CSV grid intact no matter what the message contains
        text = f"{type(exc).__name__}: {exc}"
        row["error"] = text.replace(",", ";").replace("\n", " ")
        row["recovered"] = False
        row["fallen"] = True
        return row
    s = res.summary
    row.update({
        "recovered": not s["fallen"], "fallen": s["fallen"],
        "triggered": s["triggered"], "trigger_time_s": s["trigger_time_s"],
        "direction": s["direction"], "steps": s["steps"],
        "termination_time_s": s["termination_time_s"],
        "terminated_by": s["terminated_by"],
        "cycles_to_recover": s["cycles_to_recover"],
        "max_roll_deg": s["max_roll_deg"],
        "peak_filtered_mmps2": s["peak_filtered_mmps2"],
        "first_plan_offset_m": s["first_plan_offset_m"],
        "xdot_at_trigger_mps": s["xdot_at_trigger_mps"],
        "separation_ok": s["separation_ok"], "phase_ok": s["phase_ok"],
        "n_episodes": s["n_episodes"],
    })
    row["_episodes"] = res.run.episodes
    return row


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict]

    def arm(self, reflex_enabled: bool) -> list[dict]:
        return [r for r in self.rows if r["reflex_enabled"] == reflex_enabled]


def run_sweep(spec: SweepSpec, base: ScenarioConfig) -> SweepResult:
    """Run the impact sweep; rows ordered by magnitude within each arm.

    Scenario-level errors are captured per row, never aborting the sweep.
    """
    spec.validate()
    arms = (True, False) if spec.with_and_without else (base.reflex_enabled,)
    rows = []
    for reflex_enabled in arms:
        for magnitude in spec.magnitudes:
            rows.append(_sweep_row(base, float(magnitude), spec, reflex_enabled))
    return SweepResult(spec=spec, rows=rows)


def max_recoverable(rows: list[dict]) -> float:
    """Largest magnitude in the rows that did not fall (0 when none)."""
    ok = [r["magnitude_n"] for r in rows if r["recovered"] is True]
    return max(ok, default=0.0)


def capture_grid(base: ScenarioConfig,
                 with_magnitudes=None, without_magnitudes=None) -> dict:
    """Grid-search the maximum recoverable impact with and without the reflex."""
    if with_magnitudes is None:
        with_magnitudes = tuple(float(round(v)) for v in np.linspace(120.0, 400.0, 15))
    if without_magnitudes is None:
        without_magnitudes = tuple(float(round(v)) for v in np.linspace(10.0, 150.0, 15))
    spec_on = SweepSpec(magnitudes=tuple(with_magnitudes), with_and_without=False)
    spec_off = SweepSpec(magnitudes=tuple(without_magnitudes), with_and_without=False)
    rows_on = run_sweep(spec_on, dataclasses.replace(base, reflex_enabled=True)).rows
    rows_off = run_sweep(spec_off, dataclasses.replace(base, reflex_enabled=False)).rows
    best_on = max_recoverable(rows_on)
    best_off = max_recoverable(rows_off)
    ratio = math.inf if best_off == 0.0 else best_on / best_off
    return {"with_reflex_max_n": best_on, "without_reflex_max_n": best_off,
            "ratio": ratio, "rows_with": rows_on, "rows_without": rows_off}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if math.isnan(v) else repr(v)
    return str(value)


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def write_trace_csv(path: str, result: ScenarioResult) -> None:
    """Full per-tick telemetry, one row per tick, unit-suffixed columns."""
    trace = result.run.trace
    if trace is None:
        raise LatstepError("scenario was run without trace recording")
    cols = list(TRACE_COLUMNS)
    n = len(trace[cols[0]])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        data = [trace[c] for c in cols]
        for i in range(n):
            fh.write(",".join(_fmt(float(col[i])) for col in data) + "\n")


def write_sweep_csv(path: str, sweep: SweepResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(SWEEP_COLUMNS, sweep.rows))
