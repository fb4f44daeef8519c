"""Threshold-triggered lateral stepping reflex and the closed-loop engine.

The supervisory machine watches filtered lateral acceleration. Crossing the
threshold starts a stepping episode: the lateral-motion oscillators are
enabled, a capture-point foothold is planned, and placements happen at each
stance-pair transition until the acceleration has settled and the remaining
capture demand is small enough for plain stance to absorb. A step budget
guards against non-convergence.

The Engine wires the oscillator network, joint mapping, step planner, and
lateral plant into one deterministic fixed-step loop and records per-tick
telemetry plus per-episode summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cpg, gait, zmp
from ._kernels import BACKEND, kernels
from .cpg import NetworkState, OscillatorParams
from .errors import ConfigError, GeometryError, NonFiniteStateError, SafetyStopError
from .gait import AmplitudeConfig, LatchedValue, RobotGeometry
from .plant import (
    Disturbance,
    FootholdUpdate,
    PlantParams,
    PlantState,
    design_butterworth,
    filter_coeff_arrays,
    measured_lateral_accel,
    step_plant,
    total_force,
)
from .zmp import PendulumState, StepPlan, max_foothold_offset, plan_step


@dataclass(frozen=True)
class ReflexConfig:
    """Reflex trigger/termination tuning.

    threshold: filtered-acceleration trigger level (mm/s^2), strict >.
    lam: hip-to-LM coupling gain. max_steps: step budget per episode.
    direction_sign_source: fixed to the filtered acceleration sign.
    phase_tolerance: LM-vs-hip phase consistency bound (rad) used by the
    diagnostic. lock_in_cycles: gait cycles after the trigger before the
    phase diagnostic applies.
    """

    threshold: float = 2500.0
    lam: float = 4.0
    max_steps: int = 8
    direction_sign_source: str = "filtered_accel"
    phase_tolerance: float = 0.12
    lock_in_cycles: float = 2.0

    def validate(self) -> "ReflexConfig":
        if not self.threshold > 0.0:
            raise ConfigError(f"threshold must be positive, got {self.threshold}")
        if self.lam < 0.0:
            raise ConfigError(f"coupling gain must be >= 0, got {self.lam}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.direction_sign_source != "filtered_accel":
            raise ConfigError(
                f"unsupported direction source {self.direction_sign_source!r}")
        if not self.phase_tolerance > 0.0:
            raise ConfigError("phase_tolerance must be positive")
        if self.lock_in_cycles < 0.0:
            raise ConfigError("lock_in_cycles must be >= 0")
        return self


@dataclass
class ControllerState:
    mode: str = "idle"  # "idle" | "stepping"
    steps_taken: int = 0
    trigger_time: float | None = None
    direction: int = 0


@dataclass
class ReflexCommands:
    """Per-tick controller outputs for the engine to apply."""

    enable_lm: bool = False
    disable_lm: bool = False
    place_foothold: StepPlan | None = None
    episode_ended: bool = False
    triggered: bool = False


def direction_of_step(filtered_accel: float) -> int:
    """Step direction matches the sensed push direction."""
    if filtered_accel > 0.0:
        return 1
    if filtered_accel < 0.0:
        return -1
    raise ValueError("step direction undefined for exactly zero acceleration")


def update(ctrl: ControllerState, cfg: ReflexConfig, filtered_accel: float,
           plant: PlantState, net: NetworkState | None, t: float, *,
           at_boundary: bool, candidate_plan: StepPlan | None,
           handback_reach: float) -> tuple[ControllerState, ReflexCommands]:
    """One supervisory decision, called once per tick after filtering.

    Idle -> stepping on a strict threshold crossing (sets direction, enables
    the LM units). While stepping, each stance boundary either terminates
    (acceleration back under threshold AND remaining capture demand within
    plain-stance authority) or places the re-planned foothold and counts a
    step. Exhausting the step budget without converging raises SafetyStopError.

    net is accepted for symmetry with the rest of the loop; gating of the LM
    units is carried out by the caller through the returned commands.
    """
    cmds = ReflexCommands()
    if ctrl.mode == "stepping" and at_boundary:
        if candidate_plan is None:
            raise ConfigError("stepping boundary reached without a candidate plan")
        settled = (abs(filtered_accel) <= cfg.threshold
                   and abs(candidate_plan.unclamped_offset) <= handback_reach)
        if settled:
            ctrl.mode = "idle"
            ctrl.direction = 0
            cmds.disable_lm = True
            cmds.episode_ended = True
        elif ctrl.steps_taken >= cfg.max_steps:
            raise SafetyStopError(
                f"reflex exceeded {cfg.max_steps} steps without converging at t={t:.3f}")
        else:
            ctrl.steps_taken += 1
            cmds.place_foothold = candidate_plan
    if (ctrl.mode == "idle" and not plant.fallen
            and abs(filtered_accel) > cfg.threshold):
        ctrl.mode = "stepping"
        ctrl.steps_taken = 0
        ctrl.trigger_time = t
        ctrl.direction = direction_of_step(filtered_accel)
        cmds.enable_lm = True
        cmds.triggered = True
    return ctrl, cmds


class PhaseCheck:
    """Result of the LM-vs-hip phase consistency diagnostic."""

    __slots__ = ("ok", "worst_error", "errors")

    def __init__(self, ok: bool, worst_error: float, errors: tuple):
        self.ok = ok
        self.worst_error = worst_error
        self.errors = errors

    def __repr__(self):
        return f"PhaseCheck(ok={self.ok}, worst_error={self.worst_error:.4f})"


def enforce_phase_consistency(net: NetworkState, tolerance: float = 0.1,
                              mu: float = 1.0) -> PhaseCheck:
    """Check that each enabled LM unit tracks its hip's phase.

    Legs whose LM unit is disabled, or still too close to the origin for a
    phase to exist, are skipped. Diagnostic only: violations are reported,
    never raised.
    """
    r_min = 0.1 * math.sqrt(mu)
    errors: list[float | None] = []
    worst = 0.0
    measured = False
    ok = True
    for i in range(cpg.N_HIPS):
        hip = net.units[i]
        lm = net.units[cpg.N_HIPS + i]
        if not lm.enabled or lm.r <= r_min or hip.r <= r_min:
            errors.append(None)
            continue
        err = abs(cpg.wrap_angle(math.atan2(lm.y, lm.x) - math.atan2(hip.y, hip.x)))
        errors.append(err)
        measured = True
        worst = max(worst, err)
        if err >= tolerance:
            ok = False
    return PhaseCheck(ok=ok, worst_error=worst if measured else math.nan,
                      errors=tuple(errors))


@dataclass
class StepOnset:
    """Conditions snapshot at one reflex foothold placement."""

    t: float
    xdot: float
    plan_offset: float
    plan_unclamped: float
    clamped: bool
    h_c: float
    a_k_required: float
    a_k_commanded: float
    lift_capped: bool


@dataclass
class Episode:
    """One stepping episode from trigger to termination."""

    trigger_time: float
    direction: int
    force_sign_at_trigger: int
    xdot_at_trigger: float
    first_plan_offset: float
    steps: int = 0
    termination_time: float | None = None
    terminated_by: str = "run_end"
    peak_filtered: float = 0.0
    phase_checked: bool = False
    phase_ok: bool = True
    phase_worst_error: float = 0.0
    separation_ok: bool = True
    onsets: list[StepOnset] = field(default_factory=list)


TRACE_COLUMNS = (
    "t_s", "x_m", "xdot_mps", "accel_raw_mmps2", "accel_filt_mmps2",
    "x_zmp_m", "support_x_m", "roll_proxy_deg", "mode", "steps_taken",
    "fallen",
    "hip_lf_rad", "hip_rf_rad", "hip_rh_rad", "hip_lh_rad",
    "knee_lf_rad", "knee_rf_rad", "knee_rh_rad", "knee_lh_rad",
    "slider_lf_m", "slider_rf_m", "slider_rh_m", "slider_lh_m",
)


@dataclass
class RunResult:
    trace: dict[str, np.ndarray] | None
    episodes: list[Episode]
    fallen: bool
    fall_time: float | None
    duration: float
    dt: float
    n_ticks: int
    baseline_peak_filtered: float
    peak_filtered: float
    max_roll_deg: float
    separation_ok: bool
    backend: str = BACKEND


class Engine:
    """Deterministic closed-loop simulation of the full stack.

    Per tick: advance the oscillator network, flush amplitude latches at
    phase-signal zero crossings, detect stance-pair transitions from the
    first hip unit's y sign, integrate the plant, sense and filter the
    acceleration, run the reflex decision, and record telemetry. Stops early
    when the plant falls.
    """

    def __init__(self, *, osc: OscillatorParams | None = None,
                 geom: RobotGeometry | None = None,
                 amps: AmplitudeConfig | None = None,
                 reflex: ReflexConfig | None = None,
                 plant_params: PlantParams | None = None,
                 disturbances=(), duration: float = 9.0, dt: float = 1e-3,
                 reflex_enabled: bool = True, forward_speed: float = 0.5,
                 stride_period: float = 0.6):
        self.osc = (osc or OscillatorParams()).validate()
        self.geom = (geom or RobotGeometry()).validate()
        self.amps = (amps or AmplitudeConfig()).validate()
        self.reflex_cfg = (reflex or ReflexConfig()).validate()
        self.plant_params = (plant_params or PlantParams()).validate()
        self.disturbances = tuple(d.validate() for d in disturbances)
        if not dt > 0.0:
            raise ConfigError(f"dt must be positive, got {dt}")
        if not duration > 0.0:
            raise ConfigError(f"duration must be positive, got {duration}")
        for d in self.disturbances:
            if d.t_start + d.duration > duration:
                raise ConfigError(
                    f"disturbance ending at {d.t_start + d.duration:.3f}s "
                    f"exceeds run duration {duration}s")
        self.duration = duration
        self.dt = dt
        self.reflex_enabled = reflex_enabled
        self.forward_speed = forward_speed
        self.stride_period = stride_period

        self.q = math.sqrt(self.plant_params.g / self.geom.z_g)
        self.k = cpg.gait_matrix(self.reflex_cfg.lam)
        self.u_max = max_foothold_offset(self.geom)
        # hip amplitude chain: nominal from speed, floored through the
        # squared-amplitude adaptation
        mu_cmd = gait.adapt_mu(self.amps)
        self.a_h_used = self.amps.a_h0 * math.sqrt(mu_cmd / self.amps.mu0)
        self.hip_gain = self.a_h_used / self.osc.amplitude
        self.idle_knee = gait.knee_amplitude(0.0, self.a_h_used, self.geom, self.amps)
        # swing-foot lever arm about the support line
        self.l_c = 2.0 * self.geom.track_halfwidth

    def _knee_request(self, filtered_mmps2: float) -> tuple[float, float, float, bool]:
        """Lift height and knee amplitude for the sensed roll acceleration.

        Returns (h_c, required minimum, commanded amplitude, capped flag).
        """
        roll_accel = abs(filtered_mmps2) / 1000.0 / self.geom.z_g
        h_c = gait.min_lift_height(roll_accel, self.amps.t_sw, self.l_c)
        try:
            a_req = gait.min_knee_amplitude(h_c, self.a_h_used, self.geom)
            return h_c, a_req, max(a_req, self.amps.a_k0), False
        except GeometryError:
            # demand beyond leg reach: command the full fold and flag it
            a_max = math.pi - self.geom.gamma
            return h_c, a_max, a_max, True

    def run(self, record_trace: bool = True) -> RunResult:
        osc, geom, amps = self.osc, self.geom, self.amps
        cfg, pp = self.reflex_cfg, self.plant_params
        dt, q = self.dt, self.q
        n_ticks = int(round(self.duration / dt))
        mu_amp = osc.amplitude

        x = np.zeros(cpg.N_UNITS)
        y = np.zeros(cpg.N_UNITS)
        x[:cpg.N_HIPS] = cpg.HIP_SEED_X
        en = np.array([1.0] * cpg.N_HIPS + [0.0] * cpg.N_HIPS)
        k_mat = np.ascontiguousarray(self.k)
        prev_x = x.copy()

        # start on the periodic sway orbit of alternating stance
        side = 1
        v0 = q * pp.stance_offset * math.tanh(q * pp.half_period / 2.0)
        plant_state = PlantState(cog=PendulumState(0.0, v0),
                                 support_x=pp.stance_offset, phase=side)
        prev_y1_sign = 0

        fs = design_butterworth(1.67, 1.0 / dt)
        w_taps, f_coeffs = filter_coeff_arrays(fs)
        filtered = 0.0

        ctrl = ControllerState()
        episodes: list[Episode] = []
        current_ep: Episode | None = None
        pending_update: FootholdUpdate | None = None

        knee_latches = [LatchedValue(self.idle_knee) for _ in range(4)]
        slider_latches = [LatchedValue(0.0) for _ in range(4)]

        trace = np.empty((n_ticks, len(TRACE_COLUMNS))) if record_trace else None
        first_dist = min((d.t_start for d in self.disturbances), default=math.inf)
        baseline_peak = 0.0
        peak_filtered = 0.0
        max_roll = 0.0
        separation_ok = True
        fall_time: float | None = None
        lock_in = cfg.lock_in_cycles * self.stride_period
        ticks_done = 0

        for i in range(n_ticks):
            t_now = i * dt
            t_next = (i + 1) * dt

            kernels.network_rk4_step(x, y, en, osc.a, osc.b, osc.mu, osc.tau,
                                     osc.omega_st, osc.omega_sw, k_mat, dt)

            # zero crossings of the phase signals flush pending amplitudes
            for leg in range(4):
                if (prev_x[leg] <= 0.0 < x[leg]) or (prev_x[leg] >= 0.0 > x[leg]):
                    knee_latches[leg].flush()
                lm = cpg.N_HIPS + leg
                if (prev_x[lm] <= 0.0 < x[lm]) or (prev_x[lm] >= 0.0 > x[lm]):
                    slider_latches[leg].flush()
            np.copyto(prev_x, x)

            # stance-pair transition = sign change of the clock unit's y
            y1 = y[0]
            y1_sign = 1 if y1 > 0.0 else (-1 if y1 < 0.0 else prev_y1_sign)
            at_boundary = prev_y1_sign != 0 and y1_sign != prev_y1_sign
            prev_y1_sign = y1_sign
            if at_boundary:
                side = y1_sign

            force = total_force(self.disturbances, t_now)
            reach = (self.u_max if (self.reflex_enabled and ctrl.mode == "stepping")
                     else pp.passive_reach)
            prev_plant = plant_state
            plant_state = step_plant(plant_state, pending_update, force, dt, q,
                                     geom.mass, geom.stance_halfwidth, geom.z_g,
                                     pp, reach)
            pending_update = None

            raw = measured_lateral_accel(prev_plant, plant_state, dt)
            filtered = kernels.biquad_step(w_taps, f_coeffs, raw)
            peak_filtered = max(peak_filtered, abs(filtered))
            if t_next < first_dist:
                baseline_peak = max(baseline_peak, abs(filtered))

            candidate = None
            if ctrl.mode == "stepping" and at_boundary:
                candidate = plan_step(plant_state.cog, q, geom)
            if self.reflex_enabled and not plant_state.fallen:
                ctrl, cmds = update(ctrl, cfg, filtered, plant_state, None,
                                    t_next, at_boundary=at_boundary,
                                    candidate_plan=candidate,
                                    handback_reach=pp.passive_reach)
            else:
                cmds = ReflexCommands()

            placed_reflex = False
            if cmds.triggered:
                en[cpg.N_HIPS:] = 1.0
                x[cpg.N_HIPS:] = 0.0
                y[cpg.N_HIPS:] = 0.0
                plan0 = plan_step(plant_state.cog, q, geom)
                h_c, a_req, a_cmd, capped = self._knee_request(filtered)
                for leg in range(4):
                    slider_latches[leg].request(
                        plan0.slider_targets[gait.LEG_KIND[leg]])
                    knee_latches[leg].request(a_cmd)
                current_ep = Episode(
                    trigger_time=t_next, direction=ctrl.direction,
                    force_sign_at_trigger=(0 if force == 0.0
                                           else (1 if force > 0.0 else -1)),
                    xdot_at_trigger=plant_state.cog.xdot,
                    first_plan_offset=plan0.unclamped_offset,
                    peak_filtered=abs(filtered))
            if cmds.place_foothold is not None:
                plan = cmds.place_foothold
                pending_update = FootholdUpdate(support_x=plan.foothold_x,
                                                phase=side)
                h_c, a_req, a_cmd, capped = self._knee_request(filtered)
                for leg in range(4):
                    slider_latches[leg].request(
                        plan.slider_targets[gait.LEG_KIND[leg]])
                    knee_latches[leg].request(a_cmd)
                if current_ep is not None:
                    current_ep.steps = ctrl.steps_taken
                    current_ep.onsets.append(StepOnset(
                        t=t_next, xdot=plant_state.cog.xdot,
                        plan_offset=plan.offset,
                        plan_unclamped=plan.unclamped_offset,
                        clamped=plan.clamped, h_c=h_c, a_k_required=a_req,
                        a_k_commanded=a_cmd, lift_capped=capped))
                placed_reflex = True
            if cmds.episode_ended or cmds.disable_lm:
                en[cpg.N_HIPS:] = 0.0
                x[cpg.N_HIPS:] = 0.0
                y[cpg.N_HIPS:] = 0.0
                for leg in range(4):
                    slider_latches[leg] = LatchedValue(0.0)
                    knee_latches[leg].request(self.idle_knee)
                if cmds.episode_ended and current_ep is not None:
                    current_ep.termination_time = t_next
                    current_ep.terminated_by = "converged"
                    episodes.append(current_ep)
                    current_ep = None
            if at_boundary and not placed_reflex:
                # plain stance placement: capture demand within passive
                # authority plus the alternating stance-pair offset
                offset = max(-pp.passive_reach,
                             min(pp.passive_reach, plant_state.cog.xdot / q))
                support = plant_state.cog.x + offset + side * pp.stance_offset
                pending_update = FootholdUpdate(support_x=support, phase=side)

            roll = plant_state.roll_proxy
            max_roll = max(max_roll, abs(roll))

            if current_ep is not None:
                current_ep.peak_filtered = max(current_ep.peak_filtered,
                                               abs(filtered))
                if (ctrl.mode == "stepping" and ctrl.trigger_time is not None
                        and t_next - ctrl.trigger_time >= lock_in):
                    net_view = NetworkState.from_arrays(x, y, en, t_next)
                    check = enforce_phase_consistency(net_view,
                                                      cfg.phase_tolerance, osc.mu)
                    if not math.isnan(check.worst_error):
                        current_ep.phase_checked = True
                        current_ep.phase_worst_error = max(
                            current_ep.phase_worst_error, check.worst_error)
                        if not check.ok:
                            current_ep.phase_ok = False

            hip_cmds = [self.hip_gain * x[leg] for leg in range(4)]
            knee_cmds = [gait.knee_signal(self.hip_gain * y[leg],
                                          knee_latches[leg].value,
                                          self.a_h_used, amps.sign)
                         for leg in range(4)]
            slider_cmds = [(slider_latches[leg].value / mu_amp) * x[cpg.N_HIPS + leg]
                           for leg in range(4)]
            if any(s != 0.0 for s in slider_cmds):
                if not gait.diagonal_pairs_separated(slider_cmds, geom):
                    separation_ok = False
                    if current_ep is not None:
                        current_ep.separation_ok = False

            raw_mps2 = raw / 1000.0
            # single lumped segment: pressure point of the standard moment balance
            x_zmp = plant_state.cog.x - raw_mps2 * geom.z_g / pp.g

            if record_trace:
                row = trace[i]
                row[0] = t_next
                row[1] = plant_state.cog.x
                row[2] = plant_state.cog.xdot
                row[3] = raw
                row[4] = filtered
                row[5] = x_zmp
                row[6] = plant_state.support_x
                row[7] = math.degrees(roll)
                row[8] = 1.0 if ctrl.mode == "stepping" else 0.0
                row[9] = ctrl.steps_taken
                row[10] = 1.0 if plant_state.fallen else 0.0
                row[11:15] = hip_cmds
                row[15:19] = knee_cmds
                row[19:23] = slider_cmds
            ticks_done = i + 1

            if not (math.isfinite(plant_state.cog.x)
                    and math.isfinite(plant_state.cog.xdot)
                    and math.isfinite(y1) and math.isfinite(filtered)):
                raise NonFiniteStateError(f"non-finite state at tick {i} (t={t_next:.3f}s)")

            if plant_state.fallen:
                fall_time = t_next
                if current_ep is not None:
                    current_ep.terminated_by = "fallen"
                    episodes.append(current_ep)
                    current_ep = None
                break

        if current_ep is not None:
            current_ep.terminated_by = "run_end"
            episodes.append(current_ep)

        trace_dict = None
        if record_trace:
            trace_view = trace[:ticks_done]
            trace_dict = {name: np.ascontiguousarray(trace_view[:, j])
                          for j, name in enumerate(TRACE_COLUMNS)}
        return RunResult(
            trace=trace_dict, episodes=episodes,
            fallen=plant_state.fallen, fall_time=fall_time,
            duration=self.duration, dt=dt, n_ticks=ticks_done,
            baseline_peak_filtered=baseline_peak, peak_filtered=peak_filtered,
            max_roll_deg=math.degrees(max_roll), separation_ok=separation_ok)
