"""Deterministic simulation stack for a lateral-stepping trot reflex.

An eight-unit limit-cycle oscillator network drives a trot; a threshold
reflex on filtered lateral acceleration recruits four extra oscillators that
command capture-point side steps through hip/knee/slider mappings, closed
over a lateral point-mass plant.

Numerical kernels come from a compiled extension when available, with a
pure-Python fallback selected at import time (see `latstep.BACKEND`; set
LATSTEP_FORCE_FALLBACK=1 to force the fallback).
"""

from ._kernels import BACKEND
from .cpg import (NetworkState, OscillatorParams, OscillatorState,
                  duty_fraction, enable_lm_units, gait_matrix,
                  initial_network, phase_of, simulate, step_network,
                  trot_matrix)
from .errors import (ConfigError, DegenerateSupportError, GeometryError,
                     InsufficientDataError, LatstepError,
                     NonFiniteStateError, PhaseUndefinedError,
                     SafetyStopError)
from .gait import AmplitudeConfig, JointCommand, RobotGeometry, hip_amplitude
from .plant import Disturbance, PlantParams, PlantState, design_butterworth
from .reflex import Engine, Episode, ReflexConfig, RunResult
from .scenario import (ScenarioConfig, ScenarioResult, SweepResult, SweepSpec,
                       capture_grid, default_config, load_config,
                       run_scenario, run_sweep, save_config)
from .zmp import PendulumState, StepPlan, compute_zmp_x, plan_step

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    "LatstepError", "ConfigError", "NonFiniteStateError",
    "PhaseUndefinedError", "InsufficientDataError", "GeometryError",
    "DegenerateSupportError", "SafetyStopError",
    "OscillatorParams", "OscillatorState", "NetworkState",
    "initial_network", "trot_matrix", "gait_matrix", "step_network",
    "simulate", "enable_lm_units", "phase_of", "duty_fraction",
    "RobotGeometry", "AmplitudeConfig", "JointCommand", "hip_amplitude",
    "PendulumState", "StepPlan", "compute_zmp_x", "plan_step",
    "Disturbance", "PlantParams", "PlantState", "design_butterworth",
    "ReflexConfig", "Engine", "Episode", "RunResult",
    "ScenarioConfig", "ScenarioResult", "SweepSpec", "SweepResult",
    "default_config", "load_config", "save_config", "run_scenario",
    "run_sweep", "capture_grid",
]
