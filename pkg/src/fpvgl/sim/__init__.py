"""Digital-twin flight simulator: dynamics, telemetry, scenarios, pilots."""

from .dynamics import (CENTER_STICKS, DEFAULT_ORIGIN, SimConfig, SimState,
                       StickCommand, arm, disarm, step, wrap_angle)
from .pilot import CommandCell, LivePilot, ScriptedPilot
from .run import SimRunSummary, run_sim, simulate_session
from .scenarios import (Obstacle, Scenario, ScenarioFormatError, TASK_TITLES,
                        builtin_scenario, load_scenario, save_scenario)
from .telemetry import (PWM_ARM_THRESHOLD, PWM_CENTER, PWM_DISARMED, PWM_SPAN,
                        TelemetrySynth, read_frame_stamp, render_camera_frame)

__all__ = [
    "CENTER_STICKS", "DEFAULT_ORIGIN", "SimConfig", "SimState",
    "StickCommand", "arm", "disarm", "step", "wrap_angle",
    "CommandCell", "LivePilot", "ScriptedPilot",
    "SimRunSummary", "run_sim", "simulate_session",
    "Obstacle", "Scenario", "ScenarioFormatError", "TASK_TITLES",
    "builtin_scenario", "load_scenario", "save_scenario",
    "PWM_ARM_THRESHOLD", "PWM_CENTER", "PWM_DISARMED", "PWM_SPAN",
    "TelemetrySynth", "read_frame_stamp", "render_camera_frame",
]
