from .thermal import (ThermalModel, DriveConfig, pwm_power, thermal_step,
                      phase_fraction, heating_time, cooling_time)
from .machine import (Mode, ControllerState, ControllerConfig, controller_step,
                      IllegalTransition)
from .scenario import run_scenario, ScenarioError

__all__ = [
    "ThermalModel", "DriveConfig", "pwm_power", "thermal_step",
    "phase_fraction", "heating_time", "cooling_time",
    "Mode", "ControllerState", "ControllerConfig", "controller_step",
    "IllegalTransition",
    "run_scenario", "ScenarioError",
]
