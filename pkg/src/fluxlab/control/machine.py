"""Time-multiplexed sense/actuate state machine.

The single spring is either a sensor or a heater, never both: Sensing and
Actuating are separated by a Switching dwell (relay flip, under 10 ms).
A recognized trigger gesture starts actuation; full transformation or a
timeout hands over to Cooling; dropping below the hysteresis band returns
to Sensing.  Inputs arrive as a totally ordered event stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .thermal import DriveConfig, ThermalModel, phase_fraction, pwm_power, \
    thermal_step


class Mode(enum.Enum):
    SENSING = "Sensing"
    SWITCHING = "Switching"
    ACTUATING = "Actuating"
    COOLING = "Cooling"


class IllegalTransition(RuntimeError):
    """Event not legal in the current mode: controller programming error."""


@dataclass(frozen=True)
class ControllerConfig:
    thermal: ThermalModel = ThermalModel()
    drive: DriveConfig = DriveConfig()
    switch_ms: float = 5.0  # relay flip dwell; hardware bound is 10 ms
    actuation_timeout_ms: float = 8000.0
    trigger_actions: tuple = (("Bending", "actuate"),)  # label -> action

    def __post_init__(self):
        if self.switch_ms > 10.0:
            raise ValueError("switching dwell must be at most 10 ms")

    def action_for(self, label: str) -> str | None:
        for lbl, action in self.trigger_actions:
            if lbl == label:
                return action
        return None


@dataclass(frozen=True)
class ControllerState:
    mode: Mode = Mode.SENSING
    relay_on_heater: bool = False
    elapsed_in_mode_ms: float = 0.0
    temperature: float = 25.0
    next_mode: Mode | None = None  # destination while Switching
    duty: float = 0.0
    output_flag: bool = False  # demo payload (lamp on/off style toggles)


def controller_step(state: ControllerState, event: dict, dt_ms: float,
                    cfg: ControllerConfig = ControllerConfig()) \
        -> ControllerState:
    """Advance the machine by one event.

    Events: {type: tick} advances time dt_ms; {type: gesture, label: ...}
    reports a recognized gesture (only meaningful while Sensing);
    {type: actuation_done} and {type: cooled} are emitted internally by
    run_scenario but accepted here for completeness.
    """
    etype = event.get("type", "tick")
    if etype == "gesture":
        if state.mode is not Mode.SENSING:
            # gestures can only be recognized while the sensor is attached
            raise IllegalTransition(
                f"gesture event while {state.mode.value}")
        action = cfg.action_for(event.get("label", ""))
        if action == "actuate":
            return replace(state, mode=Mode.SWITCHING,
                           next_mode=Mode.ACTUATING, elapsed_in_mode_ms=0.0,
                           duty=cfg.drive.duty)
        if action == "toggle_output":
            return replace(state, output_flag=not state.output_flag)
        return state  # unrecognized gestures are ignored

    if etype in ("actuation_done", "cooled", "tick"):
        return _advance_time(state, dt_ms, cfg, etype)
    raise IllegalTransition(f"unknown event type {etype!r}")


def _advance_time(state: ControllerState, dt_ms: float,
                  cfg: ControllerConfig, etype: str) -> ControllerState:
    if dt_ms <= 0:
        raise ValueError("dt must be positive")
    heating = state.mode is Mode.ACTUATING
    power = pwm_power(replace(cfg.drive, duty=state.duty)) if heating else 0.0
    temperature = thermal_step(cfg.thermal, state.temperature, power, dt_ms)
    elapsed = state.elapsed_in_mode_ms + dt_ms
    mode = state.mode
    next_mode = state.next_mode
    duty = state.duty

    if mode is Mode.SWITCHING:
        # dwell completes at the start of the tick after switch_ms so the
        # trace shows the (sub-10 ms) switching interval
        if state.elapsed_in_mode_ms >= cfg.switch_ms:
            mode, next_mode, elapsed = next_mode, None, dt_ms
    elif mode is Mode.ACTUATING:
        phase = phase_fraction(cfg.thermal, temperature, "heating")
        done = etype == "actuation_done" or phase >= 1.0 \
            or elapsed >= cfg.actuation_timeout_ms
        if done:
            mode, elapsed, duty = Mode.COOLING, 0.0, 0.0
    elif mode is Mode.COOLING:
        threshold = cfg.thermal.austenite_start - cfg.thermal.cooling_hysteresis
        if etype == "cooled" or temperature < threshold:
            mode, next_mode, elapsed = Mode.SWITCHING, Mode.SENSING, 0.0
    return replace(state, mode=mode, next_mode=next_mode,
                   elapsed_in_mode_ms=elapsed, temperature=temperature,
                   duty=duty,
                   relay_on_heater=mode in (Mode.ACTUATING, Mode.COOLING))
