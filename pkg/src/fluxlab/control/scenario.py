"""Deterministic discrete-event scenario runner.

A script schedules gesture recognitions and duty changes on a fixed tick;
the trace records t_ms, mode, temperature, duty and any event applied at
that tick, plus whether a sensing frame was emitted (only while Sensing).
"""

from __future__ import annotations

from dataclasses import replace

from .machine import (ControllerConfig, ControllerState, Mode,
                      controller_step)
from .thermal import DriveConfig, ThermalModel


class ScenarioError(ValueError):
    pass


def _validate_script(script: dict) -> dict:
    if not isinstance(script, dict):
        raise ScenarioError("script must be a mapping")
    known = {"duration_ms", "dt_ms", "gestures", "duty", "trigger_actions",
             "thermal", "drive", "schema_version"}
    unknown = set(script) - known
    if unknown:
        raise ScenarioError(f"unknown script keys: {sorted(unknown)}")
    for g in script.get("gestures", []):
        if "t_ms" not in g or "label" not in g:
            raise ScenarioError("gesture entries need t_ms and label")
    for d in script.get("duty", []):
        if "t_ms" not in d or "duty" not in d:
            raise ScenarioError("duty entries need t_ms and duty")
    return script


def config_from_script(script: dict) -> ControllerConfig:
    thermal = ThermalModel(**script.get("thermal", {}))
    drive = DriveConfig(**script.get("drive", {}))
    triggers = tuple(
        (t["label"], t["action"])
        for t in script.get("trigger_actions",
                            [{"label": "Bending", "action": "actuate"}]))
    return ControllerConfig(thermal=thermal, drive=drive,
                            trigger_actions=triggers)


def run_scenario(script: dict, cfg: ControllerConfig | None = None) -> list:
    """Execute the script; returns the trace as a list of dicts."""
    script = _validate_script(script)
    if cfg is None:
        cfg = config_from_script(script)
    dt = float(script.get("dt_ms", 5.0))
    duration = float(script.get("duration_ms", 10_000.0))
    gestures = sorted(script.get("gestures", []), key=lambda g: g["t_ms"])
    duties = sorted(script.get("duty", []), key=lambda d: d["t_ms"])

    state = ControllerState(temperature=cfg.thermal.ambient,
                            duty=cfg.drive.duty)
    trace = []
    gi = di = 0
    t = 0.0
    while t < duration:
        event_desc = None
        while di < len(duties) and duties[di]["t_ms"] <= t:
            new_duty = min(1.0, max(0.0, float(duties[di]["duty"])))
            cfg = replace(cfg, drive=replace(cfg.drive, duty=new_duty))
            if state.mode is Mode.ACTUATING:
                state = replace(state, duty=new_duty)
            event_desc = f"duty={new_duty}"
            di += 1
        if gi < len(gestures) and gestures[gi]["t_ms"] <= t:
            label = gestures[gi]["label"]
            gi += 1
            if state.mode is Mode.SENSING:
                state = controller_step(state, {"type": "gesture",
                                                "label": label}, dt, cfg)
                event_desc = f"gesture:{label}"
            else:
                event_desc = f"gesture-dropped:{label}"
        state = controller_step(state, {"type": "tick"}, dt, cfg)
        t += dt
        row = {"t_ms": round(t, 6), "mode": state.mode.value,
               "T": round(state.temperature, 6), "duty": state.duty,
               "sensed": state.mode is Mode.SENSING,
               "output_flag": state.output_flag}
        if event_desc:
            row["event"] = event_desc
        trace.append(row)
    return trace
