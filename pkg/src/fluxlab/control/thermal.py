"""Lumped thermal model of the embedded spring and the PWM drive.

First-order convective model, C dT/dt = P - h (T - ambient), stepped with
explicit Euler (stable for dt < 2 C / h; the 5-10 ms ticks are far below
that).  The default C and h were fitted so that 5 W heats 25 to 45 degrees
in 2-5 s and passive cooling returns 60 to 45 degrees in 10-20 s:
with tau = C/h the two envelopes give tau in [17.9, 22.4] and h <= 0.061,
so C = 1.0 J/K and h = 0.05 W/K sit comfortably inside both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ThermalModel:
    heat_capacity: float = 1.0  # C, J/K
    convection: float = 0.05  # h, W/K
    ambient: float = 25.0  # degrees C
    austenite_start: float = 45.0
    austenite_finish: float = 55.0
    cooling_hysteresis: float = 10.0  # downward shift of the cooling ramp

    def __post_init__(self):
        if self.austenite_finish <= self.austenite_start:
            raise ValueError("austenite finish must exceed start")
        if self.heat_capacity <= 0 or self.convection <= 0:
            raise ValueError("C and h must be positive")

    @property
    def max_stable_dt_ms(self) -> float:
        return 2000.0 * self.heat_capacity / self.convection


@dataclass(frozen=True)
class DriveConfig:
    voltage: float = 5.0  # V
    max_current: float = 1.0  # A
    duty: float = 1.0  # PWM duty cycle, clamped to [0, 1]
    period_ms: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "duty", min(1.0, max(0.0, self.duty)))


def pwm_power(cfg: DriveConfig) -> float:
    """Average Joule-heating power in watts: duty * V * I."""
    return cfg.duty * cfg.voltage * cfg.max_current


def thermal_step(model: ThermalModel, temperature: float, power: float,
                 dt_ms: float) -> float:
    """One explicit Euler step; dt must stay at or below 10 ms."""
    if dt_ms > 10.0:
        raise ValueError("thermal step limited to dt <= 10 ms")
    dt = dt_ms / 1000.0
    dT = (power - model.convection * (temperature - model.ambient)) \
        / model.heat_capacity
    return temperature + dt * dT


def phase_fraction(model: ThermalModel, temperature: float,
                   direction: str) -> float:
    """Austenite fraction: linear ramp start->finish, cooling ramp shifted
    down by the hysteresis offset."""
    if direction not in ("heating", "cooling"):
        raise ValueError(f"direction must be heating or cooling, "
                         f"got {direction!r}")
    lo = model.austenite_start
    hi = model.austenite_finish
    if direction == "cooling":
        lo -= model.cooling_hysteresis
        hi -= model.cooling_hysteresis
    x = (temperature - lo) / (hi - lo)
    return min(1.0, max(0.0, x))


def heating_time(model: ThermalModel, power: float, t_from: float,
                 t_to: float) -> float:
    """Analytic seconds for the continuous model to heat t_from -> t_to."""
    tau = model.heat_capacity / model.convection
    t_inf = model.ambient + power / model.convection
    if t_to >= t_inf:
        return math.inf
    return tau * math.log((t_inf - t_from) / (t_inf - t_to))


def cooling_time(model: ThermalModel, t_from: float, t_to: float) -> float:
    """Analytic seconds for passive cooling t_from -> t_to."""
    tau = model.heat_capacity / model.convection
    if t_to <= model.ambient:
        return math.inf
    return tau * math.log((t_from - model.ambient) / (t_to - model.ambient))
