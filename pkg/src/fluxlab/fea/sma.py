"""Helical-spring model of the SMA actuator.

The spring rate follows the standard round-wire helical spring formula
k = G d^4 / (8 D^3 n); contraction force at a given transformation phase is
the rate times the recovered stroke so far.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SmaSpringParams:
    wire_diameter: float = 0.75  # d, mm
    coil_diameter: float = 7.0  # D, mm (outer spring diameter)
    active_turns: int = 30  # n
    shear_modulus: float = 7500.0  # G, MPa (austenite nitinol)
    recovery_stroke: float = 24.0  # mm of free contraction when fully hot

    def __post_init__(self):
        if self.wire_diameter >= self.coil_diameter:
            raise ValueError("wire diameter must be below coil diameter")
        if min(self.wire_diameter, self.coil_diameter, self.active_turns,
               self.shear_modulus, self.recovery_stroke) <= 0:
            raise ValueError("spring parameters must be positive")

    @property
    def rate(self) -> float:
        """Spring rate k in N/mm (MPa * mm^4 / mm^3 = N/mm)."""
        d, D, n = self.wire_diameter, self.coil_diameter, self.active_turns
        return self.shear_modulus * d ** 4 / (8.0 * D ** 3 * n)


def sma_contraction(params: SmaSpringParams, phase: float) -> tuple[float, float]:
    """(blocked force N, free stroke mm) at austenite fraction `phase`."""
    if not 0.0 <= phase <= 1.0:
        raise ValueError(f"phase {phase} outside [0, 1]")
    stroke = phase * params.recovery_stroke
    return params.rate * stroke, stroke
