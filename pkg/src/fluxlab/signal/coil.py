"""Inductance model of the embedded spring coil.

Solenoid approximation with first-order corrections for bending and
twisting of the coil body:

    L = mu0 N^2 pi r^2 / len * (1 + c_b (kappa len)^2) * (1 + c_t twist)

Compression shortens the coil and raises L; extension lowers it.  The
coupling constants are small and configurable; twisting in the
winding-tightening direction (negative twist) lowers L.
"""

from __future__ import annotations

from dataclasses import dataclass

MU0 = 4.0e-7 * 3.141592653589793  # H/m


@dataclass(frozen=True)
class CoilCouplings:
    bend: float = 0.05  # c_b, per (curvature * length)^2
    twist: float = 0.02  # c_t, per radian


@dataclass(frozen=True)
class CoilState:
    turns: int = 50
    coil_radius: float = 3.5  # mm
    length: float = 60.0  # mm
    bend_curvature: float = 0.0  # 1/mm
    twist: float = 0.0  # rad, negative tightens the winding

    def __post_init__(self):
        if self.turns < 1:
            raise ValueError("coil needs at least one turn")
        if self.length <= 0 or self.coil_radius <= 0:
            raise ValueError("coil length and radius must be positive")


def coil_inductance(state: CoilState,
                    couplings: CoilCouplings = CoilCouplings()) -> float:
    """Inductance in microhenries."""
    r_m = state.coil_radius * 1e-3
    len_m = state.length * 1e-3
    base = MU0 * state.turns ** 2 * 3.141592653589793 * r_m ** 2 / len_m
    bend_factor = 1.0 + couplings.bend * (state.bend_curvature
                                          * state.length) ** 2
    twist_factor = 1.0 + couplings.twist * state.twist
    return base * bend_factor * twist_factor * 1e6
