"""Synthetic deformation gestures driving the coil model.

Each class has a smooth ramp-hold-release kinematic template over the
five-second recording.  Deformation amplitude scales with the structure's
compliance, (0.155 - solidity) / 0.045, so softer lattices produce larger
signal excursions.  Relative magnitudes are modeling choices: compression
and extension move the most, bending less (and in the compression
direction, which is where its confusions live), twisting least among the
non-rest classes.  Everything is deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coil import CoilCouplings, CoilState, coil_inductance
from .frames import (GESTURE_LABELS, GestureTrace, SignalConfig, SignalFrame,
                     raw_code_for_inductance)


@dataclass(frozen=True)
class GestureParams:
    base_coil: CoilState = CoilState()
    couplings: CoilCouplings = CoilCouplings()
    compress_strain: float = 0.167  # peak relative length decrease
    extend_strain: float = 0.20  # peak relative length increase
    twist_rad: float = -2.2  # winding-tightening twist at full amplitude
    twist_pull_strain: float = 0.037  # incidental lengthening while twisting
    twist_wring_depth: float = 0.8  # twist oscillation share (wringing)
    twist_wring_hz: float = 1.1  # wringing rhythm, jittered per trace
    bend_curvature_length: float = 1.414  # kappa*len at unit amplitude
    bend_shorten: float = 0.01  # slight chord shortening while bent
    timing_jitter: float = 0.15  # s, sigma of ramp edge jitter
    amplitude_jitter: float = 0.30  # sigma of per-trace lognormal scale


def compliance_of(solidity: float) -> float:
    if not 0.11 <= solidity <= 0.15:
        raise ValueError(f"solidity {solidity} outside [0.11, 0.15]")
    return (0.155 - solidity) / 0.045


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _envelope(t: np.ndarray, rng: np.random.Generator,
              jitter: float) -> np.ndarray:
    """Ramp-hold-release profile over the recording, edges jittered."""
    t_up0 = 0.7 + jitter * rng.standard_normal()
    t_up1 = t_up0 + 0.8 + 0.3 * abs(rng.standard_normal())
    t_dn1 = t[-1] - (0.6 + jitter * rng.standard_normal())
    t_dn0 = t_dn1 - (0.8 + 0.3 * abs(rng.standard_normal()))
    t_up0 = max(t_up0, 0.1)
    t_dn0 = max(t_dn0, t_up1 + 0.2)
    up = _smoothstep((t - t_up0) / max(t_up1 - t_up0, 1e-3))
    down = _smoothstep((t_dn1 - t) / max(t_dn1 - t_dn0, 1e-3))
    return np.minimum(up, down)


def synthesize_gesture(label: str, solidity: float, duration_ms: int = 5000,
                       seed: int = 0, subject_id: int = 0,
                       amplitude_scale: float = 1.0,
                       params: GestureParams = GestureParams(),
                       cfg: SignalConfig = SignalConfig()) -> GestureTrace:
    """Generate one labeled trace at the configured sample rate."""
    if label not in GESTURE_LABELS:
        raise ValueError(f"unknown gesture label {label!r}")
    rng = np.random.default_rng(seed)
    n = int(round(duration_ms * cfg.sample_rate / 1000.0))
    t = np.arange(n) / cfg.sample_rate

    amp = compliance_of(solidity) * amplitude_scale
    amp *= float(np.exp(params.amplitude_jitter * rng.standard_normal()))
    env = _envelope(t, rng, params.timing_jitter)

    base = params.base_coil
    length = np.full(n, base.length)
    curvature = np.zeros(n)
    twist = np.zeros(n)

    wants_compress = label in ("Compression", "CompressionTwisting")
    wants_extend = label in ("Extension", "ExtensionTwisting")
    wants_twist = "Twisting" in label
    if wants_compress:
        length = base.length * (1.0 - params.compress_strain * amp * env)
    elif wants_extend:
        length = base.length * (1.0 + params.extend_strain * amp * env)
    if label == "Bending":
        # curvature saturates with compliance: amplitude ~ sqrt scale
        kl = params.bend_curvature_length * np.sqrt(max(amp, 0.0)) * env
        curvature = kl / base.length
        length = base.length * (1.0 - params.bend_shorten * amp * env)
    if wants_twist:
        # twisting is a wringing motion: the grip oscillates about a held
        # twist instead of freezing, so the hold phase carries a rhythmic
        # signature that scales with the deformation amplitude
        phase = rng.uniform(0, 2 * np.pi)
        freq = params.twist_wring_hz * (1.0 + 0.2 * rng.standard_normal())
        depth = params.twist_wring_depth
        wring = (1.0 - depth) + depth * 0.5 * (
            1.0 + np.sin(2 * np.pi * freq * t + phase))
        env_twist = env * wring
        twist = params.twist_rad * amp * env_twist
        # twisting also pulls the coil slightly longer
        length = length * (1.0 + params.twist_pull_strain * amp * env_twist)

    baseline = coil_inductance(base, params.couplings)
    inductance = np.empty(n)
    for i in range(n):
        state = CoilState(base.turns, base.coil_radius, float(length[i]),
                          float(curvature[i]), float(twist[i]))
        inductance[i] = coil_inductance(state, params.couplings)

    drift_per_s = (cfg.drift_rel_per_min / 60.0) * baseline \
        * rng.choice((-1.0, 1.0))
    inductance = inductance + drift_per_s * t
    inductance = inductance + cfg.noise_rel * baseline \
        * rng.standard_normal(n)

    interval = cfg.frame_interval_ms
    frames = tuple(
        SignalFrame(tick=int(round(i * interval)), channel=0,
                    raw_code=raw_code_for_inductance(float(inductance[i]),
                                                     cfg))
        for i in range(n))
    return GestureTrace(label=label, frames=frames, solidity=solidity,
                        subject_id=subject_id, seed=seed)
