"""Baseline normalization and sliding-window featurization.

Two features per sample: the z-scored inductance and its first difference.
The scaler comes from a five-second resting span, mirroring the device's
normalization phase before data collection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signal.frames import GestureTrace, SignalConfig

N_FEATURES = 2


class DegenerateSignalError(ValueError):
    """Zero-variance calibration span; the sensor is not producing signal."""


@dataclass(frozen=True)
class WindowConfig:
    sample_rate: float = 100.0  # Hz
    window_len: int = 100  # samples (1 s)
    hop: int = 5  # samples (50 ms at the default rate)

    def __post_init__(self):
        if self.window_len < 2 or self.hop < 1:
            raise ValueError("window_len >= 2 and hop >= 1 required")
        if self.hop > self.window_len:
            raise ValueError("hop must not exceed window_len")

    @property
    def hop_ms(self) -> float:
        return self.hop * 1000.0 / self.sample_rate


_DEGENERATE_REL_STD = 1e-9  # below this relative spread the sensor is dead


@dataclass(frozen=True)
class Scaler:
    mean: float
    std: float

    def __post_init__(self):
        floor = _DEGENERATE_REL_STD * max(abs(self.mean), 1e-30)
        if not self.std > floor:
            raise DegenerateSignalError("zero-variance calibration signal")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std

    def to_json(self) -> dict:
        return {"mean": self.mean, "std": self.std}

    @classmethod
    def from_json(cls, data: dict) -> "Scaler":
        return cls(mean=float(data["mean"]), std=float(data["std"]))


def baseline_normalize(frames, span_s: float = 5.0,
                       cfg: SignalConfig = SignalConfig()) -> Scaler:
    """Build the scaler from the first `span_s` seconds of a (resting) stream."""
    n = int(round(span_s * cfg.sample_rate))
    values = []
    for frame in frames:
        values.append(frame.inductance(cfg))
        if len(values) >= n:
            break
    if len(values) < n:
        raise ValueError(f"need {n} frames for a {span_s}s baseline, "
                         f"got {len(values)}")
    arr = np.asarray(values)
    return Scaler(mean=float(arr.mean()), std=float(arr.std()))


def compress(z: np.ndarray) -> np.ndarray:
    """Symmetric log compression of z-scores.

    Strong gestures reach tens of sigma against the resting baseline;
    feeding those raw saturates the recurrent gates and stalls training.
    log1p keeps weak signals near-linear and bounds the strong ones.
    """
    return np.sign(z) * np.log1p(np.abs(z))


def trace_features(trace: GestureTrace, scaler: Scaler,
                   cfg: SignalConfig = SignalConfig()) -> np.ndarray:
    """(T, 2) features: compressed normalized inductance + first difference."""
    x = compress(scaler.apply(trace.inductances(cfg)))
    dx = np.diff(x, prepend=x[0])
    return np.stack([x, dx], axis=1)


def make_windows(trace: GestureTrace, wcfg: WindowConfig, scaler: Scaler,
                 cfg: SignalConfig = SignalConfig()) -> np.ndarray:
    """All sliding windows of a trace: (n, window_len, 2).

    n = floor((T - window_len) / hop) + 1.
    """
    feats = trace_features(trace, scaler, cfg)
    return window_array(feats, wcfg)


def window_array(feats: np.ndarray, wcfg: WindowConfig) -> np.ndarray:
    t_len = len(feats)
    if t_len < wcfg.window_len:
        raise ValueError(f"trace of {t_len} samples shorter than the "
                         f"{wcfg.window_len}-sample window")
    n = (t_len - wcfg.window_len) // wcfg.hop + 1
    idx = (np.arange(n)[:, None] * wcfg.hop
           + np.arange(wcfg.window_len)[None, :])
    return feats[idx]
