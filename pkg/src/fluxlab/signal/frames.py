"""Signal frames and the evaluation-board wire protocol emulation.

Frames travel as newline-delimited ASCII 'CH<k>,<tick>,<raw28>'.  The raw
28-bit code is the resonance-counter reading of an LC tank: the inductance
maps to a resonant frequency f = 1/(2 pi sqrt(L C)) against a fixed
reference clock.  Decoding inverts the mapping to within quantization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

RAW_BITS = 28
RAW_MAX = 1 << RAW_BITS

GESTURE_LABELS = (
    "Resting",
    "Compression",
    "Extension",
    "Twisting",
    "Bending",
    "CompressionTwisting",
    "ExtensionTwisting",
)


class FrameDecodeError(ValueError):
    pass


@dataclass(frozen=True)
class SignalConfig:
    sample_rate: float = 100.0  # Hz
    tank_capacitance: float = 330e-12  # F
    reference_freq: float = 40e6  # Hz
    noise_rel: float = 0.005  # sigma as a fraction of baseline L
    drift_rel_per_min: float = 0.001  # slow baseline drift

    @property
    def frame_interval_ms(self) -> float:
        return 1000.0 / self.sample_rate


@dataclass(frozen=True)
class SignalFrame:
    tick: int  # ms since stream start
    channel: int
    raw_code: int  # 28-bit counter reading

    def __post_init__(self):
        if not 0 <= self.raw_code < RAW_MAX:
            raise ValueError(f"raw code {self.raw_code} outside 28 bits")

    def inductance(self, cfg: SignalConfig = SignalConfig()) -> float:
        """Microhenries, inverted from the raw code."""
        f = self.raw_code * cfg.reference_freq / RAW_MAX
        l_h = 1.0 / ((2.0 * math.pi * f) ** 2 * cfg.tank_capacitance)
        return l_h * 1e6


def raw_code_for_inductance(l_uh: float,
                            cfg: SignalConfig = SignalConfig()) -> int:
    f = 1.0 / (2.0 * math.pi * math.sqrt(l_uh * 1e-6 * cfg.tank_capacitance))
    code = round(RAW_MAX * f / cfg.reference_freq)
    if not 0 <= code < RAW_MAX:
        raise ValueError(f"inductance {l_uh} uH produces out-of-range code")
    return code


def encode_frame(frame: SignalFrame) -> bytes:
    return f"CH{frame.channel},{frame.tick},{frame.raw_code}\n".encode()


def decode_frame(line: bytes | str, lineno: int | None = None) -> SignalFrame:
    where = f" (line {lineno})" if lineno is not None else ""
    if isinstance(line, bytes):
        line = line.decode("ascii", errors="replace")
    line = line.strip()
    if not line.startswith("CH"):
        raise FrameDecodeError(f"frame must start with 'CH'{where}: {line!r}")
    parts = line[2:].split(",")
    if len(parts) != 3:
        raise FrameDecodeError(f"expected CH<k>,<tick>,<raw>{where}: {line!r}")
    try:
        channel, tick, raw = (int(p) for p in parts)
    except ValueError as exc:
        raise FrameDecodeError(f"non-integer field{where}: {line!r}") from exc
    if not 0 <= raw < RAW_MAX:
        raise FrameDecodeError(f"raw code overflow{where}: {raw}")
    return SignalFrame(tick=tick, channel=channel, raw_code=raw)


@dataclass(frozen=True)
class GestureTrace:
    """One labeled deformation recording."""

    label: str
    frames: tuple  # tuple[SignalFrame, ...]
    solidity: float
    subject_id: int = 0
    seed: int | None = None

    def __post_init__(self):
        if self.label not in GESTURE_LABELS:
            raise ValueError(f"unknown gesture label {self.label!r}")
        ticks = [f.tick for f in self.frames]
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ValueError("frame ticks must be strictly increasing")

    def inductances(self, cfg: SignalConfig = SignalConfig()):
        import numpy as np
        return np.asarray([f.inductance(cfg) for f in self.frames])

    def duration_ms(self) -> int:
        return self.frames[-1].tick - self.frames[0].tick if self.frames else 0


def frames_to_jsonl(frames, fh) -> None:
    for f in frames:
        fh.write(json.dumps({"tick": f.tick, "channel": f.channel,
                             "raw": f.raw_code}) + "\n")


def trace_to_jsonl(trace: GestureTrace, path: str | Path) -> None:
    """Header record with metadata, then one frame per line."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"label": trace.label, "solidity": trace.solidity,
                             "subject_id": trace.subject_id,
                             "seed": trace.seed, "kind": "gesture-trace",
                             "schema_version": 1}) + "\n")
        frames_to_jsonl(trace.frames, fh)


def trace_from_jsonl(path: str | Path) -> GestureTrace:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "gesture-trace":
            raise FrameDecodeError(f"{path}: missing gesture-trace header")
        frames = []
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            rec = json.loads(line)
            frames.append(SignalFrame(tick=rec["tick"],
                                      channel=rec.get("channel", 0),
                                      raw_code=rec["raw"]))
    return GestureTrace(label=header["label"], frames=tuple(frames),
                        solidity=header["solidity"],
                        subject_id=header.get("subject_id", 0),
                        seed=header.get("seed"))
