"""Synthetic dataset builder: the stand-in for human data collection.

Per solidity level: 7 classes x 60 traces (6 synthetic subjects x 10
trials).  Subjects get a persistent amplitude factor, trials vary through
the per-trace jitter inside the generator.  Directory layout:
<solidity>/<label>/<trace>.jsonl with a header record per file.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..signal.frames import GESTURE_LABELS, GestureTrace, SignalConfig
from ..signal.gestures import GestureParams, synthesize_gesture
from .windows import Scaler, baseline_normalize

N_SUBJECTS = 6
SUBJECT_AMPLITUDE_SIGMA = 0.20


def _trace_seed(seed: int, solidity: float, label_idx: int, subject: int,
                trial: int) -> int:
    ss = np.random.SeedSequence(
        [seed, int(round(solidity * 1000)), label_idx + 1, subject, trial])
    return int(ss.generate_state(1)[0])


def _subject_factor(seed: int, solidity: float, subject: int) -> float:
    ss = np.random.SeedSequence([seed, int(round(solidity * 1000)), subject])
    rng = np.random.default_rng(ss)
    return float(np.exp(SUBJECT_AMPLITUDE_SIGMA * rng.standard_normal()))


def make_dataset(solidity: float, per_class: int = 60, seed: int = 0,
                 duration_ms: int = 5000,
                 params: GestureParams = GestureParams(),
                 cfg: SignalConfig = SignalConfig()) -> list:
    """Balanced labeled traces for one solidity level."""
    if per_class % N_SUBJECTS:
        raise ValueError(f"per_class must divide into {N_SUBJECTS} subjects")
    trials = per_class // N_SUBJECTS
    traces = []
    for label_idx, label in enumerate(GESTURE_LABELS):
        for subject in range(N_SUBJECTS):
            factor = _subject_factor(seed, solidity, subject)
            for trial in range(trials):
                traces.append(synthesize_gesture(
                    label, solidity, duration_ms=duration_ms,
                    seed=_trace_seed(seed, solidity, label_idx, subject,
                                     trial),
                    subject_id=subject, amplitude_scale=factor,
                    params=params, cfg=cfg))
    return traces


def rest_calibration(solidity: float, seed: int = 0,
                     params: GestureParams = GestureParams(),
                     cfg: SignalConfig = SignalConfig()) -> Scaler:
    """Session scaler from a dedicated five-second resting recording."""
    trace = synthesize_gesture("Resting", solidity, duration_ms=5000,
                               seed=_trace_seed(seed, solidity, -1, 0, 0),
                               params=params, cfg=cfg)
    return baseline_normalize(trace.frames, span_s=5.0, cfg=cfg)


def save_dataset(traces, root: str | Path) -> Path:
    """Write <solidity>/<label>/trace_<k>.jsonl under root."""
    from ..signal.frames import trace_to_jsonl
    root = Path(root)
    counters: dict[tuple, int] = {}
    for tr in traces:
        key = (f"{tr.solidity:.2f}", tr.label)
        k = counters.get(key, 0)
        counters[key] = k + 1
        d = root / key[0] / tr.label
        d.mkdir(parents=True, exist_ok=True)
        trace_to_jsonl(tr, d / f"trace_{k:03d}.jsonl")
    return root


def load_dataset(root: str | Path, solidity: float | None = None) -> list:
    """Read back traces; optionally only one solidity level."""
    from ..signal.frames import trace_from_jsonl
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    traces = []
    levels = [root / f"{solidity:.2f}"] if solidity is not None \
        else sorted(p for p in root.iterdir() if p.is_dir())
    for level in levels:
        if not level.exists():
            raise FileNotFoundError(f"no dataset level at {level}")
        for label_dir in sorted(p for p in level.iterdir() if p.is_dir()):
            for f in sorted(label_dir.glob("*.jsonl")):
                traces.append(trace_from_jsonl(f))
    return traces
