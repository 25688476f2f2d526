"""Trace-level evaluation: confusion matrix, macro-F1, per-class accuracy.

A trace's prediction is the majority vote over all of its windows; the
streaming path additionally smooths over the last few hops.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..signal.frames import GESTURE_LABELS, SignalConfig
from .lstm import LSTMClassifier
from .windows import Scaler, WindowConfig, make_windows


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray  # (7, 7), rows true, cols predicted
    macro_f1: float
    per_class_accuracy: dict
    n_traces: int

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "labels": list(GESTURE_LABELS),
            "confusion": self.confusion.tolist(),
            "macro_f1": self.macro_f1,
            "per_class_accuracy": self.per_class_accuracy,
            "n_traces": self.n_traces,
        }


def predict_window(model: LSTMClassifier, window: np.ndarray):
    """(label, confidence, distribution) for one feature window."""
    window = np.asarray(window)
    if window.ndim == 2:
        window = window[None]
    if window.shape[2] != model.input_size:
        raise ValueError(f"window has {window.shape[2]} features, model "
                         f"expects {model.input_size}")
    probs = model.forward(window)[0]
    k = int(probs.argmax())
    return GESTURE_LABELS[k], float(probs[k]), probs


def predict_trace(model: LSTMClassifier, trace, scaler: Scaler,
                  wcfg: WindowConfig = WindowConfig(),
                  cfg: SignalConfig = SignalConfig(),
                  chunk: int = 256) -> int:
    """Majority-vote class index over every window of the trace."""
    wins = make_windows(trace, wcfg, scaler, cfg).astype(np.float32)
    votes = np.zeros(len(GESTURE_LABELS), dtype=int)
    for s in range(0, len(wins), chunk):
        probs = model.forward(wins[s:s + chunk])
        for k in probs.argmax(axis=1):
            votes[k] += 1
    return int(votes.argmax())


class StablePredictor:
    """Streaming vote over the last k window predictions."""

    def __init__(self, model: LSTMClassifier, k: int = 5):
        self.model = model
        self.recent: deque = deque(maxlen=k)

    def update(self, window: np.ndarray):
        label, conf, probs = predict_window(self.model, window)
        self.recent.append(GESTURE_LABELS.index(label))
        votes = np.zeros(len(GESTURE_LABELS), dtype=int)
        for k in self.recent:
            votes[k] += 1
        stable = GESTURE_LABELS[int(votes.argmax())]
        return {"label": label, "confidence": conf,
                "distribution": probs.tolist(), "stable": stable}


def evaluate(model: LSTMClassifier, traces, scaler: Scaler,
             wcfg: WindowConfig = WindowConfig(),
             cfg: SignalConfig = SignalConfig()) -> EvalReport:
    if not traces:
        raise ValueError("empty test set")
    n = len(GESTURE_LABELS)
    confusion = np.zeros((n, n), dtype=int)
    for tr in traces:
        true = GESTURE_LABELS.index(tr.label)
        pred = predict_trace(model, tr, scaler, wcfg, cfg)
        confusion[true, pred] += 1
    return report_from_confusion(confusion)


def report_from_confusion(confusion: np.ndarray) -> EvalReport:
    n = confusion.shape[0]
    f1s = []
    per_class = {}
    for k in range(n):
        tp = confusion[k, k]
        fp = confusion[:, k].sum() - tp
        fn = confusion[k, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        f1s.append(f1)
        per_class[GESTURE_LABELS[k]] = float(recall)
    return EvalReport(confusion=confusion, macro_f1=float(np.mean(f1s)),
                      per_class_accuracy=per_class,
                      n_traces=int(confusion.sum()))
