"""Training loop: Adam over BPTT gradients, stratified trace split.

Traces (not windows) are split 80/20 so no gesture leaks across the split.
Training draws a fixed number of evenly spaced windows from each training
trace; evaluation always uses every window.  Deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..signal.frames import GestureTrace, SignalConfig, GESTURE_LABELS
from .lstm import LSTMClassifier
from .windows import Scaler, WindowConfig, make_windows


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 200
    dropout: float = 0.3
    l2: float = 0.001
    batch_size: int = 16
    test_split: float = 0.2
    seed: int = 0
    hidden: int = 64
    windows_per_trace: int = 5  # training subsample; evaluation uses all
    eval_windows: int = 384  # per-epoch metric subsample cap


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    test_acc: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"schema_version": 1, "epochs": self.epochs,
                "train_loss": self.train_loss, "train_acc": self.train_acc,
                "test_loss": self.test_loss, "test_acc": self.test_acc}


def stratified_split(traces, test_fraction: float, rng: np.random.Generator):
    """Per-label shuffle and split; returns (train, test) trace lists."""
    by_label: dict[str, list] = {}
    for tr in traces:
        by_label.setdefault(tr.label, []).append(tr)
    train, test = [], []
    for label in sorted(by_label):
        group = by_label[label]
        order = rng.permutation(len(group))
        n_test = max(1, int(round(test_fraction * len(group))))
        for k, gi in enumerate(order):
            (test if k < n_test else train).append(group[gi])
    return train, test


# windows whose start falls in this fraction of the trace cover the ramp
# and hold phases of the recording protocol; the tails are mostly rest
_ACTIVE_SPAN = (0.2, 0.78)


def _training_windows(traces, scaler: Scaler, wcfg: WindowConfig,
                      per_trace: int, cfg: SignalConfig):
    xs, ys = [], []
    for tr in traces:
        wins = make_windows(tr, wcfg, scaler, cfg)
        if per_trace and per_trace < len(wins):
            lo = int(_ACTIVE_SPAN[0] * (len(wins) - 1))
            hi = int(_ACTIVE_SPAN[1] * (len(wins) - 1))
            idx = np.linspace(lo, hi, per_trace).round().astype(int)
            wins = wins[idx]
        xs.append(wins)
        ys.append(np.full(len(wins), GESTURE_LABELS.index(tr.label)))
    return np.concatenate(xs).astype(np.float32), np.concatenate(ys)


class Adam:
    def __init__(self, params: dict, lr: float):
        self.lr = lr
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            mhat = self.m[k] / b1c
            vhat = self.v[k] / b2c
            params[k] -= (self.lr * mhat
                          / (np.sqrt(vhat) + self.eps)).astype(params[k].dtype)


def _batch_metrics(model: LSTMClassifier, X: np.ndarray, y: np.ndarray,
                   l2: float, chunk: int = 256):
    """Loss/accuracy without dropout, in inference mode."""
    losses, correct = 0.0, 0
    for s in range(0, len(X), chunk):
        xb, yb = X[s:s + chunk], y[s:s + chunk]
        probs = model.forward(xb)
        eps = 1e-12
        losses += -np.log(np.maximum(
            probs[np.arange(len(yb)), yb], eps)).sum()
        correct += int((probs.argmax(axis=1) == yb).sum())
    loss = losses / len(X)
    if l2 > 0:
        loss += l2 * sum(float((model.params[k] ** 2).sum())
                         for k in ("Wx", "Wh", "Wy"))
    return float(loss), correct / len(X)


def train(traces, cfg: TrainConfig = TrainConfig(),
          wcfg: WindowConfig = WindowConfig(),
          scaler: Scaler | None = None,
          signal_cfg: SignalConfig = SignalConfig(),
          progress=None):
    """Train a classifier on labeled traces.

    Returns (model, scaler, report, (train_traces, test_traces)).
    `progress(epoch, epochs, report)` is called after each epoch.
    """
    rng = np.random.default_rng(cfg.seed)
    if scaler is None:
        # fall back to the pooled resting traces when no session scaler given
        rest = [tr for tr in traces if tr.label == "Resting"]
        if not rest:
            raise ValueError("no scaler given and no Resting traces to "
                             "calibrate one")
        values = np.concatenate([tr.inductances(signal_cfg) for tr in rest])
        scaler = Scaler(mean=float(values.mean()), std=float(values.std()))

    train_traces, test_traces = stratified_split(traces, cfg.test_split, rng)
    X_train, y_train = _training_windows(train_traces, scaler, wcfg,
                                         cfg.windows_per_trace, signal_cfg)
    X_test, y_test = _training_windows(test_traces, scaler, wcfg,
                                       cfg.windows_per_trace, signal_cfg)
    if cfg.eval_windows and len(X_test) > cfg.eval_windows:
        pick = rng.choice(len(X_test), size=cfg.eval_windows, replace=False)
        X_test, y_test = X_test[pick], y_test[pick]
    eval_train_pick = rng.choice(
        len(X_train), size=min(len(X_train), cfg.eval_windows), replace=False)

    model = LSTMClassifier(input_size=X_train.shape[2], hidden=cfg.hidden,
                           n_classes=len(GESTURE_LABELS), seed=cfg.seed)
    opt = Adam(model.params, cfg.learning_rate)
    dropout_rng = np.random.default_rng(cfg.seed + 1)
    report = TrainReport()

    n = len(X_train)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = order[s:s + cfg.batch_size]
            loss, grads = model.loss_and_grads(
                X_train[idx], y_train[idx], l2=cfg.l2,
                dropout=cfg.dropout, rng=dropout_rng)
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch)
            opt.step(model.params, grads)
            epoch_loss += loss * len(idx)
        tr_loss, tr_acc = _batch_metrics(
            model, X_train[eval_train_pick], y_train[eval_train_pick], cfg.l2)
        te_loss, te_acc = _batch_metrics(model, X_test, y_test, cfg.l2)
        report.epochs.append(epoch)
        report.train_loss.append(tr_loss)
        report.train_acc.append(tr_acc)
        report.test_loss.append(te_loss)
        report.test_acc.append(te_acc)
        if progress is not None:
            progress(epoch, cfg.epochs, report)
    return model, scaler, report, (train_traces, test_traces)
