"""Portable classifier bundles: versioned JSON weights + standalone script.

The bundle directory holds model.json (shapes, base64 float32 weights,
scaler, labels, window config, sha256 checksum) and predict.py, a
numpy-only script that classifies a recorded trace without this package
installed.  Preload restores bit-identical predictions.
"""

from __future__ import annotations

import base64
import hashlib
import json
from pathlib import Path

import numpy as np

from .lstm import LSTMClassifier
from .windows import Scaler, WindowConfig

ARTIFACT_VERSION = 1


class ArtifactError(ValueError):
    pass


def _weights_checksum(weights: dict) -> str:
    digest = hashlib.sha256()
    for key in sorted(weights):
        digest.update(key.encode())
        digest.update(weights[key]["data"].encode())
    return digest.hexdigest()


def export_model(model: LSTMClassifier, scaler: Scaler,
                 wcfg: WindowConfig, path: str | Path,
                 labels=None, extra: dict | None = None) -> Path:
    """Write the artifact bundle; returns the bundle directory."""
    from ..signal.frames import GESTURE_LABELS
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    weights = {}
    for key, arr in model.params.items():
        arr32 = np.ascontiguousarray(arr, dtype=np.float32)
        weights[key] = {
            "shape": list(arr32.shape),
            "dtype": "float32",
            "data": base64.b64encode(arr32.tobytes()).decode("ascii"),
        }
    doc = {
        "schema_version": ARTIFACT_VERSION,
        "kind": "gesture-classifier",
        "hidden": model.hidden,
        "input_size": model.input_size,
        "labels": list(labels if labels is not None else GESTURE_LABELS),
        "scaler": scaler.to_json(),
        "window": {"sample_rate": wcfg.sample_rate,
                   "window_len": wcfg.window_len, "hop": wcfg.hop},
        "weights": weights,
        "checksum": _weights_checksum(weights),
    }
    if extra:
        doc["extra"] = extra
    (path / "model.json").write_text(json.dumps(doc))
    (path / "predict.py").write_text(_INFERENCE_SCRIPT)
    return path


def preload_model(path: str | Path):
    """Restore (model, scaler, window config, labels) from a bundle."""
    path = Path(path)
    doc_path = path / "model.json" if path.is_dir() else path
    if not doc_path.exists():
        raise ArtifactError(f"no model.json under {path}")
    doc = json.loads(doc_path.read_text())
    if doc.get("schema_version") != ARTIFACT_VERSION:
        raise ArtifactError(
            f"artifact version {doc.get('schema_version')} not supported "
            f"(expected {ARTIFACT_VERSION})")
    weights = doc["weights"]
    if _weights_checksum(weights) != doc.get("checksum"):
        raise ArtifactError("weights checksum mismatch: corrupted artifact")
    model = LSTMClassifier(input_size=doc["input_size"],
                           hidden=doc["hidden"],
                           n_classes=len(doc["labels"]))
    for key, spec in weights.items():
        arr = np.frombuffer(base64.b64decode(spec["data"]),
                            dtype=np.float32).reshape(spec["shape"])
        model.params[key] = arr.copy()
    scaler = Scaler.from_json(doc["scaler"])
    w = doc["window"]
    wcfg = WindowConfig(sample_rate=w["sample_rate"],
                        window_len=w["window_len"], hop=w["hop"])
    return model, scaler, wcfg, list(doc["labels"])


_INFERENCE_SCRIPT = '''#!/usr/bin/env python3
"""Standalone gesture classifier. Usage: predict.py trace.jsonl

Reads a recorded trace (JSON-lines: header record, then frames with
'tick' and 'raw' fields), applies the bundled scaler and model, prints
the majority-vote prediction as JSON.  Needs only numpy.
"""
import base64, json, math, sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
DOC = json.loads((HERE / "model.json").read_text())
H = DOC["hidden"]
W = {k: np.frombuffer(base64.b64decode(v["data"]), dtype=np.float32)
     .reshape(v["shape"]) for k, v in DOC["weights"].items()}


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def forward(X):
    h = np.zeros((len(X), H), dtype=np.float32)
    c = np.zeros_like(h)
    xp = X.reshape(-1, X.shape[2]) @ W["Wx"] + W["b"]
    xp = xp.reshape(X.shape[0], X.shape[1], 4 * H)
    for t in range(X.shape[1]):
        z = xp[:, t] + h @ W["Wh"]
        i, f = sigmoid(z[:, :H]), sigmoid(z[:, H:2 * H])
        g, o = np.tanh(z[:, 2 * H:3 * H]), sigmoid(z[:, 3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
    logits = h @ W["Wy"] + W["by"]
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def inductance(raw, cap=330e-12, fref=40e6):
    f = raw * fref / (1 << 28)
    return 1e6 / ((2 * math.pi * f) ** 2 * cap)


def main(path):
    lines = Path(path).read_text().splitlines()
    frames = [json.loads(ln) for ln in lines[1:] if ln.strip()]
    vals = np.array([inductance(fr["raw"]) for fr in frames])
    sc = DOC["scaler"]
    x = (vals - sc["mean"]) / sc["std"]
    dx = np.diff(x, prepend=x[0])
    feats = np.stack([x, dx], axis=1).astype(np.float32)
    wl, hop = DOC["window"]["window_len"], DOC["window"]["hop"]
    n = (len(feats) - wl) // hop + 1
    if n < 1:
        raise SystemExit("trace shorter than one window")
    idx = np.arange(n)[:, None] * hop + np.arange(wl)[None, :]
    probs = forward(feats[idx])
    votes = np.bincount(probs.argmax(axis=1), minlength=len(DOC["labels"]))
    k = int(votes.argmax())
    print(json.dumps({"label": DOC["labels"][k],
                      "vote_fraction": float(votes[k] / n)}))


if __name__ == "__main__":
    main(sys.argv[1])
'''
