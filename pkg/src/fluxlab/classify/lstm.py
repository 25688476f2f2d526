"""LSTM sequence classifier with hand-rolled backpropagation through time.

Single gated recurrent layer (hidden 64) over the two-feature windows, a
dense softmax head on the final hidden state, inverted dropout on that
state during training, L2 on the weight matrices.  The analytic gradients
are validated against central finite differences by gradient_check.
"""

from __future__ import annotations

import threading

import numpy as np

HIDDEN = 64
N_CLASSES = 7

_WEIGHT_KEYS = ("Wx", "Wh", "Wy")  # L2 applies to matrices, not biases


def _sigmoid(x):
    # exp overflow saturates to the correct 0/1 limits
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


_FD_EPS = 1e-4  # large enough to clear float64 cancellation noise
_FD_FLOOR = 1e-7  # gradients below this compare absolutely, not relatively


class LSTMClassifier:
    """Weights as flat arrays; gate order is (input, forget, output, cell)
    so the three sigmoid gates share one contiguous block."""

    def __init__(self, input_size: int = 2, hidden: int = HIDDEN,
                 n_classes: int = N_CLASSES, seed: int = 0,
                 dtype=np.float32):
        self.input_size = input_size
        self.hidden = hidden
        self.n_classes = n_classes
        self.dtype = dtype
        rng = np.random.default_rng(seed)

        def glorot(n_in, n_out):
            bound = np.sqrt(6.0 / (n_in + n_out))
            return rng.uniform(-bound, bound,
                               size=(n_in, n_out)).astype(dtype)

        h4 = 4 * hidden
        self.params = {
            "Wx": glorot(input_size, h4),
            "Wh": glorot(hidden, h4),
            "b": np.zeros(h4, dtype=dtype),
            "Wy": glorot(hidden, n_classes),
            "by": np.zeros(n_classes, dtype=dtype),
        }
        # forget-gate bias starts at 1: standard remedy for early forgetting
        self.params["b"][hidden:2 * hidden] = 1.0
        self._workspace = threading.local()

    def _scratch(self, key: str, shape, dtype) -> np.ndarray:
        """Reusable per-thread buffer; fresh multi-MB allocations would
        page-fault on every call, and sharing across threads would race."""
        pool = getattr(self._workspace, "pool", None)
        if pool is None:
            pool = self._workspace.pool = {}
        buf = pool.get(key)
        if buf is None or buf.shape != shape or buf.dtype != dtype:
            buf = np.empty(shape, dtype=dtype)
            pool[key] = buf
        return buf

    def astype(self, dtype) -> "LSTMClassifier":
        clone = LSTMClassifier(self.input_size, self.hidden, self.n_classes,
                               dtype=dtype)
        clone.params = {k: v.astype(dtype) for k, v in self.params.items()}
        return clone

    # --- forward ---------------------------------------------------------

    def _recurrence(self, X: np.ndarray):
        """Run the gated recurrence; returns final h and the step buffers."""
        p = self.params
        B, T, _ = X.shape
        H = self.hidden
        dtype = p["Wx"].dtype
        xp = X.reshape(B * T, -1) @ p["Wx"] + p["b"]
        xp = np.ascontiguousarray(
            xp.reshape(B, T, 4 * H).transpose(1, 0, 2))
        # time-major buffers keep each step's slice contiguous
        gates = self._scratch("gates", (T, B, 3 * H), dtype)  # sig(i, f, o)
        cell_in = self._scratch("cell_in", (T, B, H), dtype)  # tanh g
        c_all = self._scratch("c_all", (T, B, H), dtype)
        tc_all = self._scratch("tc_all", (T, B, H), dtype)
        h_all = self._scratch("h_all", (T, B, H), dtype)
        h = np.zeros((B, H), dtype=dtype)
        c = np.zeros((B, H), dtype=dtype)
        with np.errstate(over="ignore"):  # exp saturates to the 0/1 limits
            for t in range(T):
                z = xp[t] + h @ p["Wh"]
                gt = np.divide(1.0, 1.0 + np.exp(-z[:, :3 * H]),
                               out=gates[t])
                g = np.tanh(z[:, 3 * H:], out=cell_in[t])
                c = np.add(gt[:, H:2 * H] * c, gt[:, :H] * g, out=c_all[t])
                tc = np.tanh(c, out=tc_all[t])
                h = np.multiply(gt[:, 2 * H:], tc, out=h_all[t])
        return h.copy(), (gates, cell_in, c_all, tc_all, h_all)

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Class probabilities (B, n_classes); inference path, no dropout."""
        X = np.asarray(X, dtype=self.params["Wx"].dtype)
        h, _ = self._recurrence(X)
        logits = h @ self.params["Wy"] + self.params["by"]
        return _softmax(logits)

    # --- training step ---------------------------------------------------

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray, l2: float = 0.0,
                       dropout: float = 0.0,
                       rng: np.random.Generator | None = None):
        """Cross-entropy + L2 loss and gradients for one batch.

        Inverted dropout masks the final hidden state during training only.
        """
        p = self.params
        dtype = p["Wx"].dtype
        X = np.asarray(X, dtype=dtype)
        y = np.asarray(y, dtype=np.int64)
        B, T, _ = X.shape
        H = self.hidden

        h_T, cache = self._recurrence(X)
        if dropout > 0.0:
            if rng is None:
                raise ValueError("dropout requires an rng")
            mask = ((rng.random(h_T.shape) >= dropout).astype(dtype)
                    / np.asarray(1.0 - dropout, dtype=dtype))
            hd = h_T * mask
        else:
            mask = None
            hd = h_T
        logits = hd @ p["Wy"] + p["by"]
        probs = _softmax(logits)
        eps = np.finfo(dtype).tiny
        ce = -np.log(np.maximum(probs[np.arange(B), y], eps)).mean()
        loss = float(ce)
        if l2 > 0.0:
            loss += l2 * sum(float((p[k] ** 2).sum()) for k in _WEIGHT_KEYS)

        dlogits = probs.copy()
        dlogits[np.arange(B), y] -= 1.0
        dlogits /= B

        grads = {k: np.zeros_like(v) for k, v in p.items()}
        grads["Wy"] = hd.T @ dlogits
        grads["by"] = dlogits.sum(axis=0)
        dh = dlogits @ p["Wy"].T
        if mask is not None:
            dh = dh * mask

        gates, cell_in, c_all, tc_all, h_all = cache
        dc = np.zeros((B, H), dtype=dtype)
        dz_all = self._scratch("dz_all", (T, B, 4 * H), dtype)
        zeros = np.zeros((B, H), dtype=dtype)
        for t in range(T - 1, -1, -1):
            gt = gates[t]
            g = cell_in[t]
            tc = tc_all[t]
            c_prev = c_all[t - 1] if t > 0 else zeros
            dc = dc + dh * gt[:, 2 * H:] * (1.0 - tc * tc)
            dz = dz_all[t]
            dz[:, :H] = dc * g  # input gate
            dz[:, H:2 * H] = dc * c_prev  # forget gate
            dz[:, 2 * H:3 * H] = dh * tc  # output gate
            dz[:, :3 * H] *= gt * (1.0 - gt)
            dz[:, 3 * H:] = (dc * gt[:, :H]) * (1.0 - g * g)
            dh = dz @ p["Wh"].T
            dc = dc * gt[:, H:2 * H]
        h_prev = np.concatenate(
            [np.zeros((1, B, H), dtype=dtype), h_all[:-1]], axis=0)
        dz_flat = dz_all.reshape(T * B, -1)
        grads["Wh"] = h_prev.reshape(T * B, H).T @ dz_flat
        grads["Wx"] = (np.ascontiguousarray(X.transpose(1, 0, 2))
                       .reshape(T * B, -1).T @ dz_flat)
        grads["b"] = dz_all.sum(axis=(0, 1))

        if l2 > 0.0:
            for k in _WEIGHT_KEYS:
                grads[k] += (2.0 * l2) * p[k]
        return loss, grads


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def gradient_check(model: LSTMClassifier, X: np.ndarray, y: np.ndarray,
                   l2: float = 0.001, n_samples: int = 200,
                   eps: float = _FD_EPS, seed: int = 0) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Runs in double precision with dropout disabled; samples n_samples
    random parameters across all arrays.  Near-zero gradients are compared
    against an absolute floor: the central difference of a ~O(1) loss
    carries ~1e-12 of cancellation noise, which would swamp a relative
    comparison on entries whose true gradient is that small.
    """
    m = model.astype(np.float64)
    X = np.asarray(X, dtype=np.float64)
    _, grads = m.loss_and_grads(X, y, l2=l2, dropout=0.0)
    rng = np.random.default_rng(seed)
    keys = sorted(m.params.keys())
    sizes = np.array([m.params[k].size for k in keys])
    total = sizes.sum()
    worst = 0.0
    for flat in rng.choice(total, size=min(n_samples, total), replace=False):
        acc = 0
        for k, size in zip(keys, sizes):
            if flat < acc + size:
                idx = np.unravel_index(flat - acc, m.params[k].shape)
                orig = m.params[k][idx]
                m.params[k][idx] = orig + eps
                lp, _ = m.loss_and_grads(X, y, l2=l2, dropout=0.0)
                m.params[k][idx] = orig - eps
                lm, _ = m.loss_and_grads(X, y, l2=l2, dropout=0.0)
                m.params[k][idx] = orig
                numeric = (lp - lm) / (2.0 * eps)
                analytic = grads[k][idx]
                denom = max(abs(numeric), abs(analytic), _FD_FLOOR)
                worst = max(worst, abs(numeric - analytic) / denom)
                break
            acc += size
    return worst
