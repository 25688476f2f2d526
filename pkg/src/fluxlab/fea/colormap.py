"""Cool-to-warm strain coloring for the preview.

Colors follow strain quantiles, not raw values, so the gradient stays
informative whatever the strain magnitude; the map is deterministic and
rank-preserving.
"""

from __future__ import annotations

import numpy as np

# compact cool->warm ramp (blue, white-ish, red), interpolated linearly
_STOPS = np.array([
    [0.230, 0.299, 0.754],
    [0.865, 0.865, 0.865],
    [0.706, 0.016, 0.150],
])


def _ramp(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    out = np.empty(t.shape + (3,))
    lo = t < 0.5
    for c in range(3):
        out[..., c] = np.where(
            lo,
            _STOPS[0, c] + (t / 0.5) * (_STOPS[1, c] - _STOPS[0, c]),
            _STOPS[1, c] + ((t - 0.5) / 0.5) * (_STOPS[2, c] - _STOPS[1, c]))
    return out


def strain_colormap(values: np.ndarray) -> np.ndarray:
    """Map scalars to RGB in [0, 1] by quantile rank; constant input maps to
    the single mid color."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty strain field")
    if np.ptp(values) == 0:
        return np.tile(_ramp(np.array(0.5)), (values.size, 1))
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    ranks[order] = np.arange(values.size)
    return _ramp(ranks / (values.size - 1))


def color_warmth(colors: np.ndarray) -> np.ndarray:
    """Scalar warmth of ramp colors (red minus blue); monotone in rank."""
    colors = np.asarray(colors)
    return colors[..., 0] - colors[..., 2]
