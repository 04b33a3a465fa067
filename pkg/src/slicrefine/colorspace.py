"""sRGB to CIELAB conversion (D65 white point, 2 degree observer).

SLIC measures color distance in CIELAB, so the clustering input is produced
here: normalized sRGB -> linear RGB (piecewise gamma expansion) -> XYZ ->
L*a*b*. No chromatic adaptation or ICC handling; relative distances are all
the clustering needs.
"""

from __future__ import annotations

import numpy as np

# Linear sRGB -> XYZ, D65. Rows sum to the white point (0.95047, 1, 1.08883).
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = np.array([0.95047, 1.0, 1.08883])

# CIE f(t) spline constants, delta = 6/29.
_DELTA = 6.0 / 29.0
_T0 = _DELTA**3
_F_SLOPE = 1.0 / (3.0 * _DELTA**2)
_F_OFFSET = 4.0 / 29.0

# Rows per processing slab; keeps float64 temporaries bounded on large images.
_SLAB_ELEMS = 1 << 22


def srgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert a normalized sRGB image (unit-interval floats) to CIELAB.

    Returns a float64 array of the same shape with (L, a, b) triplets;
    L lies in [0, 100], a/b roughly in [-128, 127]. The conversion is a pure
    per-pixel map: deterministic, and monotone in luminance for gray inputs.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) normalized image, got shape {arr.shape}")
    h, w = arr.shape[:2]
    out = np.empty_like(arr)
    slab = max(1, _SLAB_ELEMS // max(1, w))
    for y0 in range(0, h, slab):
        y1 = min(h, y0 + slab)
        _convert_slab(arr[y0:y1], out[y0:y1])
    return out


def _convert_slab(v: np.ndarray, out: np.ndarray) -> None:
    linear = np.where(v > 0.04045, ((v + 0.055) / 1.055) ** 2.4, v / 12.92)
    xyz = linear.reshape(-1, 3) @ _RGB_TO_XYZ.T
    t = xyz / _WHITE
    f = np.where(t > _T0, np.cbrt(t), _F_SLOPE * t + _F_OFFSET)
    f = f.reshape(v.shape)
    out[:, :, 0] = 116.0 * f[:, :, 1] - 16.0
    out[:, :, 1] = 500.0 * (f[:, :, 0] - f[:, :, 1])
    out[:, :, 2] = 200.0 * (f[:, :, 1] - f[:, :, 2])
