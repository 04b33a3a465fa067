"""Derivation of SLIC parameters from a low-resolution guidance mask.

The frame-to-lesion area ratio, scaled by a calibration factor and quantized
to multiples of 5, gives the requested superpixel count; smoothing sigma and
compactness come from overrides or defaults. A synthetic degrader stands in
for a low-resolution predicted mask so the pipeline can be exercised without
any learned model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagecore import connected_components, validate_mask

# Count assigned when the guidance mask carries no lesion at all
# (the frame-to-smallest-lesion end of the ratio range).
NO_LESION_SEGMENTS = 700

# sigma default sits mid-way in the empirically best 1.5..2 band;
# compactness 10 is the usual CIELAB-scale choice.
DEFAULT_SIGMA = 1.75
DEFAULT_COMPACTNESS = 10.0


@dataclass
class RatioConfig:
    """Knobs of the area-ratio-to-segment-count mapping."""

    calibration: float = 1.0
    ns_min: int = 5
    ns_max: int = 700
    rounding_quantum: int = 5

    def validate(self) -> None:
        if self.calibration <= 0:
            raise ValueError(f"calibration must be > 0, got {self.calibration}")
        if self.rounding_quantum < 1:
            raise ValueError(f"rounding_quantum must be >= 1, got {self.rounding_quantum}")
        if self.ns_min > self.ns_max:
            raise ValueError(f"ns_min={self.ns_min} exceeds ns_max={self.ns_max}")


@dataclass
class GuidanceParams:
    """Derived SLIC inputs: segment count, compactness, smoothing sigma."""

    n_segments: int
    compactness: float
    sigma: float
    source: str = "external-mask"


def image_to_lesion_ratio(mask: np.ndarray, cfg: RatioConfig | None = None) -> int:
    """Segment count from the frame-to-largest-lesion area ratio.

    ratio = (height * width / area of largest 8-connected component) * C,
    rounded half-up to the nearest multiple of the quantum and clamped to
    [ns_min, ns_max]. An empty mask returns the no-lesion default of 700.
    """
    cfg = cfg or RatioConfig()
    cfg.validate()
    arr = validate_mask(mask)
    if not arr.any():
        return NO_LESION_SEGMENTS
    comp = connected_components(arr, connectivity=8)
    a_total = arr.shape[0] * arr.shape[1]
    a_lesion = comp.largest_component_area()
    ratio = (a_total / a_lesion) * cfg.calibration
    q = cfg.rounding_quantum
    ns = int(math.floor(ratio / q + 0.5)) * q
    return max(cfg.ns_min, min(cfg.ns_max, ns))


def derive_params(
    guidance_mask: np.ndarray,
    cfg: RatioConfig | None = None,
    compactness: float | None = None,
    sigma: float | None = None,
    source: str = "external-mask",
) -> GuidanceParams:
    """Bundle the derived segment count with sigma/compactness policy."""
    ns = image_to_lesion_ratio(guidance_mask, cfg)
    return GuidanceParams(
        n_segments=ns,
        compactness=DEFAULT_COMPACTNESS if compactness is None else compactness,
        sigma=DEFAULT_SIGMA if sigma is None else sigma,
        source=source,
    )


def degrade_ground_truth(gt: np.ndarray, factor: int, erode_px: int) -> np.ndarray:
    """Synthetic low-resolution stand-in for a predicted guidance mask.

    Downsamples by ``factor`` with a per-block majority vote (ties count as
    foreground), then erodes with a 3x3 square element ``erode_px`` times,
    imitating the resolution loss and conservative borders of a small
    learned predictor.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if erode_px < 0:
        raise ValueError(f"erode_px must be >= 0, got {erode_px}")
    arr = validate_mask(gt)
    h, w = arr.shape
    if factor > 1:
        ys = np.arange(0, h, factor)
        xs = np.arange(0, w, factor)
        ones = np.add.reduceat(np.add.reduceat(arr.astype(np.int64), ys, axis=0), xs, axis=1)
        bh = np.diff(np.append(ys, h))
        bw = np.diff(np.append(xs, w))
        sizes = bh[:, None] * bw[None, :]
        arr = (2 * ones >= sizes).astype(np.uint8)
    else:
        arr = arr.copy()
    if erode_px > 0:
        arr = ndimage.binary_erosion(
            arr, structure=np.ones((3, 3), dtype=bool), iterations=erode_px
        ).astype(np.uint8)
    return arr
