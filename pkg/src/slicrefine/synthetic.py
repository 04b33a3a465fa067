"""Seeded synthetic imagery: a uniform elliptical lesion on a textured
background, with its exact ground-truth mask.

Used by the benchmark command, the demos, and the test fixtures; everything
is driven by a numpy Generator so identical seeds give identical bytes.

The default geometry targets the pipeline's intended operating regime: the
lesion-to-frame area ratio lands inside one rounding quantum of the segment
count, so the derived grid gives the lesion roughly one superpixel. Lesions
spanning a grid line can still split across two superpixels (the known
single-best selection limitation); fixtures pin seeds accordingly.
"""

from __future__ import annotations

import numpy as np

# Fundus-flavored sRGB colors; the lightness gap is about 33 L* units,
# comfortably above the 15-unit floor the end-to-end fixtures assume.
BACKGROUND_RGB = (168, 106, 72)
LESION_RGB = (64, 30, 26)


def lesion_image(
    size: int,
    rng: np.random.Generator,
    noise_std: float = 2.5,
    radius_range: tuple[float, float] = (0.174, 0.179),
    aspect_range: tuple[float, float] = (0.95, 1.05),
) -> tuple[np.ndarray, np.ndarray]:
    """One synthetic frame: (RGB uint8 image, binary ground-truth mask).

    The lesion is a randomly placed, rotated ellipse; ``radius_range`` gives
    the geometric-mean semi-axis as a fraction of ``size`` and
    ``aspect_range`` the axis ratio. Per-pixel Gaussian RGB noise supplies
    background texture (sigma 2.5 in 8-bit units keeps the lightness noise
    well under 1 L* unit).
    """
    cx = rng.uniform(0.32, 0.68) * size
    cy = rng.uniform(0.32, 0.68) * size
    r0 = rng.uniform(*radius_range) * size
    aspect = rng.uniform(*aspect_range)
    ax = r0 * np.sqrt(aspect)
    ay = r0 / np.sqrt(aspect)
    theta = rng.uniform(0.0, np.pi)

    ys, xs = np.mgrid[0:size, 0:size]
    dx = xs - cx
    dy = ys - cy
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    mask = ((u / ax) ** 2 + (v / ay) ** 2 <= 1.0).astype(np.uint8)

    img = np.empty((size, size, 3), dtype=np.float64)
    for c in range(3):
        img[:, :, c] = np.where(mask, LESION_RGB[c], BACKGROUND_RGB[c])
    img += rng.normal(0.0, noise_std, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), mask
