"""Sweep the pre-clustering Gaussian sigma and watch the refined-mask Dice.

The distance measure clusters on smoothed CIELAB values, so sigma trades
noise suppression against edge fidelity; the sweep shows a broad usable
band around the 1.5..2 default region.

Run:  python demos/smoothing_sensitivity_demo.py
"""

import numpy as np

from slicrefine import degrade_ground_truth, dice, hybrid_segment, lesion_image
from slicrefine.refine import RefineConfig
from slicrefine.slic import SlicConfig

rng = np.random.default_rng(107)
image, gt = lesion_image(512, rng, noise_std=5.0)
guidance = degrade_ground_truth(gt, 4, 1)

print("sigma   dice    iterations")
for sigma in (0.0, 0.5, 1.0, 1.5, 1.75, 2.0, 2.5, 3.0):
    cfg = RefineConfig(slic=SlicConfig(n_segments=1, sigma=sigma))
    mask, report = hybrid_segment(image, guidance, cfg)
    print(f"{sigma:4.2f}   {dice(mask, gt):.4f}  {report.iterations}")
