"""Segmentation evaluation: overlap ratios, confusion rates, Hausdorff
distance, volumetric similarity, and the Kruskal-Wallis rank test.

Conventions for degenerate inputs: two empty masks agree perfectly
(iou = dice = 1), confusion rates with a 0/0 denominator are undefined and
reported as None (never coerced to 0), Hausdorff requires both masks
nonempty, and volumetric similarity requires at least one nonempty mask.
Undefined values are excluded from aggregate means and counted separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import chi2
from scipy.stats import t as t_dist

from .errors import EmptyMaskError
from .imagecore import require_same_shape, validate_mask

# Quality bands over the Dice score used for stratified reporting.
DICE_GOOD = 0.8
DICE_MODERATE = 0.5


@dataclass
class ConfusionCounts:
    """Pixelwise confusion totals of a predicted mask against ground truth."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def sensitivity(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def specificity(self) -> float | None:
        d = self.tn + self.fp
        return self.tn / d if d else None


@dataclass
class MetricsReport:
    """All per-pair metrics; None marks an undefined value."""

    iou: float
    dice: float
    precision: float | None
    sensitivity: float | None
    specificity: float | None
    volumetric_similarity: float | None
    hausdorff_px: float | None


def _pair(a, b):
    a = validate_mask(a)
    b = validate_mask(b)
    require_same_shape(a, b)
    return a, b


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; defined as 1.0 when both masks are empty."""
    a, b = _pair(a, b)
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return inter / union if union else 1.0


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice coefficient 2|A&B| / (|A|+|B|); 1.0 when both masks are empty."""
    a, b = _pair(a, b)
    inter = int(np.count_nonzero(a & b))
    total = int(np.count_nonzero(a)) + int(np.count_nonzero(b))
    return 2.0 * inter / total if total else 1.0


def confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Pixel counts of a prediction against ground truth."""
    pred, gt = _pair(pred, gt)
    p = pred.astype(bool)
    g = gt.astype(bool)
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(np.count_nonzero(~p & ~g))
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between foreground point sets, in pixels.

    max(h(A,B), h(B,A)) with h(X,Y) the largest nearest-neighbor Euclidean
    distance from X into Y, over full foreground coordinates.
    """
    a, b = _pair(a, b)
    pts_a = np.argwhere(a)
    pts_b = np.argwhere(b)
    if len(pts_a) == 0 or len(pts_b) == 0:
        raise EmptyMaskError("hausdorff distance requires both masks nonempty")
    d_ab = cKDTree(pts_b).query(pts_a, k=1)[0].max()
    d_ba = cKDTree(pts_a).query(pts_b, k=1)[0].max()
    return float(max(d_ab, d_ba))


def volumetric_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """VS = 1 - ||A| - |B|| / (|A| + |B|); requires a nonempty pair."""
    a, b = _pair(a, b)
    na = int(np.count_nonzero(a))
    nb = int(np.count_nonzero(b))
    if na + nb == 0:
        raise EmptyMaskError("volumetric similarity is undefined for two empty masks")
    return 1.0 - abs(na - nb) / (na + nb)


def evaluate_pair(pred: np.ndarray, gt: np.ndarray) -> MetricsReport:
    """All metrics for one prediction/ground-truth pair.

    Hausdorff is None when either mask is empty; volumetric similarity is
    None when both are; confusion-derived rates are None on 0/0.
    """
    pred, gt = _pair(pred, gt)
    conf = confusion(pred, gt)
    pred_any = bool(pred.any())
    gt_any = bool(gt.any())
    return MetricsReport(
        iou=iou(pred, gt),
        dice=dice(pred, gt),
        precision=conf.precision,
        sensitivity=conf.sensitivity,
        specificity=conf.specificity,
        volumetric_similarity=(volumetric_similarity(pred, gt) if (pred_any or gt_any) else None),
        hausdorff_px=(hausdorff(pred, gt) if (pred_any and gt_any) else None),
    )


def _rank_average(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg = (i + j + 2) / 2.0  # average of 1-based ranks i+1 .. j+1
        ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def kruskal_wallis(groups) -> tuple[float, float]:
    """Kruskal-Wallis H with tie correction and a chi-square p value.

    Requires at least two nonempty groups and three observations in total.
    When every observation is identical the statistic is 0 and p is 1 (no
    rank separation exists to test).
    """
    if len(groups) < 2:
        raise ValueError(f"need at least 2 groups, got {len(groups)}")
    arrays = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    for i, g in enumerate(arrays):
        if len(g) == 0:
            raise ValueError(f"group {i} is empty")
    pooled = np.concatenate(arrays)
    n = len(pooled)
    if n < 3:
        raise ValueError(f"need at least 3 observations in total, got {n}")
    ranks = _rank_average(pooled)

    h_stat = 0.0
    start = 0
    for g in arrays:
        r_sum = float(np.add.reduce(ranks[start : start + len(g)]))
        h_stat += r_sum * r_sum / len(g)
        start += len(g)
    h_stat = 12.0 / (n * (n + 1)) * h_stat - 3.0 * (n + 1)

    _, tie_counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(tie_counts**3 - tie_counts)) / (n**3 - n)
    if correction == 0.0:
        return 0.0, 1.0
    h_stat /= correction
    p = float(chi2.sf(h_stat, len(arrays) - 1))
    return float(h_stat), p


def mean_ci95(values) -> dict:
    """Mean with a 95% t-interval; CI is None for fewer than 2 values."""
    arr = np.asarray([v for v in values if v is not None], dtype=np.float64)
    n = len(arr)
    if n == 0:
        return {"mean": None, "ci95": None, "n": 0}
    mean = float(arr.mean())
    if n < 2:
        return {"mean": mean, "ci95": None, "n": n}
    sem = float(arr.std(ddof=1)) / np.sqrt(n)
    half = float(t_dist.ppf(0.975, n - 1)) * sem
    return {"mean": mean, "ci95": [mean - half, mean + half], "n": n}


def quality_group(dice_value: float, good: float = DICE_GOOD, moderate: float = DICE_MODERATE) -> str:
    """Quality band of a Dice score: good / moderate / poor."""
    if dice_value >= good:
        return "good"
    if dice_value >= moderate:
        return "moderate"
    return "poor"
