"""Superpixel selection against a guidance mask and the full hybrid pipeline.

Every superpixel is scored by the fraction of its pixels covered by the
resized guidance mask; the best-scoring superpixel (or, in threshold mode,
all superpixels above a cutoff) becomes the refined output mask.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .colorspace import srgb_to_lab
from .errors import NoGuidanceSignalError
from .guidance import GuidanceParams, RatioConfig, derive_params
from .imagecore import normalize, require_same_shape, resize_mask_nearest, validate_mask
from .slic import SlicConfig, SuperpixelLabeling, gaussian_smooth, slic

SELECTION_MODES = ("single-best", "threshold")


@dataclass
class SuperpixelScores:
    """Per-superpixel guidance coverage ratios in [0, 1].

    ``best_label`` is the smallest label attaining the maximum ratio.
    """

    ratios: np.ndarray
    best_label: int
    best_r: float


@dataclass
class RefineConfig:
    """Pipeline configuration.

    ``slic.n_segments`` is a placeholder: the working segment count always
    comes from the guidance mask. "single-best" selection emits exactly one
    superpixel; "threshold" mode additionally keeps every superpixel with
    coverage >= tau (an extension for lesions straddling superpixels; when
    nothing reaches tau it falls back to the single best).
    """

    selection_mode: str = "single-best"
    tau: float | None = None
    slic: SlicConfig = field(default_factory=lambda: SlicConfig(n_segments=1))
    ratio: RatioConfig = field(default_factory=RatioConfig)

    def validate(self) -> None:
        if self.selection_mode not in SELECTION_MODES:
            raise ValueError(f"selection_mode must be one of {SELECTION_MODES}, got {self.selection_mode!r}")
        if self.selection_mode == "threshold":
            if self.tau is None or not 0 < self.tau <= 1:
                raise ValueError(f"threshold mode requires tau in (0, 1], got {self.tau}")
        self.ratio.validate()
        if self.slic.compactness <= 0:
            raise ValueError(f"compactness must be > 0, got {self.slic.compactness}")
        if self.slic.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.slic.sigma}")
        if self.slic.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.slic.max_iter}")


@dataclass
class RunReport:
    """What one hybrid run decided and how long each stage took."""

    ns: int
    sigma: float
    compactness: float
    iterations: int
    best_r: float
    ms_slic: float
    ms_score: float
    ms_total: float
    source: str = "external-mask"

    def to_text(self) -> str:
        lines = [
            f"ns={self.ns}",
            f"sigma={self.sigma}",
            f"compactness={self.compactness}",
            f"iterations={self.iterations}",
            f"best_r={self.best_r}",
            f"ms_slic={self.ms_slic:.3f}",
            f"ms_score={self.ms_score:.3f}",
            f"ms_total={self.ms_total:.3f}",
            f"source={self.source}",
        ]
        return "\n".join(lines) + "\n"


def parse_run_report(text: str) -> dict:
    """Parse the flat key=value report format back into a dict."""
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or "=" not in line:
            continue
        key, value = line.split("=", 1)
        out[key] = value
    return out


def score_superpixels(labeling: SuperpixelLabeling, guidance_resized: np.ndarray) -> SuperpixelScores:
    """Coverage ratio of the resized guidance mask over every superpixel."""
    mask = validate_mask(guidance_resized)
    require_same_shape(labeling.labels, mask, "labeling and guidance mask")
    n = labeling.n_labels
    flat = labeling.labels.ravel()
    counts = np.bincount(flat, minlength=n)
    hits = np.bincount(flat, weights=mask.ravel().astype(np.float64), minlength=n)
    ratios = hits / counts
    best_label = int(np.argmax(ratios))
    return SuperpixelScores(ratios=ratios, best_label=best_label, best_r=float(ratios[best_label]))


def select_best(scores: SuperpixelScores) -> int:
    """Label of the highest-coverage superpixel (ties: smallest label).

    Raises NoGuidanceSignalError when every superpixel is disjoint from the
    guidance mask; that case is a declared failure, not an empty result.
    """
    if scores.best_r == 0:
        raise NoGuidanceSignalError("all superpixels are disjoint from the guidance mask")
    return scores.best_label


def synthesize_mask(labeling: SuperpixelLabeling, selected) -> np.ndarray:
    """Binary mask that is 1 exactly on the selected superpixels."""
    ids = sorted({int(i) for i in selected})
    for i in ids:
        if i < 0 or i >= labeling.n_labels:
            raise ValueError(f"unknown label {i}; labeling has {labeling.n_labels} superpixels")
    if not ids:
        return np.zeros(labeling.labels.shape, dtype=np.uint8)
    return np.isin(labeling.labels, ids).astype(np.uint8)


def hybrid_segment(
    image: np.ndarray,
    guidance_mask: np.ndarray,
    cfg: RefineConfig | None = None,
    source: str = "external-mask",
) -> tuple[np.ndarray, RunReport]:
    """Full image -> refined-mask flow.

    normalize -> CIELAB -> derive parameters from the guidance mask ->
    Gaussian smooth -> SLIC -> resize guidance to image size -> score ->
    select -> synthesize. Deterministic for fixed inputs; NoGuidanceSignal
    propagates when the guidance mask selects nothing.
    """
    cfg = cfg or RefineConfig()
    cfg.validate()
    guidance = validate_mask(guidance_mask)
    t_start = time.perf_counter()

    lab = srgb_to_lab(normalize(image))
    params = derive_params(
        guidance,
        cfg.ratio,
        compactness=cfg.slic.compactness,
        sigma=cfg.slic.sigma,
        source=source,
    )
    smoothed = gaussian_smooth(lab, params.sigma)
    del lab

    t0 = time.perf_counter()
    work_cfg = replace(cfg.slic, n_segments=params.n_segments, compactness=params.compactness, sigma=params.sigma)
    labeling = slic(smoothed, work_cfg)
    ms_slic = (time.perf_counter() - t0) * 1000.0

    h, w = image.shape[:2]
    resized = resize_mask_nearest(guidance, w, h)

    t0 = time.perf_counter()
    scores = score_superpixels(labeling, resized)
    ms_score = (time.perf_counter() - t0) * 1000.0

    best = select_best(scores)
    if cfg.selection_mode == "threshold":
        selected = np.nonzero(scores.ratios >= cfg.tau)[0]
        if len(selected) == 0:
            selected = [best]
    else:
        selected = [best]
    out = synthesize_mask(labeling, selected)

    report = RunReport(
        ns=params.n_segments,
        sigma=params.sigma,
        compactness=params.compactness,
        iterations=labeling.iterations_run,
        best_r=scores.best_r,
        ms_slic=ms_slic,
        ms_score=ms_score,
        ms_total=(time.perf_counter() - t_start) * 1000.0,
        source=params.source,
    )
    return out, report
