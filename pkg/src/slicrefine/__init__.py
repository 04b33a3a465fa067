"""Guidance-driven SLIC superpixel refinement of lesion masks.

A low-resolution guidance mask parameterizes SLIC clustering on the
full-resolution image; the superpixel best covered by the guidance becomes
the refined output mask. Ships with a segmentation-metrics suite and a CLI.
"""

from .colorspace import srgb_to_lab
from .errors import (
    DecodeError,
    DimensionMismatchError,
    EmptyMaskError,
    NoGuidanceSignalError,
    SlicRefineError,
    TooSmallError,
)
from .guidance import (
    GuidanceParams,
    RatioConfig,
    degrade_ground_truth,
    derive_params,
    image_to_lesion_ratio,
)
from .imagecore import (
    ComponentLabeling,
    connected_components,
    load_image,
    load_mask,
    normalize,
    resize_mask_nearest,
    save_image,
    save_labels_pgm,
    save_mask,
)
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    confusion,
    dice,
    evaluate_pair,
    hausdorff,
    iou,
    kruskal_wallis,
    volumetric_similarity,
)
from .refine import (
    RefineConfig,
    RunReport,
    SuperpixelScores,
    hybrid_segment,
    score_superpixels,
    select_best,
    synthesize_mask,
)
from .slic import (
    SlicConfig,
    SuperpixelLabeling,
    assign_pixels,
    boundary_overlay,
    enforce_connectivity,
    gaussian_smooth,
    gradient_magnitude,
    grid_interval,
    init_centers,
    perturb_centers,
    slic,
    update_centers,
)
from .synthetic import lesion_image

__version__ = "0.1.0"
