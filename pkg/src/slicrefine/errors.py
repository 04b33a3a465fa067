"""Exception types shared across the library.

Parameter-validation failures raise plain ``ValueError`` with a descriptive
message; the classes below mark outcomes callers are expected to branch on.
"""


class SlicRefineError(Exception):
    """Base class for library-specific errors."""


class DecodeError(SlicRefineError):
    """A raster file exists but cannot be decoded as the expected format."""


class TooSmallError(SlicRefineError, ValueError):
    """Image smaller than the 3x3 minimum needed for gradient computation."""


class DimensionMismatchError(SlicRefineError, ValueError):
    """Two rasters that must share dimensions do not."""


class EmptyMaskError(SlicRefineError, ValueError):
    """A metric requiring foreground pixels received an empty mask."""


class NoGuidanceSignalError(SlicRefineError):
    """Every superpixel is disjoint from the guidance mask.

    This is the pipeline's declared failure mode (guidance carries no usable
    signal); it is raised rather than returning a silently empty mask.
    """
