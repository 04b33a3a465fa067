"""Raster types, file I/O, normalization, mask resizing and component labeling.

Array conventions used throughout the library:

* RGB image: ``uint8`` array of shape ``(height, width, 3)``, row-major,
  interleaved channels.
* Normalized image: ``float64`` array of shape ``(height, width, 3)`` with
  samples in ``[0, 1)`` (8-bit values divided by 256).
* Binary mask: ``uint8`` array of shape ``(height, width)`` holding exactly
  0 or 1.
* Pixel coordinates are ``(x, y)`` with ``x`` the column; arrays are indexed
  ``[y, x]``.

File conventions: masks are single-channel 8-bit PNG with foreground 255 and
background 0; images are 8-bit RGB PNG or binary PPM (P6); label rasters are
16-bit binary PGM (P5).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DecodeError, DimensionMismatchError, TooSmallError

# Threshold for binarizing 8-bit mask samples (midpoint rule).
MASK_THRESHOLD = 128

# Structuring elements for 4- and 8-connectivity.
_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


@dataclass
class ComponentLabeling:
    """Connected components of a binary mask.

    ``labels`` holds per-pixel component ids with 0 for background; ids are
    assigned in raster-scan order of each component's first pixel.
    ``component_areas`` maps id -> pixel count.
    """

    width: int
    height: int
    labels: np.ndarray
    component_areas: dict[int, int]

    @property
    def n_components(self) -> int:
        return len(self.component_areas)

    def largest_component_area(self) -> int:
        """Area of the largest component, 0 if there are none."""
        if not self.component_areas:
            return 0
        return max(self.component_areas.values())


def _decode(path):
    try:
        with Image.open(path) as im:
            im.load()
            return im.copy()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def load_image(path) -> np.ndarray:
    """Load an 8-bit RGB raster (PNG or PPM).

    Grayscale inputs are replicated to 3 channels. Raises FileNotFoundError,
    DecodeError on corrupt/unsupported encodings, TooSmallError if either
    dimension is below 3 (the SLIC gradient needs a 1-pixel interior).
    """
    im = _decode(path)
    if im.mode == "P":
        im = im.convert("RGB")
    if im.mode == "L":
        arr = np.asarray(im, dtype=np.uint8)
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif im.mode == "RGB":
        arr = np.asarray(im, dtype=np.uint8)
    else:
        raise DecodeError(f"unsupported image mode {im.mode!r} in {path} (want 8-bit L or RGB)")
    h, w = arr.shape[:2]
    if w < 3 or h < 3:
        raise TooSmallError(f"image {path} is {w}x{h}; both dimensions must be >= 3")
    return np.ascontiguousarray(arr)


def save_image(img: np.ndarray, path) -> None:
    """Write an RGB image as PNG or binary PPM, chosen by file suffix."""
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    Image.fromarray(arr, mode="RGB").save(path)


def load_mask(path, channels: str = "strict") -> np.ndarray:
    """Load a binary mask from a single-channel 8-bit raster.

    Samples >= 128 map to 1, the rest to 0. Files whose samples never exceed
    1 are accepted as already-logical masks (some corpora store 0/1 rather
    than 0/255; a strict midpoint threshold would silently zero those).

    ``channels`` controls 3-channel inputs: "strict" raises DecodeError,
    "collapse" reduces to luminance first (ITU-R 601 weights).
    """
    if channels not in ("strict", "collapse"):
        raise ValueError(f"channels must be 'strict' or 'collapse', got {channels!r}")
    im = _decode(path)
    if im.mode == "P":
        im = im.convert("RGB")
    if im.mode == "RGB":
        if channels != "collapse":
            raise DecodeError(
                f"mask {path} has 3 channels; pass channels='collapse' to reduce to luminance"
            )
        rgb = np.asarray(im, dtype=np.float64)
        gray = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
        arr = np.floor(gray + 0.5).astype(np.uint8)
    elif im.mode == "L":
        arr = np.asarray(im, dtype=np.uint8)
    else:
        raise DecodeError(f"unsupported mask mode {im.mode!r} in {path}")
    if arr.max(initial=0) <= 1:
        return np.ascontiguousarray(arr.astype(np.uint8))
    return (arr >= MASK_THRESHOLD).astype(np.uint8)


def save_mask(mask: np.ndarray, path) -> None:
    """Write a binary mask as single-channel 8-bit PNG (foreground 255)."""
    arr = validate_mask(mask)
    Image.fromarray(arr * np.uint8(255), mode="L").save(path)


def validate_mask(mask: np.ndarray) -> np.ndarray:
    """Check the binary-mask invariants and return a uint8 view."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D mask, got shape {arr.shape}")
    if arr.size and arr.max() > 1:
        raise ValueError("mask values must be exactly 0 or 1")
    return arr.astype(np.uint8, copy=False)


def normalize(img: np.ndarray) -> np.ndarray:
    """Rescale 8-bit samples to the unit interval by dividing by 256.

    Output samples lie in [0, 255/256]; the divisor is 256, not 255, so the
    upper bound stays strictly below 1.
    """
    arr = np.asarray(img, dtype=np.float64)
    return arr / 256.0


def resize_mask_nearest(mask: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Nearest-neighbor resize of a binary mask to ``target_w`` x ``target_h``.

    Sampling uses pixel centers: source index = floor((dst + 0.5) * src/dst),
    so an integer upscale replicates each source pixel into a solid block.
    Output values remain strictly {0, 1}.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {target_w}x{target_h}")
    arr = validate_mask(mask)
    h, w = arr.shape
    src_x = np.minimum((np.floor((np.arange(target_w) + 0.5) * (w / target_w))).astype(np.intp), w - 1)
    src_y = np.minimum((np.floor((np.arange(target_h) + 0.5) * (h / target_h))).astype(np.intp), h - 1)
    return np.ascontiguousarray(arr[np.ix_(src_y, src_x)])


def connected_components(mask: np.ndarray, connectivity: int = 4) -> ComponentLabeling:
    """Label connected foreground components of a binary mask.

    Component ids start at 1 and are assigned in raster-scan order of each
    component's first pixel, which keeps every downstream tie-break
    deterministic.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    arr = validate_mask(mask)
    structure = _STRUCT_4 if connectivity == 4 else _STRUCT_8
    raw, n = ndimage.label(arr, structure=structure)
    labels = _relabel_raster_order(raw, n)
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    component_areas = {int(i): int(areas[i]) for i in range(1, n + 1)}
    h, w = arr.shape
    return ComponentLabeling(width=w, height=h, labels=labels, component_areas=component_areas)


def _relabel_raster_order(raw: np.ndarray, n: int) -> np.ndarray:
    """Renumber nonzero labels 1..n by raster order of first occurrence."""
    if n == 0:
        return raw.astype(np.int32)
    flat = raw.ravel()
    first = np.full(n + 1, flat.size, dtype=np.int64)
    # minimum flat index per label
    np.minimum.at(first, flat, np.arange(flat.size, dtype=np.int64))
    order = np.argsort(first[1:], kind="stable")  # old label i+1 -> rank
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
    return remap[raw]


def save_labels_pgm(labels: np.ndarray, path) -> None:
    """Write a label raster as 16-bit binary PGM (P5, maxval 65535, big-endian)."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D label raster, got shape {arr.shape}")
    if arr.min(initial=0) < 0 or arr.max(initial=0) > 65535:
        raise ValueError("label values must fit in uint16")
    h, w = arr.shape
    data = arr.astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data)


def load_labels_pgm(path) -> np.ndarray:
    """Read back a 16-bit binary PGM written by :func:`save_labels_pgm`."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise DecodeError(f"{path}: not a binary PGM")
        dims = fh.readline().split()
        maxval = int(fh.readline())
        w, h = int(dims[0]), int(dims[1])
        if maxval != 65535:
            raise DecodeError(f"{path}: expected 16-bit PGM, maxval={maxval}")
        data = fh.read(w * h * 2)
    if len(data) != w * h * 2:
        raise DecodeError(f"{path}: truncated pixel data")
    return np.frombuffer(data, dtype=">u2").reshape(h, w).astype(np.int32)


def require_same_shape(a: np.ndarray, b: np.ndarray, what: str = "masks") -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"{what} differ in shape: {a.shape} vs {b.shape}")
