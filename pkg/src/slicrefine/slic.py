"""SLIC superpixel clustering over CIELAB images.

The full loop: grid initialization, gradient-based center perturbation,
window-restricted assignment with the combined distance
``D = d_lab + (m/S) * d_xy``, center update with an L1 residual, and
connectivity enforcement that absorbs stray fragments.

Determinism contract: every stage resolves ties to the lowest center id or
the raster-scan-first candidate, cluster sums use ``np.add.reduce`` over
members in raster order, and the residual accumulates over centers in
ascending id order. Two runs on identical inputs produce bit-identical
labelings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class SlicConfig:
    """Clustering parameters.

    ``residual_tol`` defaults to ``1e-3 * n_segments`` when left as None (the
    convergence threshold is a free parameter; the iteration cap guarantees
    termination either way). ``sigma`` is carried here for callers that smooth
    before clustering; :func:`slic` itself does not blur.
    """

    n_segments: int
    compactness: float = 10.0
    sigma: float = 1.75
    max_iter: int = 10
    residual_tol: float | None = None
    min_region_factor: float = 0.25

    def validate(self, n_pixels: int | None = None) -> None:
        if self.n_segments < 1:
            raise ValueError(f"n_segments must be >= 1, got {self.n_segments}")
        if self.compactness <= 0:
            raise ValueError(f"compactness must be > 0, got {self.compactness}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.residual_tol is not None and self.residual_tol < 0:
            raise ValueError(f"residual_tol must be >= 0, got {self.residual_tol}")
        if not 0 < self.min_region_factor <= 1:
            raise ValueError(f"min_region_factor must be in (0, 1], got {self.min_region_factor}")
        if n_pixels is not None and self.n_segments > n_pixels:
            raise ValueError(f"n_segments={self.n_segments} exceeds pixel count {n_pixels}")


@dataclass
class SuperpixelLabeling:
    """Result of a full SLIC run.

    ``labels`` holds dense ids 0..n-1 (renumbered in raster-scan order of
    first occurrence); ``centers`` is the final (l, a, b, x, y) table aligned
    with those ids; after connectivity enforcement each label's pixel set is
    4-connected.
    """

    width: int
    height: int
    labels: np.ndarray
    centers: np.ndarray
    iterations_run: int
    final_residual: float

    @property
    def n_labels(self) -> int:
        return int(self.centers.shape[0])

    def label_areas(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.n_labels)


def gaussian_smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur per channel, replicate border.

    Kernel radius is ceil(3*sigma) and each 1-D kernel is normalized over its
    truncated support. sigma=0 returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    arr = np.asarray(img, dtype=np.float64)
    radius = math.ceil(3.0 * sigma)
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(k * k) / (2.0 * sigma * sigma))
    kernel /= np.add.reduce(kernel)
    out = _convolve_axis(arr, kernel, axis=0)
    out = _convolve_axis(out, kernel, axis=1)
    return out


def _convolve_axis(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = (len(kernel) - 1) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr)
    n = arr.shape[axis]
    index = [slice(None)] * arr.ndim
    for i, w in enumerate(kernel):
        index[axis] = slice(i, i + n)
        out += w * padded[tuple(index)]
    return out


def grid_interval(n_pixels: int, n_segments: int) -> float:
    """Initial superpixel spacing S = sqrt(N / K)."""
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    if n_pixels < n_segments:
        raise ValueError(f"n_segments={n_segments} exceeds pixel count {n_pixels}")
    return math.sqrt(n_pixels / n_segments)


def _halfup(t: float) -> int:
    return int(math.floor(t + 0.5))


def _grid_shape(width: int, height: int, n_segments: int) -> tuple[int, int]:
    """Choose grid columns x rows for K requested segments.

    Prefers per-axis counts proportional to the image aspect; if their
    product falls outside [0.75K, 1.3K] (coarse grids for small K), falls
    back to an exact search minimizing |nx*ny - K|, then grid squareness,
    then row count.
    """
    n_pixels = width * height
    scale = math.sqrt(n_segments / n_pixels)
    nx = min(width, max(1, _halfup(width * scale)))
    ny = min(height, max(1, _halfup(height * scale)))
    lo = math.ceil(0.75 * n_segments)
    hi = math.floor(1.3 * n_segments)
    if lo <= nx * ny <= hi:
        return nx, ny
    best = None
    for cand_ny in range(1, min(height, n_segments) + 1):
        cand_nx = min(width, max(1, _halfup(n_segments / cand_ny)))
        diff = abs(cand_nx * cand_ny - n_segments)
        squareness = abs(width / cand_nx - height / cand_ny)
        key = (diff, squareness, cand_ny)
        if best is None or key < best[0]:
            best = (key, cand_nx, cand_ny)
    return best[1], best[2]


def init_centers(img: np.ndarray, n_segments: int) -> np.ndarray:
    """Seed cluster centers on a regular grid, one per cell.

    Returns a (n, 5) float64 array of (l, a, b, x, y) rows. Centers snap to
    the pixel under each cell midpoint and sample their color there; the
    resulting count lies within [0.75K, 1.3K] of the request.
    """
    h, w = img.shape[:2]
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    if n_segments > w * h:
        raise ValueError(f"n_segments={n_segments} exceeds pixel count {w * h}")
    nx, ny = _grid_shape(w, h, n_segments)
    step_x = w / nx
    step_y = h / ny
    centers = np.empty((nx * ny, 5), dtype=np.float64)
    idx = 0
    for j in range(ny):
        y = min(h - 1, int(math.floor((j + 0.5) * step_y)))
        for i in range(nx):
            x = min(w - 1, int(math.floor((i + 0.5) * step_x)))
            centers[idx, 0] = img[y, x, 0]
            centers[idx, 1] = img[y, x, 1]
            centers[idx, 2] = img[y, x, 2]
            centers[idx, 3] = float(x)
            centers[idx, 4] = float(y)
            idx += 1
    return centers


def gradient_magnitude(img: np.ndarray, x: int, y: int) -> float:
    """Squared-difference gradient strength at an interior pixel.

    G = ||I(x+1,y) - I(x-1,y)||^2 + ||I(x,y+1) - I(x,y-1)||^2 with norms over
    the three CIELAB channels. Only defined for 1 <= x <= w-2, 1 <= y <= h-2.
    """
    h, w = img.shape[:2]
    if not (1 <= x <= w - 2 and 1 <= y <= h - 2):
        raise ValueError(f"border pixel ({x}, {y}); gradient needs interior of {w}x{h}")
    dhl = img[y, x + 1, 0] - img[y, x - 1, 0]
    dha = img[y, x + 1, 1] - img[y, x - 1, 1]
    dhb = img[y, x + 1, 2] - img[y, x - 1, 2]
    dvl = img[y + 1, x, 0] - img[y - 1, x, 0]
    dva = img[y + 1, x, 1] - img[y - 1, x, 1]
    dvb = img[y + 1, x, 2] - img[y - 1, x, 2]
    return float((dhl * dhl + dha * dha + dhb * dhb) + (dvl * dvl + dva * dva + dvb * dvb))


def perturb_centers(img: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Move each center to the lowest-gradient pixel in its 3x3 neighborhood.

    A center moves only on a strict gradient improvement; candidates are
    scanned in raster order, so equal minima resolve to the raster-first
    candidate and a center on an all-equal patch stays put. Candidate
    neighborhoods clip to the image interior (the gradient is undefined on
    borders); a center sitting on the border itself has no gradient to
    improve on and stays where it is.
    """
    h, w = img.shape[:2]
    out = centers.copy()
    for k in range(len(centers)):
        cx = int(centers[k, 3])
        cy = int(centers[k, 4])
        if not (1 <= cx <= w - 2 and 1 <= cy <= h - 2):
            continue
        best_g = gradient_magnitude(img, cx, cy)
        best_xy = (cx, cy)
        for yy in range(max(1, cy - 1), min(h - 2, cy + 1) + 1):
            for xx in range(max(1, cx - 1), min(w - 2, cx + 1) + 1):
                if (xx, yy) == (cx, cy):
                    continue
                g = gradient_magnitude(img, xx, yy)
                if g < best_g:
                    best_g = g
                    best_xy = (xx, yy)
        if best_xy != (cx, cy):
            nx, ny = best_xy
            out[k, 0] = img[ny, nx, 0]
            out[k, 1] = img[ny, nx, 1]
            out[k, 2] = img[ny, nx, 2]
            out[k, 3] = float(nx)
            out[k, 4] = float(ny)
    return out


def assign_pixels(img: np.ndarray, centers: np.ndarray, compactness: float, interval: float) -> np.ndarray:
    """Assign every pixel to its nearest center by D = d_lab + (m/S) d_xy.

    Each center only competes inside its 2S x 2S window (|dx| <= S and
    |dy| <= S); pixels covered by no window fall back to the globally nearest
    center. Ties resolve to the lowest center id.
    """
    if len(centers) == 0:
        raise ValueError("no cluster centers to assign to")
    if interval <= 0 or compactness <= 0:
        raise ValueError("compactness and interval must be > 0")
    h, w = img.shape[:2]
    lum = img[:, :, 0]
    ca = img[:, :, 1]
    cb = img[:, :, 2]
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    w_spatial = compactness / interval

    best = np.full((h, w), np.inf, dtype=np.float64)
    labels = np.full((h, w), -1, dtype=np.int32)

    for k in range(len(centers)):
        lk, ak, bk, xk, yk = centers[k]
        x0 = max(0, math.ceil(xk - interval))
        x1 = min(w - 1, math.floor(xk + interval))
        y0 = max(0, math.ceil(yk - interval))
        y1 = min(h - 1, math.floor(yk + interval))
        if x0 > x1 or y0 > y1:
            continue
        dl = lum[y0 : y1 + 1, x0 : x1 + 1] - lk
        da = ca[y0 : y1 + 1, x0 : x1 + 1] - ak
        db = cb[y0 : y1 + 1, x0 : x1 + 1] - bk
        d_lab = np.sqrt(dl * dl + da * da + db * db)
        dx = xs[x0 : x1 + 1] - xk
        dy = ys[y0 : y1 + 1] - yk
        d_xy = np.sqrt((dx * dx)[None, :] + (dy * dy)[:, None])
        dist = d_lab + w_spatial * d_xy
        win_best = best[y0 : y1 + 1, x0 : x1 + 1]
        win_labels = labels[y0 : y1 + 1, x0 : x1 + 1]
        improved = dist < win_best
        win_best[improved] = dist[improved]
        win_labels[improved] = k

    orphan = labels < 0
    if orphan.any():
        oy, ox = np.nonzero(orphan)
        o_l = lum[oy, ox]
        o_a = ca[oy, ox]
        o_b = cb[oy, ox]
        o_x = ox.astype(np.float64)
        o_y = oy.astype(np.float64)
        o_best = np.full(len(ox), np.inf, dtype=np.float64)
        o_label = np.full(len(ox), -1, dtype=np.int32)
        for k in range(len(centers)):
            lk, ak, bk, xk, yk = centers[k]
            dl = o_l - lk
            da = o_a - ak
            db = o_b - bk
            dx = o_x - xk
            dy = o_y - yk
            dist = np.sqrt(dl * dl + da * da + db * db) + w_spatial * np.sqrt(dx * dx + dy * dy)
            improved = dist < o_best
            o_best[improved] = dist[improved]
            o_label[improved] = k
        labels[oy, ox] = o_label
    return labels


def update_centers(img: np.ndarray, labels: np.ndarray, old_centers: np.ndarray) -> tuple[np.ndarray, float]:
    """Recompute centers as componentwise means of their member pixels.

    Empty clusters keep their previous center and contribute nothing to the
    residual. Returns (new_centers, E) with E the summed L1 center drift.
    """
    h, w = img.shape[:2]
    n = len(old_centers)
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    sorted_labels = flat[order]
    starts = np.searchsorted(sorted_labels, np.arange(n), side="left")
    ends = np.searchsorted(sorted_labels, np.arange(n), side="right")

    comp_flat = (
        img[:, :, 0].ravel()[order],
        img[:, :, 1].ravel()[order],
        img[:, :, 2].ravel()[order],
        (np.arange(h * w, dtype=np.int64) % w).astype(np.float64)[order],
        (np.arange(h * w, dtype=np.int64) // w).astype(np.float64)[order],
    )

    new_centers = old_centers.copy()
    residual = 0.0
    for k in range(n):
        s, e = int(starts[k]), int(ends[k])
        if e > s:
            cnt = float(e - s)
            for c in range(5):
                new_centers[k, c] = np.add.reduce(comp_flat[c][s:e]) / cnt
            d = (
                abs(new_centers[k, 0] - old_centers[k, 0])
                + abs(new_centers[k, 1] - old_centers[k, 1])
                + abs(new_centers[k, 2] - old_centers[k, 2])
                + abs(new_centers[k, 3] - old_centers[k, 3])
                + abs(new_centers[k, 4] - old_centers[k, 4])
            )
            residual = residual + d
    return new_centers, float(residual)


def enforce_connectivity(labels: np.ndarray, interval: float, min_region_factor: float) -> np.ndarray:
    """Absorb stray label fragments so every label is one 4-connected region.

    The labeling is decomposed into maximal same-label 4-connected regions.
    Retained regions are those that are their label's largest region (ties:
    raster-first) with area >= min_region_factor * S^2; every other region
    merges into the retained region with which it shares the longest
    aggregated boundary (ties: lowest label). Fragments with no retained
    neighbor defer until one emerges through earlier merges.
    """
    region_map, areas, region_label, firsts = _decompose_regions(labels)
    n_regions = len(areas)
    if n_regions == 1:
        return labels.copy()
    threshold = min_region_factor * interval * interval

    # largest region per label (ties: raster-first, i.e. lowest region id)
    main_of_label: dict[int, int] = {}
    for r in range(n_regions):
        lab = region_label[r]
        cur = main_of_label.get(lab)
        if cur is None or areas[r] > areas[cur]:
            main_of_label[lab] = r
    keep = np.zeros(n_regions, dtype=bool)
    for lab, r in main_of_label.items():
        if areas[r] >= threshold:
            keep[r] = True
    if not keep.any():
        order = np.argsort(-areas, kind="stable")
        keep[order[0]] = True

    edges = _region_adjacency(region_map, n_regions)

    resolved = np.full(n_regions, -1, dtype=np.int64)
    resolved[keep] = np.nonzero(keep)[0]
    pending = [r for r in range(n_regions) if not keep[r]]
    while pending:
        still = []
        progressed = False
        for r in pending:
            tally: dict[int, int] = {}
            for nb, cnt in edges.get(r, ()):
                target = resolved[nb]
                if target >= 0:
                    tally[int(target)] = tally.get(int(target), 0) + cnt
            if not tally:
                still.append(r)
                continue
            best = None
            for target, cnt in tally.items():
                key = (-cnt, region_label[target], target)
                if best is None or key < best[0]:
                    best = (key, target)
            resolved[r] = best[1]
            progressed = True
        if not progressed:
            raise RuntimeError("connectivity enforcement failed to converge")
        pending = still

    out_label_of_region = region_label[resolved]
    return out_label_of_region[region_map]


def _decompose_regions(labels: np.ndarray):
    """Split a labeling into maximal same-label 4-connected regions.

    Returns (region_map, areas, region_label, firsts) with region ids in
    raster order of each region's first pixel.
    """
    h, w = labels.shape
    region_map = np.full((h, w), -1, dtype=np.int64)
    tmp_areas = []
    tmp_labels = []
    tmp_firsts = []
    offset = 0
    objs = ndimage.find_objects(labels + 1)
    for k, sl in enumerate(objs):
        if sl is None:
            continue
        sub = labels[sl] == k
        comp, cnt = ndimage.label(sub, structure=_STRUCT_4)
        if cnt == 0:
            continue
        ys, xs = sl
        flat_idx = (
            np.arange(ys.start, ys.stop, dtype=np.int64)[:, None] * w
            + np.arange(xs.start, xs.stop, dtype=np.int64)[None, :]
        )
        idx = np.arange(1, cnt + 1)
        firsts = ndimage.minimum(flat_idx, labels=comp, index=idx)
        areas = np.bincount(comp.ravel(), minlength=cnt + 1)[1:]
        view = region_map[sl]
        view[sub] = (comp[sub] - 1) + offset
        tmp_areas.extend(int(a) for a in areas)
        tmp_labels.extend([k] * cnt)
        tmp_firsts.extend(int(f) for f in np.atleast_1d(firsts))
        offset += cnt
    firsts_arr = np.asarray(tmp_firsts, dtype=np.int64)
    order = np.argsort(firsts_arr, kind="stable")
    remap = np.empty(offset, dtype=np.int64)
    remap[order] = np.arange(offset, dtype=np.int64)
    region_map = remap[region_map]
    areas_arr = np.asarray(tmp_areas, dtype=np.int64)[order]
    labels_arr = np.asarray(tmp_labels, dtype=np.int64)[order]
    return region_map, areas_arr, labels_arr, firsts_arr[order]


def _region_adjacency(region_map: np.ndarray, n_regions: int) -> dict[int, list[tuple[int, int]]]:
    """Boundary-edge counts between 4-adjacent distinct regions."""
    pairs = []
    a, b = region_map[:, :-1], region_map[:, 1:]
    diff = a != b
    pairs.append(np.stack([a[diff], b[diff]], axis=1))
    a, b = region_map[:-1, :], region_map[1:, :]
    diff = a != b
    pairs.append(np.stack([a[diff], b[diff]], axis=1))
    all_pairs = np.concatenate(pairs, axis=0)
    if len(all_pairs) == 0:
        return {}
    lo = np.minimum(all_pairs[:, 0], all_pairs[:, 1])
    hi = np.maximum(all_pairs[:, 0], all_pairs[:, 1])
    key = lo * n_regions + hi
    uniq, counts = np.unique(key, return_counts=True)
    edges: dict[int, list[tuple[int, int]]] = {}
    for k, c in zip(uniq.tolist(), counts.tolist()):
        r1, r2 = divmod(k, n_regions)
        edges.setdefault(r1, []).append((r2, c))
        edges.setdefault(r2, []).append((r1, c))
    return edges


def slic(img: np.ndarray, cfg: SlicConfig) -> SuperpixelLabeling:
    """Run the full clustering loop on a CIELAB image.

    init -> perturb -> repeat [assign -> update] until the L1 residual drops
    below the tolerance or max_iter is reached -> enforce connectivity ->
    renumber labels densely in raster-scan-first order. Smoothing is the
    caller's responsibility (see gaussian_smooth).
    """
    arr = np.asarray(img, dtype=np.float64)
    h, w = arr.shape[:2]
    cfg.validate(n_pixels=w * h)
    interval = grid_interval(w * h, cfg.n_segments)
    tol = cfg.residual_tol if cfg.residual_tol is not None else 1e-3 * cfg.n_segments

    centers = init_centers(arr, cfg.n_segments)
    centers = perturb_centers(arr, centers)

    labels = None
    residual = math.inf
    iterations = 0
    for _ in range(cfg.max_iter):
        labels = assign_pixels(arr, centers, cfg.compactness, interval)
        centers, residual = update_centers(arr, labels, centers)
        iterations += 1
        if residual < tol:
            break

    connected = enforce_connectivity(labels, interval, cfg.min_region_factor)
    dense, center_table = _densify(connected, centers)
    return SuperpixelLabeling(
        width=w,
        height=h,
        labels=dense,
        centers=center_table,
        iterations_run=iterations,
        final_residual=residual,
    )


def _densify(labels: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Renumber surviving labels 0..n-1 by raster order of first occurrence."""
    flat = labels.ravel()
    uniq, first_idx = np.unique(flat, return_index=True)
    order = np.argsort(first_idx, kind="stable")
    survivors = uniq[order]
    remap = np.full(int(flat.max()) + 1, -1, dtype=np.int32)
    remap[survivors] = np.arange(len(survivors), dtype=np.int32)
    dense = remap[labels]
    return dense, centers[survivors]


def boundary_overlay(rgb: np.ndarray, labels: np.ndarray, color=(255, 255, 0)) -> np.ndarray:
    """Draw 1-pixel superpixel boundaries over an RGB image in a fixed color."""
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.shape[:2] != labels.shape:
        raise ValueError(f"image {arr.shape[:2]} and labels {labels.shape} differ in size")
    boundary = np.zeros(labels.shape, dtype=bool)
    boundary[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    boundary[1:, :] |= labels[1:, :] != labels[:-1, :]
    out = arr.copy()
    out[boundary] = np.asarray(color, dtype=np.uint8)
    return out
