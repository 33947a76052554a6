"""Foreground/background separation.

Four interchangeable segmenters share one output contract: a strictly
binary mask with the input's dimensions. Thresholding comparisons are
strict in both directions, so pixels equal to the threshold always land
in the background.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .errors import DegenerateImageError, EmptyMarkersError, InvalidParameterError
from .raster import BinaryImage, GrayImage

__all__ = [
    "SegmentationResult",
    "constant_threshold",
    "otsu_threshold",
    "adaptive_mean_threshold",
    "guided_watershed",
]


@dataclass(frozen=True, eq=False)
class SegmentationResult:
    mask: BinaryImage
    method: str
    chosen_threshold: int | None = None


def _check_mode(foreground: str) -> None:
    if foreground not in ("above", "below"):
        raise InvalidParameterError(
            f"foreground must be 'above' or 'below', got {foreground!r}"
        )


def constant_threshold(image: GrayImage, t: int, foreground: str) -> SegmentationResult:
    """Fixed threshold; 'above' keeps pixels > t, 'below' keeps pixels < t."""
    _check_mode(foreground)
    if not 0 <= t <= 255:
        raise InvalidParameterError(f"threshold must be in 0..255, got {t}")
    if foreground == "above":
        mask = image.pixels > t
    else:
        mask = image.pixels < t
    return SegmentationResult(BinaryImage(mask), "constant_threshold", int(t))


def otsu_threshold(image: GrayImage, foreground: str) -> SegmentationResult:
    """Otsu's method: threshold maximizing the between-class variance.

    The scan over t in 0..254 splits the histogram into {<= t} and {> t}.
    Comparisons use exact integer arithmetic (cross-multiplied variance
    ratios), so the smallest-t tie-break is platform independent.
    """
    _check_mode(foreground)
    hist = np.bincount(image.pixels.ravel(), minlength=256)
    if np.count_nonzero(hist) < 2:
        raise DegenerateImageError("all pixels equal; Otsu needs >= 2 gray values")

    total = int(hist.sum())
    total_weighted = int((hist * np.arange(256, dtype=np.int64)).sum())
    best_t = 0
    # between-class variance = (s0*w1 - s1*w0)^2 / (w0*w1); compare as
    # exact fractions num/den via cross-multiplication.
    best_num, best_den = -1, 1
    w0 = s0 = 0
    for t in range(255):
        w0 += int(hist[t])
        s0 += t * int(hist[t])
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        s1 = total_weighted - s0
        num = (s0 * w1 - s1 * w0) ** 2
        den = w0 * w1
        if num * best_den > best_num * den:
            best_num, best_den, best_t = num, den, t

    result = constant_threshold(image, best_t, foreground)
    return SegmentationResult(result.mask, "otsu_threshold", best_t)


def adaptive_mean_threshold(
    image: GrayImage, block_size: int, c: float, foreground: str
) -> SegmentationResult:
    """Per-pixel threshold = local block mean (reflect border) minus c.

    Window sums come from an integral image, so the cost is O(w*h)
    regardless of block_size. The strict comparison is evaluated as
    pixel * block_size^2 vs windowsum - c * block_size^2 to keep the
    integer part of the arithmetic exact.
    """
    _check_mode(foreground)
    if block_size < 3 or block_size % 2 == 0:
        raise InvalidParameterError(
            f"block_size must be an odd integer >= 3, got {block_size}"
        )
    r = block_size // 2
    padded = np.pad(image.pixels.astype(np.int64), r, mode="reflect")
    integral = np.zeros(
        (padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64
    )
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=integral[1:, 1:])
    b = block_size
    h, w = image.pixels.shape
    sums = (
        integral[b : b + h, b : b + w]
        - integral[0:h, b : b + w]
        - integral[b : b + h, 0:w]
        + integral[0:h, 0:w]
    )
    lhs = image.pixels.astype(np.int64) * (b * b)
    rhs = sums - c * (b * b)
    mask = lhs > rhs if foreground == "above" else lhs < rhs
    return SegmentationResult(BinaryImage(mask), "adaptive_mean_threshold")


_FLOOD_NEIGHBORS = ((-1, 0), (0, -1), (0, 1), (1, 0))
_STRUCT_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def guided_watershed(
    image: GrayImage, fg_erosions: int, bg_dilations: int, foreground: str
) -> SegmentationResult:
    """Marker-based watershed with automatically derived markers.

    An Otsu mask oriented by the foreground mode is eroded into
    sure-foreground seeds and dilated-then-complemented into
    sure-background seeds; the remaining band is flooded on raw
    intensity (ascending for dark foreground, descending for light),
    FIFO within equal intensity. A pixel belongs to the output mask iff
    its flood reached a foreground seed.
    """
    if foreground not in ("dark", "light"):
        raise InvalidParameterError(
            f"foreground must be 'dark' or 'light', got {foreground!r}"
        )
    if fg_erosions < 1 or bg_dilations < 1:
        raise InvalidParameterError("fg_erosions and bg_dilations must be >= 1")

    otsu = otsu_threshold(image, "below" if foreground == "dark" else "above")
    block = np.ones((3, 3), dtype=bool)
    sure_fg = ndi.binary_erosion(otsu.mask.pixels, structure=block, iterations=fg_erosions)
    if not sure_fg.any():
        raise EmptyMarkersError(
            f"{fg_erosions} erosion(s) erased all foreground seeds"
        )
    sure_bg = ~ndi.binary_dilation(
        otsu.mask.pixels, structure=block, iterations=bg_dilations
    )

    gray = image.pixels
    h, w = gray.shape
    FG, BG = 1, 2
    labels = np.zeros((h, w), dtype=np.int8)
    labels[sure_fg] = FG
    labels[sure_bg] = BG

    key = gray if foreground == "dark" else 255 - gray

    # Hierarchical FIFO queue: one deque per intensity level implements
    # "lowest priority first, FIFO within equal priority".
    buckets = [deque() for _ in range(256)]
    lowest = 256

    seeded = labels != 0
    frontier = ~seeded & ndi.binary_dilation(seeded, structure=_STRUCT_CROSS)
    for y, x in np.argwhere(frontier):
        for dy, dx in _FLOOD_NEIGHBORS:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and labels[ny, nx] != 0:
                level = int(key[y, x])
                buckets[level].append((int(y), int(x), int(labels[ny, nx])))
                if level < lowest:
                    lowest = level
                break

    while lowest < 256:
        bucket = buckets[lowest]
        if not bucket:
            lowest += 1
            continue
        y, x, label = bucket.popleft()
        if labels[y, x] != 0:
            continue
        labels[y, x] = label
        for dy, dx in _FLOOD_NEIGHBORS:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and labels[ny, nx] == 0:
                level = int(key[ny, nx])
                buckets[level].append((ny, nx, label))
                if level < lowest:
                    lowest = level

    return SegmentationResult(BinaryImage(labels == FG), "guided_watershed")
