"""Core raster types, PNG I/O, component labeling and the exact EDT.

All raster values wrap a numpy array indexed ``[y, x]`` (row-major,
origin top-left; x = column, y = row). Instances are treated as
immutable: every operation returns a new value and never mutates its
inputs, so everything here is safe to call from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from PIL import Image, UnidentifiedImageError
from scipy import ndimage as ndi

from .errors import DecodeError

__all__ = [
    "RgbImage",
    "GrayImage",
    "BinaryImage",
    "LabelImage",
    "DistanceField",
    "load_png",
    "save_png",
    "connected_components",
    "distance_transform",
]


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB raster, pixels shaped (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("RgbImage expects an (h, w, 3) array")
        if self.pixels.dtype != np.uint8:
            raise ValueError("RgbImage pixels must be uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit intensity raster, pixels shaped (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise ValueError("GrayImage expects an (h, w) array")
        if self.pixels.dtype != np.uint8:
            raise ValueError("GrayImage pixels must be uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Boolean raster; True = foreground."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise ValueError("BinaryImage expects an (h, w) array")
        if self.pixels.dtype != np.bool_:
            raise ValueError("BinaryImage pixels must be bool")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class LabelImage:
    """Connected-component labels; 0 = background, labels 1..component_count."""

    labels: np.ndarray
    component_count: int

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError("LabelImage expects an (h, w) array")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Squared Euclidean distance to the nearest background pixel.

    Zero exactly on background. When the source image has no background
    at all, every entry holds the ``width**2 + height**2`` sentinel and
    callers must treat the field as unbounded.
    """

    sq_dist: np.ndarray

    def __post_init__(self):
        if self.sq_dist.ndim != 2:
            raise ValueError("DistanceField expects an (h, w) array")

    @property
    def width(self) -> int:
        return self.sq_dist.shape[1]

    @property
    def height(self) -> int:
        return self.sq_dist.shape[0]


def load_png(path) -> RgbImage:
    """Load a PNG as RGB.

    Grayscale and palette images are expanded to RGB; any alpha channel
    is composited over white first.
    """
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise DecodeError(f"not a PNG file: {path}")
            img.load()
            if "A" in img.getbands() or (
                img.mode == "P" and "transparency" in img.info
            ):
                rgba = img.convert("RGBA")
                base = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                img = Image.alpha_composite(base, rgba)
            rgb = img.convert("RGB")
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, SyntaxError, OSError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    return RgbImage(np.asarray(rgb, dtype=np.uint8))


def save_png(image: RgbImage | GrayImage | BinaryImage, path) -> None:
    """Write a raster as PNG. Binary images encode foreground as 255."""
    if isinstance(image, RgbImage):
        pil = Image.fromarray(image.pixels, mode="RGB")
    elif isinstance(image, GrayImage):
        pil = Image.fromarray(image.pixels, mode="L")
    elif isinstance(image, BinaryImage):
        pil = Image.fromarray(image.pixels.astype(np.uint8) * 255, mode="L")
    else:
        raise TypeError(f"cannot save {type(image).__name__} as PNG")
    pil.save(path, format="PNG")


_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def connected_components(image: BinaryImage, connectivity: int = 8) -> LabelImage:
    """Label foreground components under 4- or 8-adjacency.

    Labels are renumbered into first-encounter raster-scan order so the
    result is deterministic regardless of how the underlying labeling
    pass orders its output.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    structure = _STRUCT_4 if connectivity == 4 else _STRUCT_8
    raw, count = ndi.label(image.pixels, structure=structure)
    if count == 0:
        return LabelImage(np.zeros_like(raw, dtype=np.int32), 0)
    flat = raw.ravel()
    ids, first = np.unique(flat, return_index=True)
    nonzero = ids != 0
    ids, first = ids[nonzero], first[nonzero]
    order = np.argsort(first, kind="stable")
    lut = np.zeros(count + 1, dtype=np.int32)
    lut[ids[order]] = np.arange(1, len(ids) + 1, dtype=np.int32)
    return LabelImage(lut[raw], int(count))


@njit(cache=True)
def _edt_pass_rows(f: np.ndarray) -> np.ndarray:
    """1D lower-envelope pass applied to every row of ``f`` (squared values)."""
    h, w = f.shape
    out = np.empty((h, w), dtype=np.int64)
    v = np.empty(w, dtype=np.int64)
    z = np.empty(w + 1, dtype=np.float64)
    for y in range(h):
        k = 0
        v[0] = 0
        z[0] = -1e30
        z[1] = 1e30
        for q in range(1, w):
            s = ((f[y, q] + q * q) - (f[y, v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k])
            while s <= z[k]:
                k -= 1
                s = ((f[y, q] + q * q) - (f[y, v[k]] + v[k] * v[k])) / (
                    2 * q - 2 * v[k]
                )
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = 1e30
        k = 0
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            d = q - v[k]
            out[y, q] = d * d + f[y, v[k]]
    return out


def distance_transform(image: BinaryImage) -> DistanceField:
    """Exact squared Euclidean distance to the nearest background pixel.

    Two-pass separable transform: a column sweep finds the vertical
    distance to background, then a per-row lower-envelope pass minimizes
    over columns. All arithmetic stays in integers, so the result equals
    the brute-force definition exactly.
    """
    fg = image.pixels
    h, w = fg.shape
    if fg.all():
        sentinel = np.int64(w) * w + np.int64(h) * h
        return DistanceField(np.full((h, w), sentinel, dtype=np.int64))

    # Vertical pass: rows-to-nearest-background within each column.
    # h + w is safely larger than any in-column distance.
    inf = h + w
    g = np.empty((h, w), dtype=np.int64)
    g[0] = np.where(fg[0], inf, 0)
    for y in range(1, h):
        g[y] = np.where(fg[y], np.minimum(g[y - 1] + 1, inf), 0)
    for y in range(h - 2, -1, -1):
        np.minimum(g[y], g[y + 1] + 1, out=g[y])

    return DistanceField(_edt_pass_rows(g * g))
