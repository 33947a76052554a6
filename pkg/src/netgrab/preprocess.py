"""Optional image-conditioning stages executed before segmentation."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidParameterError
from .raster import GrayImage, RgbImage

__all__ = ["to_grayscale", "gaussian_blur", "median_blur", "invert"]


def _round_half_away(values: np.ndarray) -> np.ndarray:
    # All image intensities are non-negative, so floor(x + 0.5) implements
    # round-half-away-from-zero.
    return np.floor(values + 0.5)


def _check_kernel_size(kernel_size: int) -> None:
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise InvalidParameterError(
            f"kernel_size must be an odd integer >= 3, got {kernel_size}"
        )


def to_grayscale(image: RgbImage) -> GrayImage:
    """Rec. 601 luma: round(0.299 R + 0.587 G + 0.114 B)."""
    rgb = image.pixels.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    out = np.clip(_round_half_away(luma), 0, 255)
    return GrayImage(out.astype(np.uint8))


def gaussian_blur(image: GrayImage, kernel_size: int) -> GrayImage:
    """Separable Gaussian blur with sigma derived from the kernel size.

    sigma = 0.3 * ((kernel_size - 1) / 2 - 1) + 0.8, border handling is
    mirror-about-edge-pixel (the edge sample itself is not repeated).
    """
    _check_kernel_size(kernel_size)
    sigma = 0.3 * ((kernel_size - 1) / 2 - 1) + 0.8
    r = kernel_size // 2
    xs = np.arange(-r, r + 1, dtype=np.float64)
    kernel = np.exp(-(xs * xs) / (2 * sigma * sigma))
    kernel /= kernel.sum()

    data = image.pixels.astype(np.float64)
    padded = np.pad(data, ((0, 0), (r, r)), mode="reflect")
    data = sliding_window_view(padded, kernel_size, axis=1) @ kernel
    padded = np.pad(data, ((r, r), (0, 0)), mode="reflect")
    data = sliding_window_view(padded, kernel_size, axis=0) @ kernel
    out = np.clip(_round_half_away(data), 0, 255)
    return GrayImage(out.astype(np.uint8))


def median_blur(image: GrayImage, kernel_size: int) -> GrayImage:
    """Median of the kernel_size x kernel_size neighborhood, reflect border."""
    _check_kernel_size(kernel_size)
    r = kernel_size // 2
    padded = np.pad(image.pixels, r, mode="reflect")
    windows = sliding_window_view(padded, (kernel_size, kernel_size))
    out = np.median(windows, axis=(2, 3))
    return GrayImage(out.astype(np.uint8))


def invert(image: GrayImage) -> GrayImage:
    """Map every intensity v to 255 - v."""
    return GrayImage((255 - image.pixels.astype(np.int16)).astype(np.uint8))
