"""Guo-Hall two-subiteration thinning.

Reduces a segmented foreground to a one-pixel-wide skeleton while
preserving 8-connectivity. Deletions within a sub-iteration are decided
against the pre-sub-iteration state and applied simultaneously (this is
what makes the method parallel and keeps the connectivity guarantee).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryImage

__all__ = ["Skeleton", "guo_hall_thin"]


@dataclass(frozen=True, eq=False)
class Skeleton:
    mask: BinaryImage
    iterations_run: int


def _delete_mask(fg: np.ndarray, sub: int) -> np.ndarray:
    """Pixels deletable in sub-iteration 1 or 2 of the current state."""
    p = np.pad(fg, 1, mode="constant", constant_values=False)
    # 8-neighbors enumerated clockwise from north.
    p1 = p[:-2, 1:-1]  # N
    p2 = p[:-2, 2:]    # NE
    p3 = p[1:-1, 2:]   # E
    p4 = p[2:, 2:]     # SE
    p5 = p[2:, 1:-1]   # S
    p6 = p[2:, :-2]    # SW
    p7 = p[1:-1, :-2]  # W
    p8 = p[:-2, :-2]   # NW

    c = (
        (~p1 & (p2 | p3)).astype(np.uint8)
        + (~p3 & (p4 | p5))
        + (~p5 & (p6 | p7))
        + (~p7 & (p8 | p1))
    )
    n1 = (p8 | p1).astype(np.uint8) + (p2 | p3) + (p4 | p5) + (p6 | p7)
    n2 = (p1 | p2).astype(np.uint8) + (p3 | p4) + (p5 | p6) + (p7 | p8)
    n = np.minimum(n1, n2)

    # Directional gates of the two sub-iterations. Anchoring them on the
    # cardinal W/E neighbors is what makes simultaneous deletion safe;
    # diagonal-anchored variants disconnect the skeleton.
    if sub == 1:
        gate = (p5 | p6 | ~p8) & p7
    else:
        gate = (p1 | p2 | ~p4) & p3
    return fg & (c == 1) & (n >= 2) & (n <= 3) & ~gate


def guo_hall_thin(mask: BinaryImage) -> Skeleton:
    """Thin until a full two-subiteration pass deletes nothing.

    ``iterations_run`` counts full passes including the final no-op one,
    so it is always >= 1.
    """
    fg = mask.pixels.copy()
    iterations = 0
    while True:
        iterations += 1
        d1 = _delete_mask(fg, 1)
        fg &= ~d1
        d2 = _delete_mask(fg, 2)
        fg &= ~d2
        if not d1.any() and not d2.any():
            break
    return Skeleton(BinaryImage(fg), iterations)
