"""Binary mask morphology: hole infilling, largest component, dilation, contours.

Conventions (fixed for the whole pipeline): foreground components are
8-connected, holes are background regions not 4-connected to the raster
border, dilation uses the Chebyshev metric (square structuring element).
All functions take and return 2-D boolean arrays and are pure.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError

_STRUCT_4 = ndimage.generate_binary_structure(2, 1)
_STRUCT_8 = ndimage.generate_binary_structure(2, 2)


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Turn on every off-pixel not 4-connected to the border background."""
    mask = np.asarray(mask, dtype=bool)
    # scipy's fill uses the structuring element for the background flood,
    # so the 4-connected structure matches the hole definition here.
    return ndimage.binary_fill_holes(mask, structure=_STRUCT_4)


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep only the largest 8-connected component.

    Ties are broken by the smallest (y, x) of each component's first pixel
    in row-major order, so the result is deterministic.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=_STRUCT_8)
    if n <= 1:
        return mask.copy()
    sizes = np.bincount(labels.reshape(-1))[1:]
    best = int(np.argmax(sizes)) + 1
    # np.argmax returns the first maximal index; scipy labels components in
    # row-major discovery order, so this is exactly the (y, x) tie-break.
    return labels == best


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Chebyshev dilation: on iff a source on-pixel lies within distance radius."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    if radius == 0:
        return mask.copy()
    size = 2 * radius + 1
    return ndimage.maximum_filter(mask, size=size, mode="constant", cval=False)


def contour(mask: np.ndarray) -> np.ndarray:
    """Boundary pixels: on-pixels with >= 1 off or out-of-bounds 4-neighbor.

    Returned as a boolean array of the same shape (a subset of the mask).
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMaskError("contour of an empty mask")
    eroded = ndimage.binary_erosion(mask, structure=_STRUCT_4, border_value=0)
    return mask & ~eroded


def contour_pixels(mask: np.ndarray) -> list[tuple[int, int]]:
    """Contour as a sorted list of (x, y) coordinates."""
    ys, xs = np.nonzero(contour(mask))
    return sorted(zip(xs.tolist(), ys.tolist()))


def postprocess(mask: np.ndarray, order: str = "fill-first") -> np.ndarray:
    """Standard instance post-processing: hole infilling + largest component.

    ``order`` is "fill-first" (default) or "component-first".
    """
    if order == "fill-first":
        return largest_component(fill_holes(mask))
    if order == "component-first":
        return fill_holes(largest_component(mask))
    raise ValueError(f"unknown post-processing order {order!r}")
