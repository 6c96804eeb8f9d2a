"""Classical per-instance focus measures over masked image regions.

Images are grayscale float arrays in [0, 1] (8-bit inputs divided by 255,
color converted with the 0.299/0.587/0.114 luminance weights).  Laplacian
variance and Brenner are evaluated over an arbitrary pixel set (mask or
contour); Reblur needs a rectangular domain and uses the instance bbox crop.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from scipy import ndimage

from .errors import EmptyRegionError, MixedMeasuresError, RegionTooSmallError

LAPLACIAN_KERNEL = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)
REBLUR_KERNEL_LEN = 9


class Measure(enum.Enum):
    LAPLACIAN_MASK = "laplacian-mask"
    LAPLACIAN_CONTOUR = "laplacian-contour"
    BRENNER = "brenner"
    REBLUR = "reblur"

    @property
    def blurrier_is_higher(self) -> bool:
        return self is Measure.REBLUR


@dataclass(frozen=True)
class FocusScore:
    value: float
    measure: Measure
    degenerate: bool = False

    @property
    def blurrier_is_higher(self) -> bool:
        return self.measure.blurrier_is_higher


def load_gray(path: str | Path) -> np.ndarray:
    """Load an image as grayscale float in [0, 1]."""
    img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise FileNotFoundError(f"cannot read image {path}")
    return img.astype(np.float64) / 255.0


def _check_region(region: np.ndarray, img: np.ndarray) -> np.ndarray:
    region = np.asarray(region, dtype=bool)
    if region.shape != img.shape:
        raise ValueError("region shape must match image shape")
    if not region.any():
        raise EmptyRegionError("focus measure over an empty region")
    return region


def laplacian_variance(
    img: np.ndarray, region: np.ndarray, measure: Measure = Measure.LAPLACIAN_MASK
) -> FocusScore:
    """Population variance of the 3x3 Laplacian response over the region.

    The convolution uses zero padding at the image border.
    """
    region = _check_region(region, img)
    if measure not in (Measure.LAPLACIAN_MASK, Measure.LAPLACIAN_CONTOUR):
        raise ValueError("measure must be a Laplacian variant")
    lap = ndimage.convolve(np.asarray(img, dtype=np.float64), LAPLACIAN_KERNEL,
                           mode="constant", cval=0.0)
    values = lap[region]
    return FocusScore(value=float(np.var(values)), measure=measure)


def brenner(img: np.ndarray, region: np.ndarray) -> FocusScore:
    """Sum of squared horizontal differences at lag 2, both pixels in region."""
    region = _check_region(region, img)
    img = np.asarray(img, dtype=np.float64)
    pair = region[:, :-2] & region[:, 2:]
    if not pair.any():
        return FocusScore(value=0.0, measure=Measure.BRENNER, degenerate=True)
    diff = img[:, 2:] - img[:, :-2]
    return FocusScore(value=float(np.sum(diff[pair] ** 2)), measure=Measure.BRENNER)


def _direction_blur(crop: np.ndarray, axis: int) -> float | None:
    """Reblur annoyance for one direction; None when the crop is constant along it."""
    blurred = ndimage.uniform_filter1d(crop, REBLUR_KERNEL_LEN, axis=axis, mode="reflect")
    d_orig = np.abs(np.diff(crop, axis=axis))
    d_blur = np.abs(np.diff(blurred, axis=axis))
    s_orig = float(d_orig.sum())
    if s_orig == 0.0:
        return None
    kept = float(np.maximum(0.0, d_orig - d_blur).sum())
    return min(1.0, max(0.0, (s_orig - kept) / s_orig))


def reblur(img: np.ndarray, bbox: tuple[int, int, int, int]) -> FocusScore:
    """Crete-style reblur estimate on the bbox crop; higher means blurrier.

    bbox is inclusive (x_min, y_min, x_max, y_max).  A constant crop is
    defined as maximally blurred (1.0) and flagged degenerate.
    """
    x0, y0, x1, y1 = bbox
    if x1 - x0 + 1 < 3 or y1 - y0 + 1 < 3:
        raise RegionTooSmallError(f"reblur needs a crop of at least 3x3, got bbox {bbox}")
    crop = np.asarray(img, dtype=np.float64)[y0:y1 + 1, x0:x1 + 1]
    h = _direction_blur(crop, axis=1)  # horizontal differences, 1x9 blur
    v = _direction_blur(crop, axis=0)  # vertical differences, 9x1 blur
    if h is None and v is None:
        return FocusScore(value=1.0, measure=Measure.REBLUR, degenerate=True)
    candidates = [b if b is not None else 1.0 for b in (h, v)]
    return FocusScore(value=max(candidates), measure=Measure.REBLUR)


def normalize_scores(scores: list[FocusScore]) -> list[float]:
    """Per-scene normalization to [0, 1], sharper-is-higher.

    Blurrier-is-higher measures are inverted as (1 - value) first, then all
    values are divided by the maximum (zero maximum yields all zeros).
    """
    if not scores:
        raise EmptyRegionError("cannot normalize an empty score list")
    measures = {s.measure for s in scores}
    if len(measures) > 1:
        raise MixedMeasuresError(f"mixed measures: {sorted(m.value for m in measures)}")
    values = [1.0 - s.value if s.blurrier_is_higher else s.value for s in scores]
    top = max(values)
    if top <= 0.0:
        return [0.0] * len(values)
    return [v / top for v in values]
