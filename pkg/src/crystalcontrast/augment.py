"""Instance-blurring augmentation.

A random subset of instances (25-50% by default) is Gaussian-blurred in
place and relabeled out-of-focus; pixels outside the selected masks are left
bit-identical.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import cv2
import numpy as np

from .interchange import FocusLevel, Scene

DEFAULT_FRACTION_RANGE = (0.25, 0.50)
DEFAULT_KERNELS = (11, 13, 15, 17)


def sigma_for_kernel(k: int) -> float:
    """Standard kernel-size heuristic for the Gaussian sigma."""
    return 0.3 * ((k - 1) / 2 - 1) + 0.8


@dataclass(frozen=True)
class AugmentConfig:
    fraction_range: tuple[float, float] = DEFAULT_FRACTION_RANGE
    kernel_choices: tuple[int, ...] = DEFAULT_KERNELS
    seed: int = 0

    def __post_init__(self):
        low, high = self.fraction_range
        if not (0.0 <= low <= high <= 1.0):
            raise ValueError("fraction_range must satisfy 0 <= low <= high <= 1")
        if any(k < 3 or k % 2 == 0 for k in self.kernel_choices):
            raise ValueError("kernels must be odd and >= 3")


def _subset_size(rng: np.random.Generator, n: int, low: float, high: float) -> int:
    lo = math.ceil(low * n)
    hi = math.floor(high * n)
    if lo > hi:
        # no integer lies in [low*n, high*n]; fall back to the nearest size
        return min(n, max(0, round((low + high) / 2 * n)))
    return int(rng.integers(lo, hi + 1))


def gaussian_blur(img: np.ndarray, kernel: int) -> np.ndarray:
    """Gaussian blur with reflect border handling and the sigma heuristic."""
    return cv2.GaussianBlur(
        np.asarray(img, dtype=np.float64), (kernel, kernel),
        sigma_for_kernel(kernel), borderType=cv2.BORDER_REFLECT_101,
    )


def blur_instances(
    img: np.ndarray, scene: Scene, config: AugmentConfig
) -> tuple[np.ndarray, Scene]:
    """Blur a random instance subset and relabel it out-of-focus.

    RNG call order (fixed): subset size, subset choice, then one kernel per
    selected instance in ascending id order.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.shape != (scene.height, scene.width):
        raise ValueError(
            f"image is {img.shape[1]}x{img.shape[0]}, scene is {scene.width}x{scene.height}"
        )
    n = len(scene.instances)
    if n == 0:
        return img.copy(), scene

    rng = np.random.default_rng(config.seed)
    low, high = config.fraction_range
    size = _subset_size(rng, n, low, high)
    ids = np.array(sorted(inst.id for inst in scene.instances))
    selected = set() if size == 0 else set(rng.choice(ids, size=size, replace=False).tolist())

    kernels = {
        i: int(rng.choice(np.array(config.kernel_choices))) for i in sorted(selected)
    }
    out = img.copy()
    blurred_cache: dict[int, np.ndarray] = {}
    by_id = {inst.id: inst for inst in scene.instances}
    for inst_id, k in kernels.items():  # ascending id order
        if k not in blurred_cache:
            blurred_cache[k] = gaussian_blur(img, k)
        mask = by_id[inst_id].mask.to_array()
        out[mask] = blurred_cache[k][mask]
    new_instances = [
        replace(inst, focus=FocusLevel.OUT_OF_FOCUS) if inst.id in selected else inst
        for inst in scene.instances
    ]
    return out, scene.with_instances(new_instances)


def derived_seed(seed: int, scene_index: int, copy_index: int) -> int:
    """Per-variant seed: base seed XOR a distinct (scene, copy) tag."""
    return (seed ^ (copy_index * 0x9E3779B1) ^ (scene_index << 32)) & 0xFFFFFFFFFFFFFFFF


def expand_dataset(
    pairs: list[tuple[np.ndarray, Scene]], copies: int, config: AugmentConfig
) -> list[tuple[np.ndarray, Scene]]:
    """Originals plus (copies - 1) augmented variants per original."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    out: list[tuple[np.ndarray, Scene]] = []
    for scene_idx, (img, scene) in enumerate(pairs):
        out.append((np.asarray(img, dtype=np.float64).copy(), scene))
        for copy_idx in range(1, copies):
            cfg = replace(config, seed=derived_seed(config.seed, scene_idx, copy_idx))
            out.append(blur_instances(img, scene, cfg))
    return out
