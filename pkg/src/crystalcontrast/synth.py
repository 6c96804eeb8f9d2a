"""Synthetic depth-layered crystal scenes with exact ground truth.

Crystals are convex speckle-textured polygons assigned to discrete depth
layers; only the focal layer renders sharp, other layers get a Gaussian
defocus proportional to their layer distance.  Ground truth encodes the
annotation rules the pipeline targets:

* focus = in-focus iff the crystal sits on the focal layer;
* agglomerated iff the crystal touches another crystal on the SAME layer;
* cross-layer contacts are allowed only between crystals of different focus
  levels, so binary focus contrast can always recover the labels;
* dust disks are rendered but excluded from the instance list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from . import graph as graphmod
from . import raster
from .augment import gaussian_blur
from .errors import PlacementFailedError
from .interchange import (
    AggloClass,
    FocusLevel,
    Scene,
    SceneRole,
    make_instance,
    save_scene,
)


@dataclass(frozen=True)
class SynthConfig:
    width: int = 256
    height: int = 256
    n_layers: int = 3
    focal_layer: int = 1
    crystals_per_layer: tuple[int, int] = (2, 4)
    blur_per_layer_step: int = 6
    vertex_range: tuple[int, int] = (4, 8)
    radius_fraction: tuple[float, float] = (0.05, 0.11)
    base_intensity: tuple[float, float] = (0.25, 0.85)
    texture_amplitude: tuple[float, float] = (0.08, 0.45)
    cluster_probability: float = 0.45
    cross_contact_probability: float = 0.40
    breakage_probability: float = 0.0
    dust_count: tuple[int, int] = (0, 3)
    background: float = 0.5
    background_noise: float = 0.01
    touch_radius: int = graphmod.DEFAULT_TOUCH_RADIUS
    max_attempts: int = 120
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("dimensions must be positive")
        if not (0 <= self.focal_layer < self.n_layers):
            raise ValueError("focal_layer must be a valid layer index")


def blur_kernel_for_distance(step: int, distance: int) -> int:
    """Odd Gaussian kernel size for a given layer distance (1 = no blur)."""
    k = 1 + step * distance
    return k + 1 if k % 2 == 0 else k


def _convex_polygon_mask(
    rng: np.random.Generator, width: int, height: int,
    cx: float, cy: float, radius: float, n_vertices: int,
) -> np.ndarray | None:
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
    radii = radius * rng.uniform(0.6, 1.0, n_vertices)
    xs = np.clip(cx + radii * np.cos(angles), 1, width - 2)
    ys = np.clip(cy + radii * np.sin(angles), 1, height - 2)
    pts = np.stack([xs, ys], axis=1).astype(np.int32)
    hull = cv2.convexHull(pts)
    canvas = np.zeros((height, width), dtype=np.uint8)
    cv2.fillPoly(canvas, [hull], 1)
    mask = canvas.astype(bool)
    return mask if mask.any() else None


def _chebyshev_touch(a: np.ndarray, b_dilated: np.ndarray) -> bool:
    return bool(np.any(a & b_dilated))


@dataclass(eq=False)
class _Placed:
    mask: np.ndarray
    layer: int
    center: tuple[float, float]
    radius: float


def _place_crystals(rng: np.random.Generator, config: SynthConfig) -> list[_Placed]:
    w, h = config.width, config.height
    rmin = config.radius_fraction[0] * min(w, h)
    rmax = config.radius_fraction[1] * min(w, h)
    counts = {
        layer: int(rng.integers(config.crystals_per_layer[0],
                                config.crystals_per_layer[1] + 1))
        for layer in range(config.n_layers)
    }
    # focal layer first so off-focal crystals can form cross-layer contacts
    layer_order = [config.focal_layer] + [
        l for l in range(config.n_layers) if l != config.focal_layer
    ]
    placed: list[_Placed] = []
    dilated: list[np.ndarray] = []  # per placed crystal, dilated by touch radius
    requested = sum(counts.values())

    for layer in layer_order:
        for _ in range(counts[layer]):
            ok = False
            for _attempt in range(config.max_attempts):
                radius = rng.uniform(rmin, rmax)
                margin = radius + 2
                same_layer = [p for p in placed if p.layer == layer]
                focal_others = [p for p in placed if p.layer == config.focal_layer]
                target = None
                if same_layer and rng.random() < config.cluster_probability:
                    target = same_layer[int(rng.integers(len(same_layer)))]
                elif (layer != config.focal_layer and focal_others
                      and rng.random() < config.cross_contact_probability):
                    target = focal_others[int(rng.integers(len(focal_others)))]
                if target is not None:
                    theta = rng.uniform(0, 2 * np.pi)
                    dist = (target.radius + radius) * rng.uniform(0.5, 0.95)
                    cx = target.center[0] + dist * np.cos(theta)
                    cy = target.center[1] + dist * np.sin(theta)
                    if not (margin <= cx <= w - margin and margin <= cy <= h - margin):
                        continue
                else:
                    cx = rng.uniform(margin, w - margin)
                    cy = rng.uniform(margin, h - margin)
                n_vert = int(rng.integers(config.vertex_range[0],
                                          config.vertex_range[1] + 1))
                mask = _convex_polygon_mask(rng, w, h, cx, cy, radius, n_vert)
                if mask is None:
                    continue
                # reject contacts between same-focus crystals on different
                # layers: they would make ground truth unrecoverable from
                # binary focus contrast
                new_focus_in = layer == config.focal_layer
                conflict = False
                new_dilated = raster.dilate(mask, config.touch_radius)
                for p, pd in zip(placed, dilated):
                    if p.layer == layer:
                        continue
                    other_focus_in = p.layer == config.focal_layer
                    if new_focus_in == other_focus_in and _chebyshev_touch(p.mask, new_dilated):
                        conflict = True
                        break
                if conflict:
                    continue
                placed.append(_Placed(mask, layer, (cx, cy), radius))
                dilated.append(new_dilated)
                ok = True
                break
            if not ok:
                raise PlacementFailedError(
                    "could not place crystal without label conflicts",
                    placed=len(placed), requested=requested,
                )
    return placed


def generate_scene(config: SynthConfig) -> tuple[np.ndarray, Scene]:
    """One synthetic image plus its fully labeled ground-truth scene."""
    rng = np.random.default_rng(config.seed)
    w, h = config.width, config.height
    placed = _place_crystals(rng, config)

    # optional homogeneous-breakage stamps: a small polygon fully inside a
    # larger crystal, both labeled non-agglomerated (disabled by default
    # because it deliberately defies focus-contrast recovery)
    breakage_ids: set[int] = set()
    if config.breakage_probability > 0:
        extra: list[_Placed] = []
        for p in list(placed):
            if rng.random() < config.breakage_probability:
                small = _convex_polygon_mask(
                    rng, w, h, p.center[0], p.center[1], p.radius * 0.35,
                    int(rng.integers(config.vertex_range[0], config.vertex_range[1] + 1)),
                )
                if small is not None and (small & ~p.mask).sum() == 0:
                    extra.append(_Placed(small, p.layer, p.center, p.radius * 0.35))
                    breakage_ids.add(len(placed) + len(extra) - 1)
                    breakage_ids.add(placed.index(p))
        placed.extend(extra)

    # ground-truth agglomeration: same-layer contact
    agglo: dict[int, AggloClass] = {}
    for layer in range(config.n_layers):
        idx = [i for i, p in enumerate(placed) if p.layer == layer]
        if not idx:
            continue
        adj = graphmod.build_adjacency_from_masks(
            {i: placed[i].mask for i in idx}, config.touch_radius
        )
        for i in idx:
            touching = bool(graphmod.neighbors(adj, i)) and i not in breakage_ids
            agglo[i] = AggloClass.AGGLOMERATED if touching else AggloClass.NON_AGGLOMERATED

    # render: background, then crystals farthest-first so the focal layer
    # is painted on top
    img = np.clip(
        config.background + rng.normal(0.0, config.background_noise, (h, w)), 0, 1
    )
    textures = []
    for i, p in enumerate(placed):
        base = rng.uniform(*config.base_intensity)
        amp = rng.uniform(*config.texture_amplitude)
        ys, xs = np.nonzero(p.mask)
        y0, y1, x0, x1 = ys.min(), ys.max(), xs.min(), xs.max()
        noise = rng.standard_normal((y1 - y0 + 1, x1 - x0 + 1))
        textures.append((base, amp, (x0, y0, x1, y1), noise))

    order = sorted(
        range(len(placed)),
        key=lambda i: (-abs(placed[i].layer - config.focal_layer), placed[i].layer, i),
    )
    for i in order:
        p = placed[i]
        base, amp, (x0, y0, x1, y1), noise = textures[i]
        dist = abs(p.layer - config.focal_layer)
        kernel = blur_kernel_for_distance(config.blur_per_layer_step, dist)
        pad = kernel
        cy0, cy1 = max(0, y0 - pad), min(h, y1 + 1 + pad)
        cx0, cx1 = max(0, x0 - pad), min(w, x1 + 1 + pad)
        alpha = p.mask[cy0:cy1, cx0:cx1].astype(np.float64)
        sprite = np.zeros_like(alpha)
        crop_mask = p.mask[y0:y1 + 1, x0:x1 + 1]
        texture = np.clip(base * (1.0 + amp * noise), 0, 1)
        sprite[y0 - cy0:y1 + 1 - cy0, x0 - cx0:x1 + 1 - cx0][crop_mask] = texture[crop_mask]
        if kernel > 1:
            sprite = gaussian_blur(sprite, kernel)
            alpha = gaussian_blur(alpha, kernel)
        region = img[cy0:cy1, cx0:cx1]
        img[cy0:cy1, cx0:cx1] = region * (1.0 - alpha) + sprite

    # dust: small dark disks, never touching a crystal, not instances
    n_dust = int(rng.integers(config.dust_count[0], config.dust_count[1] + 1))
    all_masks = np.zeros((h, w), dtype=bool)
    for p in placed:
        all_masks |= p.mask
    forbidden = raster.dilate(all_masks, 3) if placed else all_masks
    for _ in range(n_dust):
        for _attempt in range(config.max_attempts):
            r = int(rng.integers(2, 5))
            cx = int(rng.integers(r + 1, w - r - 1))
            cy = int(rng.integers(r + 1, h - r - 1))
            disk = np.zeros((h, w), dtype=np.uint8)
            cv2.circle(disk, (cx, cy), r, 1, -1)
            disk = disk.astype(bool)
            if not np.any(disk & forbidden):
                img[disk] = 0.08
                break

    instances = [
        make_instance(
            i, p.mask,
            focus=FocusLevel.IN_FOCUS if p.layer == config.focal_layer
            else FocusLevel.OUT_OF_FOCUS,
            agglo=agglo[i],
        )
        for i, p in enumerate(placed)
    ]
    scene = Scene(width=w, height=h, instances=tuple(instances),
                  role=SceneRole.GROUND_TRUTH)
    scene.validate()
    return img, scene


def scene_seed(base_seed: int, index: int) -> int:
    return (base_seed + 0x9E3779B97F4A7C15 * (index + 1)) & 0xFFFFFFFFFFFFFFFF


def save_image(img: np.ndarray, path: str | Path) -> None:
    cv2.imwrite(str(path), np.round(np.clip(img, 0, 1) * 255).astype(np.uint8))


def generate_corpus(
    config: SynthConfig, n_scenes: int, out_dir: str | Path,
    prefix: str = "scene",
) -> list[tuple[Path, Path]]:
    """Write n_scenes (PNG, scene JSON) pairs plus a manifest; returns the pairs."""
    if n_scenes < 1:
        raise ValueError("n_scenes must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs = []
    manifest = {"n_scenes": n_scenes, "seed": config.seed, "scenes": []}
    for i in range(n_scenes):
        cfg = replace(config, seed=scene_seed(config.seed, i))
        img, scene = generate_scene(cfg)
        img_name = f"{prefix}_{i:04d}.png"
        scene_name = f"{prefix}_{i:04d}.json"
        save_image(img, out / img_name)
        save_scene(replace(scene, image_path=img_name), out / scene_name)
        manifest["scenes"].append({"image": img_name, "scene": scene_name, "seed": cfg.seed})
        pairs.append((out / img_name, out / scene_name))
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )
    return pairs
