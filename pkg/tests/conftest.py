import numpy as np
import pytest

from crystalcontrast.interchange import (
    AggloClass,
    FocusLevel,
    Scene,
    SceneRole,
    make_instance,
)


def random_mask(rng, width, height, ensure_nonempty=True):
    """Random blobby mask: a few rectangles and points, possibly disconnected."""
    mask = np.zeros((height, width), dtype=bool)
    for _ in range(rng.integers(1, 4)):
        x0 = int(rng.integers(0, width))
        y0 = int(rng.integers(0, height))
        w = int(rng.integers(1, max(2, width // 2)))
        h = int(rng.integers(1, max(2, height // 2)))
        mask[y0:y0 + h, x0:x0 + w] = True
    noise = rng.random((height, width)) < 0.1
    mask ^= noise
    if ensure_nonempty and not mask.any():
        mask[int(rng.integers(height)), int(rng.integers(width))] = True
    return mask


def random_blob(rng, width, height, max_side=6):
    """Small solid rectangle blob, for scene instances."""
    w = int(rng.integers(2, max_side))
    h = int(rng.integers(2, max_side))
    x0 = int(rng.integers(0, width - w))
    y0 = int(rng.integers(0, height - h))
    mask = np.zeros((height, width), dtype=bool)
    mask[y0:y0 + h, x0:x0 + w] = True
    return mask


def random_labeled_scene(rng, width=24, height=24, max_instances=6,
                         role=SceneRole.GROUND_TRUTH, with_scores=False):
    """Scene of small rectangles with random agglo labels (maybe empty)."""
    n = int(rng.integers(0, max_instances + 1))
    instances = []
    for i in range(n):
        mask = random_blob(rng, width, height)
        agglo = AggloClass.AGGLOMERATED if rng.random() < 0.5 else AggloClass.NON_AGGLOMERATED
        focus = FocusLevel.IN_FOCUS if rng.random() < 0.5 else FocusLevel.OUT_OF_FOCUS
        score = round(float(rng.random()), 6) if with_scores else None
        instances.append(make_instance(i, mask, focus=focus, agglo=agglo, score=score))
    return Scene(width=width, height=height, instances=tuple(instances), role=role)


def perturbed_prediction(rng, gt: Scene, shift_prob=0.5, drop_prob=0.2,
                         flip_prob=0.3, extra_prob=0.3):
    """Noisy prediction derived from a ground-truth scene."""
    instances = []
    next_id = 0
    for inst in gt.instances:
        if rng.random() < drop_prob:
            continue
        mask = inst.mask.to_array()
        if rng.random() < shift_prob:
            dx, dy = int(rng.integers(-2, 3)), int(rng.integers(-2, 3))
            mask = np.roll(np.roll(mask, dy, axis=0), dx, axis=1)
        agglo = inst.agglo
        if rng.random() < flip_prob:
            agglo = (AggloClass.NON_AGGLOMERATED if agglo is AggloClass.AGGLOMERATED
                     else AggloClass.AGGLOMERATED)
        if mask.any():
            instances.append(make_instance(
                next_id, mask, agglo=agglo, score=round(float(rng.random()), 6)))
            next_id += 1
    if rng.random() < extra_prob:
        instances.append(make_instance(
            next_id, random_blob(rng, gt.width, gt.height),
            agglo=AggloClass.AGGLOMERATED if rng.random() < 0.5 else AggloClass.NON_AGGLOMERATED,
            score=round(float(rng.random()), 6)))
    return Scene(width=gt.width, height=gt.height, instances=tuple(instances),
                 role=SceneRole.PREDICTION)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
