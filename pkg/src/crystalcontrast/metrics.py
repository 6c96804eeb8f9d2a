"""Evaluation of predicted scenes against ground truth.

Instance matching is greedy over IoU-descending candidate pairs (ties by
(gt_id, pred_id)), at a default IoU threshold of 0.5.  Five headline
numbers: agglomeration classification accuracy (over class-agnostic matched
pairs), macro F1 / Recall (class-aware instance matching), per-class pixel
IoU, and all-points-interpolated AP.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import MissingCounterpartError, MissingLabelError
from .interchange import AggloClass, BinaryMask, Scene, load_scene

DEFAULT_IOU_THRESHOLD = 0.5
CLASSES = (AggloClass.NON_AGGLOMERATED, AggloClass.AGGLOMERATED)


def _as_array(mask) -> np.ndarray:
    if isinstance(mask, BinaryMask):
        return mask.to_array()
    return np.asarray(mask, dtype=bool)


def mask_iou(a, b) -> float:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = np.count_nonzero(a & b)
    union = np.count_nonzero(a | b)
    return inter / union if union else 0.0


@dataclass(frozen=True)
class MatchSet:
    pairs: tuple[tuple[int, int, float], ...]  # (gt_id, pred_id, iou)
    unmatched_gt: tuple[int, ...]
    unmatched_pred: tuple[int, ...]
    iou_threshold: float


def _require_labels(scene: Scene, what: str) -> None:
    missing = [inst.id for inst in scene.instances if inst.agglo is None]
    if missing:
        raise MissingLabelError(f"{what} instances without agglo labels: {missing}")


def _pair_ious(gt: Scene, pred: Scene) -> dict[tuple[int, int], float]:
    if (gt.width, gt.height) != (pred.width, pred.height):
        raise ValueError("scene dimensions differ")
    gt_arrays = {i.id: i.mask.to_array() for i in gt.instances}
    out = {}
    for p in pred.instances:
        parr = p.mask.to_array()
        px0, py0, px1, py1 = p.bbox
        for g in gt.instances:
            gx0, gy0, gx1, gy1 = g.bbox
            if px1 < gx0 or gx1 < px0 or py1 < gy0 or gy1 < py0:
                continue
            iou = mask_iou(gt_arrays[g.id], parr)
            if iou > 0:
                out[(g.id, p.id)] = iou
    return out


def match_instances(
    gt: Scene, pred: Scene,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    class_aware: bool = False,
) -> MatchSet:
    """Greedy one-to-one matching of predictions to ground truth."""
    if class_aware:
        _require_labels(gt, "ground-truth")
        _require_labels(pred, "predicted")
    gt_class = {i.id: i.agglo for i in gt.instances}
    pred_class = {i.id: i.agglo for i in pred.instances}
    candidates = [
        (gid, pid, iou)
        for (gid, pid), iou in _pair_ious(gt, pred).items()
        if iou >= iou_threshold and (not class_aware or gt_class[gid] == pred_class[pid])
    ]
    candidates.sort(key=lambda t: (-t[2], t[0], t[1]))
    used_gt: set[int] = set()
    used_pred: set[int] = set()
    pairs = []
    for gid, pid, iou in candidates:
        if gid in used_gt or pid in used_pred:
            continue
        used_gt.add(gid)
        used_pred.add(pid)
        pairs.append((gid, pid, iou))
    return MatchSet(
        pairs=tuple(pairs),
        unmatched_gt=tuple(sorted(i.id for i in gt.instances if i.id not in used_gt)),
        unmatched_pred=tuple(sorted(i.id for i in pred.instances if i.id not in used_pred)),
        iou_threshold=iou_threshold,
    )


@dataclass(frozen=True)
class AccResult:
    value: float
    matched: int
    agree: int
    no_matches: bool


def agglomeration_accuracy(
    gt: Scene, pred: Scene,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    denominator: str = "matched",
) -> AccResult:
    """Label agreement over class-agnostic matched pairs.

    ``denominator`` "matched" (default) divides by the matched-pair count,
    "gt" by the total ground-truth instance count.
    """
    _require_labels(gt, "ground-truth")
    _require_labels(pred, "predicted")
    ms = match_instances(gt, pred, iou_threshold, class_aware=False)
    gt_class = {i.id: i.agglo for i in gt.instances}
    pred_class = {i.id: i.agglo for i in pred.instances}
    agree = sum(1 for gid, pid, _ in ms.pairs if gt_class[gid] == pred_class[pid])
    denom = len(ms.pairs) if denominator == "matched" else len(gt.instances)
    if denom == 0:
        return AccResult(0.0, len(ms.pairs), agree, no_matches=True)
    return AccResult(agree / denom, len(ms.pairs), agree, no_matches=False)


# ---------------------------------------------------------------------------
# per-scene stats that pool by summation


@dataclass
class ClassStats:
    n_gt: int = 0
    tp: int = 0
    fp: int = 0
    fn: int = 0
    pixel_inter: int = 0
    pixel_union: int = 0
    # one entry per prediction: (score, scene_key, pred_id, {gt_id: iou})
    ap_entries: list = field(default_factory=list)


@dataclass
class SceneStats:
    per_class: dict[AggloClass, ClassStats]
    acc_agree: int
    acc_matched: int
    n_gt: int


def scene_stats(
    gt: Scene, pred: Scene,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    scene_key: str = "",
) -> SceneStats:
    _require_labels(gt, "ground-truth")
    _require_labels(pred, "predicted")
    ious = _pair_ious(gt, pred)
    per_class = {c: ClassStats() for c in CLASSES}

    ms = match_instances(gt, pred, iou_threshold, class_aware=True)
    matched_gt = {gid for gid, _, _ in ms.pairs}
    matched_pred = {pid for _, pid, _ in ms.pairs}
    for c in CLASSES:
        st = per_class[c]
        st.n_gt = sum(1 for i in gt.instances if i.agglo == c)
        st.tp = sum(1 for gid, _, _ in ms.pairs if gt.instance(gid).agglo == c)
        st.fp = sum(1 for i in pred.instances if i.agglo == c and i.id not in matched_pred)
        st.fn = sum(1 for i in gt.instances if i.agglo == c and i.id not in matched_gt)

        gt_union = np.zeros((gt.height, gt.width), dtype=bool)
        pred_union = np.zeros((gt.height, gt.width), dtype=bool)
        for i in gt.instances:
            if i.agglo == c:
                gt_union |= i.mask.to_array()
        for i in pred.instances:
            if i.agglo == c:
                pred_union |= i.mask.to_array()
        st.pixel_inter = int(np.count_nonzero(gt_union & pred_union))
        st.pixel_union = int(np.count_nonzero(gt_union | pred_union))

        for p in pred.instances:
            if p.agglo != c:
                continue
            score = p.score if p.score is not None else 1.0
            cand = {
                g.id: ious[(g.id, p.id)]
                for g in gt.instances
                if g.agglo == c and (g.id, p.id) in ious
                and ious[(g.id, p.id)] >= iou_threshold
            }
            st.ap_entries.append((score, scene_key, p.id, cand))

    acc = agglomeration_accuracy(gt, pred, iou_threshold)
    return SceneStats(per_class=per_class, acc_agree=acc.agree,
                      acc_matched=acc.matched, n_gt=len(gt.instances))


def _prf_from_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 1.0 if fn == 0 else 0.0
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 1.0 if fp == 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def _ap_from_entries(entries: list, n_gt: int) -> float:
    """All-points-interpolated AP over a pooled prediction list."""
    if n_gt == 0:
        return 0.0
    order = sorted(entries, key=lambda e: (-e[0], e[1], e[2]))
    used: set[tuple[str, int]] = set()
    tps = []
    for score, scene_key, pid, cand in order:
        best_gid, best_iou = None, -1.0
        for gid, iou in sorted(cand.items()):
            if (scene_key, gid) in used:
                continue
            if iou > best_iou:
                best_gid, best_iou = gid, iou
        if best_gid is not None:
            used.add((scene_key, best_gid))
            tps.append(1)
        else:
            tps.append(0)
    if not tps:
        return 0.0
    tp_cum = np.cumsum(tps)
    fp_cum = np.cumsum([1 - t for t in tps])
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    # precision envelope from the right, then area under the PR curve
    mrec = np.concatenate(([0.0], recall))
    mpre = np.concatenate(([1.0], precision))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    return float(np.sum((mrec[1:] - mrec[:-1]) * mpre[1:]))


@dataclass(frozen=True)
class EvalReport:
    acc: float
    f1: float
    pixel_iou: float
    ap: float
    recall: float
    precision: float
    per_class: dict
    counts: dict
    no_matches: bool
    per_scene: tuple = ()

    def to_dict(self) -> dict:
        return {
            "acc": round(self.acc, 6),
            "f1": round(self.f1, 6),
            "pixel_iou": round(self.pixel_iou, 6),
            "ap": round(self.ap, 6),
            "recall": round(self.recall, 6),
            "precision": round(self.precision, 6),
            "per_class": self.per_class,
            "counts": self.counts,
            "no_matches": self.no_matches,
            "per_scene": list(self.per_scene),
        }


def _report_from_stats(
    stats: Sequence[SceneStats],
    average: str = "macro",
    acc_denominator: str = "matched",
    per_scene: Sequence[dict] = (),
) -> EvalReport:
    pooled = {c: ClassStats() for c in CLASSES}
    for s in stats:
        for c in CLASSES:
            pooled[c].n_gt += s.per_class[c].n_gt
            pooled[c].tp += s.per_class[c].tp
            pooled[c].fp += s.per_class[c].fp
            pooled[c].fn += s.per_class[c].fn
            pooled[c].pixel_inter += s.per_class[c].pixel_inter
            pooled[c].pixel_union += s.per_class[c].pixel_union
            pooled[c].ap_entries.extend(s.per_class[c].ap_entries)

    acc_agree = sum(s.acc_agree for s in stats)
    acc_matched = sum(s.acc_matched for s in stats)
    acc_denom = acc_matched if acc_denominator == "matched" else sum(s.n_gt for s in stats)
    acc = acc_agree / acc_denom if acc_denom else 0.0

    per_class = {}
    precisions, recalls, f1s, aps, pixel_ious = [], [], [], [], []
    gt_classes = [c for c in CLASSES if pooled[c].n_gt > 0]
    for c in CLASSES:
        st = pooled[c]
        p, r, f = _prf_from_counts(st.tp, st.fp, st.fn)
        ap = _ap_from_entries(st.ap_entries, st.n_gt)
        piou = st.pixel_inter / st.pixel_union if st.pixel_union else 1.0
        per_class[c.value] = {
            "precision": round(p, 6), "recall": round(r, 6), "f1": round(f, 6),
            "ap": round(ap, 6), "pixel_iou": round(piou, 6),
            "tp": st.tp, "fp": st.fp, "fn": st.fn, "n_gt": st.n_gt,
        }
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
        if c in gt_classes:
            aps.append(ap)
            pixel_ious.append(piou)

    if average == "micro":
        tp = sum(pooled[c].tp for c in CLASSES)
        fp = sum(pooled[c].fp for c in CLASSES)
        fn = sum(pooled[c].fn for c in CLASSES)
        precision, recall, f1 = _prf_from_counts(tp, fp, fn)
        inter = sum(pooled[c].pixel_inter for c in gt_classes)
        union = sum(pooled[c].pixel_union for c in gt_classes)
        pixel = inter / union if union else 1.0
    else:
        precision = float(np.mean(precisions)) if precisions else 0.0
        recall = float(np.mean(recalls)) if recalls else 0.0
        f1 = float(np.mean(f1s)) if f1s else 0.0
        pixel = float(np.mean(pixel_ious)) if pixel_ious else (1.0 if not gt_classes else 0.0)
    ap = float(np.mean(aps)) if aps else 0.0

    counts = {
        "gt_instances": sum(s.n_gt for s in stats),
        "matched_pairs": acc_matched,
        "label_agreements": acc_agree,
    }
    return EvalReport(
        acc=acc, f1=f1, pixel_iou=pixel, ap=ap, recall=recall, precision=precision,
        per_class=per_class, counts=counts,
        no_matches=acc_matched == 0, per_scene=tuple(per_scene),
    )


def evaluate_scenes(
    pairs: Sequence[tuple[str, Scene, Scene]],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    average: str = "macro",
    acc_denominator: str = "matched",
    jobs: int = 1,
) -> EvalReport:
    """Pooled evaluation of (key, gt, pred) scene triples."""
    from ._parallel import parallel_map

    def one(triple):
        key, gt, pred = triple
        return scene_stats(gt, pred, iou_threshold, scene_key=key)

    stats = parallel_map(one, list(pairs), jobs)
    per_scene = []
    for (key, gt, pred), st in zip(pairs, stats):
        single = _report_from_stats([st], average, acc_denominator)
        per_scene.append({
            "scene": key,
            "acc": round(single.acc, 6), "f1": round(single.f1, 6),
            "pixel_iou": round(single.pixel_iou, 6),
            "ap": round(single.ap, 6), "recall": round(single.recall, 6),
        })
    return _report_from_stats(stats, average, acc_denominator, per_scene)


def evaluate_corpus(
    gt_dir: str | Path, pred_dir: str | Path,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    average: str = "macro",
    acc_denominator: str = "matched",
    jobs: int = 1,
) -> EvalReport:
    """Evaluate matching scene filenames of two directories."""
    gt_dir, pred_dir = Path(gt_dir), Path(pred_dir)
    gt_files = sorted(p.name for p in gt_dir.glob("*.json") if p.name != "manifest.json")
    pred_files = {p.name for p in pred_dir.glob("*.json") if p.name != "manifest.json"}
    missing = [name for name in gt_files if name not in pred_files]
    extra = sorted(pred_files - set(gt_files))
    if missing or extra:
        raise MissingCounterpartError(
            f"unpaired scene files (missing predictions: {missing}, "
            f"predictions without ground truth: {extra})"
        )
    pairs = [
        (name, load_scene(gt_dir / name), load_scene(pred_dir / name))
        for name in gt_files
    ]
    return evaluate_scenes(pairs, iou_threshold, average, acc_denominator, jobs)


def detection_prf(
    gt: Scene, pred: Scene,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    average: str = "macro",
) -> tuple[float, float, float]:
    """Class-aware instance precision / recall / F1 for one scene."""
    st = scene_stats(gt, pred, iou_threshold)
    rep = _report_from_stats([st], average)
    return rep.precision, rep.recall, rep.f1


def pixel_iou(gt: Scene, pred: Scene) -> float:
    """Per-class pixel IoU averaged over classes present in the ground truth."""
    st = scene_stats(gt, pred)
    return _report_from_stats([st]).pixel_iou


def average_precision(
    gt: Scene, pred: Scene, iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> float:
    """All-points-interpolated AP, macro over classes present in ground truth."""
    st = scene_stats(gt, pred, iou_threshold)
    return _report_from_stats([st]).ap
