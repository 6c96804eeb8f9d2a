"""Independent brute-force references used by the test suite.

Everything here deliberately avoids the library's vectorized code paths:
plain Python loops, sets of (x, y) tuples, breadth-first searches.  The
implementations follow the documented contracts, not the production code.
"""

from __future__ import annotations

from collections import deque


def mask_to_set(mask) -> set[tuple[int, int]]:
    h = len(mask)
    w = len(mask[0])
    return {(x, y) for y in range(h) for x in range(w) if mask[y][x]}


def set_to_mask(pixels, width, height):
    return [[(x, y) in pixels for x in range(width)] for y in range(height)]


def flood_fill_holes(mask):
    """Fill off-pixels not 4-connected to the border background."""
    h, w = len(mask), len(mask[0])
    outside = set()
    queue = deque()
    for x in range(w):
        for y in (0, h - 1):
            if not mask[y][x] and (x, y) not in outside:
                outside.add((x, y))
                queue.append((x, y))
    for y in range(h):
        for x in (0, w - 1):
            if not mask[y][x] and (x, y) not in outside:
                outside.add((x, y))
                queue.append((x, y))
    while queue:
        x, y = queue.popleft()
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and not mask[ny][nx] and (nx, ny) not in outside:
                outside.add((nx, ny))
                queue.append((nx, ny))
    return [[bool(mask[y][x]) or (x, y) not in outside for x in range(w)] for y in range(h)]


def components_8(mask):
    """8-connected components as lists of (x, y), in discovery (y, x) order."""
    h, w = len(mask), len(mask[0])
    seen = set()
    comps = []
    for y in range(h):
        for x in range(w):
            if mask[y][x] and (x, y) not in seen:
                comp = []
                queue = deque([(x, y)])
                seen.add((x, y))
                while queue:
                    cx, cy = queue.popleft()
                    comp.append((cx, cy))
                    for dx in (-1, 0, 1):
                        for dy in (-1, 0, 1):
                            nx, ny = cx + dx, cy + dy
                            if (0 <= nx < w and 0 <= ny < h and mask[ny][nx]
                                    and (nx, ny) not in seen):
                                seen.add((nx, ny))
                                queue.append((nx, ny))
                comps.append(comp)
    return comps


def largest_component_ref(mask):
    comps = components_8(mask)
    if not comps:
        return [[False] * len(mask[0]) for _ in mask]
    # max size; earlier discovery wins ties (seed pixel in (y, x) order)
    sizes = [len(c) for c in comps]
    best = comps[sizes.index(max(sizes))]
    return set_to_mask(set(best), len(mask[0]), len(mask))


def dilate_ref(mask, radius):
    """O(N^2) Chebyshev-distance dilation."""
    h, w = len(mask), len(mask[0])
    on = mask_to_set(mask)
    out = set()
    for y in range(h):
        for x in range(w):
            for (px, py) in on:
                if max(abs(px - x), abs(py - y)) <= radius:
                    out.add((x, y))
                    break
    return set_to_mask(out, w, h)


def contour_ref(mask):
    """On-pixels with an off or out-of-bounds 4-neighbor."""
    h, w = len(mask), len(mask[0])
    out = set()
    for y in range(h):
        for x in range(w):
            if not mask[y][x]:
                continue
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h) or not mask[ny][nx]:
                    out.add((x, y))
                    break
    return set_to_mask(out, w, h)


def min_chebyshev_distance(a, b):
    return min(max(abs(ax - bx), abs(ay - by)) for ax, ay in a for bx, by in b)


# ---------------------------------------------------------------------------
# metrics reference: pure-python sets, explicit greedy matching


def iou_sets(a, b):
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def greedy_match(gt, pred, threshold, class_aware):
    """gt/pred: dicts id -> (pixel set, class). Returns list of (gid, pid)."""
    cands = []
    for gid, (gset, gcls) in gt.items():
        for pid, (pset, pcls) in pred.items():
            if class_aware and gcls != pcls:
                continue
            iou = iou_sets(gset, pset)
            if iou >= threshold:
                cands.append((gid, pid, iou))
    cands.sort(key=lambda t: (-t[2], t[0], t[1]))
    used_g, used_p, pairs = set(), set(), []
    for gid, pid, iou in cands:
        if gid in used_g or pid in used_p:
            continue
        used_g.add(gid)
        used_p.add(pid)
        pairs.append((gid, pid))
    return pairs


def prf_ref(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else (1.0 if fn == 0 else 0.0)
    recall = tp / (tp + fn) if tp + fn else (1.0 if fp == 0 else 0.0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def ap_ref(preds, gt_by_scene, threshold):
    """preds: list of (score, scene, pid, pixel set); gt_by_scene: scene -> {gid: set}."""
    n_gt = sum(len(g) for g in gt_by_scene.values())
    if n_gt == 0:
        return 0.0
    order = sorted(preds, key=lambda t: (-t[0], t[1], t[2]))
    used = set()
    flags = []
    for score, scene, pid, pset in order:
        best, best_iou = None, -1.0
        for gid in sorted(gt_by_scene.get(scene, {})):
            if (scene, gid) in used:
                continue
            iou = iou_sets(gt_by_scene[scene][gid], pset)
            if iou >= threshold and iou > best_iou:
                best, best_iou = gid, iou
        if best is not None:
            used.add((scene, best))
            flags.append(True)
        else:
            flags.append(False)
    if not flags:
        return 0.0
    points = []
    tp = fp = 0
    for is_tp in flags:
        tp += is_tp
        fp += not is_tp
        points.append((tp / n_gt, tp / (tp + fp)))
    ap = 0.0
    prev_recall = 0.0
    for i, (rec, _) in enumerate(points):
        envelope = max(p for r, p in points[i:])
        ap += (rec - prev_recall) * envelope
        prev_recall = rec
    return ap


def evaluate_ref(scenes, threshold=0.5, acc_denominator="matched"):
    """Full pooled evaluation over {scene_key: (gt, pred)}.

    gt maps id -> (pixel set, class string); pred maps id -> (pixel set,
    class string, score).  Mirrors the documented contracts with naive data
    structures; classes are "non" and "agg".
    """
    classes = ("non", "agg")
    agree = matched = total_gt = 0
    per_class = {c: {"tp": 0, "fp": 0, "fn": 0, "n_gt": 0,
                     "inter": 0, "union": 0, "preds": []} for c in classes}
    gt_pools = {c: {} for c in classes}
    for key, (gt, pred_scored) in scenes.items():
        pred = {pid: (pset, cls) for pid, (pset, cls, _score) in pred_scored.items()}
        total_gt += len(gt)
        for gid, pid in greedy_match(gt, pred, threshold, class_aware=False):
            matched += 1
            agree += gt[gid][1] == pred[pid][1]
        pairs = greedy_match(gt, pred, threshold, class_aware=True)
        mg = {g for g, _ in pairs}
        mp = {p for _, p in pairs}
        for c in classes:
            st = per_class[c]
            st["n_gt"] += sum(1 for _, cls in gt.values() if cls == c)
            st["tp"] += sum(1 for g, _ in pairs if gt[g][1] == c)
            st["fp"] += sum(1 for pid, (_, cls) in pred.items() if cls == c and pid not in mp)
            st["fn"] += sum(1 for gid, (_, cls) in gt.items() if cls == c and gid not in mg)
            gt_union = set()
            pred_union = set()
            for gset, cls in gt.values():
                if cls == c:
                    gt_union |= gset
            for pset, cls in pred.values():
                if cls == c:
                    pred_union |= pset
            st["inter"] += len(gt_union & pred_union)
            st["union"] += len(gt_union | pred_union)
            gt_pools[c][key] = {gid: gset for gid, (gset, cls) in gt.items() if cls == c}
            for pid, (pset, cls, score) in sorted(pred_scored.items()):
                if cls == c:
                    st["preds"].append((score if score is not None else 1.0, key, pid, pset))

    denom = matched if acc_denominator == "matched" else total_gt
    acc = agree / denom if denom else 0.0
    f1s, recalls, precisions, aps, pious = [], [], [], [], []
    for c in classes:
        st = per_class[c]
        p, r, f = prf_ref(st["tp"], st["fp"], st["fn"])
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
        if st["n_gt"] > 0:
            aps.append(ap_ref(st["preds"], gt_pools[c], threshold))
            pious.append(st["inter"] / st["union"] if st["union"] else 1.0)
    mean = lambda xs: sum(xs) / len(xs) if xs else 0.0
    return {
        "acc": acc,
        "precision": mean(precisions),
        "recall": mean(recalls),
        "f1": mean(f1s),
        "ap": mean(aps),
        # vacuously perfect when no class is present in the ground truth
        "pixel_iou": mean(pious) if pious else 1.0,
    }
