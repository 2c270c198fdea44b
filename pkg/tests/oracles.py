"""Independent reference implementations used to check the library.

Everything here is deliberately naive — loops, exhaustive scans, forward
evaluations only — and shares no code with the paths under test.
"""

from __future__ import annotations

import numpy as np


def finite_diff(f, arrays: list[np.ndarray], h: float = 1e-5) -> list[np.ndarray]:
    """Central finite differences of a scalar function of in-place arrays.

    `f` takes no arguments and must re-read `arrays` on every call.
    """
    out = []
    for a in arrays:
        g = np.zeros_like(a)
        flat = a.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            fp = f()
            flat[i] = keep - h
            fm = f()
            flat[i] = keep
            gflat[i] = (fp - fm) / (2.0 * h)
        out.append(g)
    return out


def rel_err(got: np.ndarray, want: np.ndarray) -> float:
    """Norm-relative error with a floor so exact zeros compare cleanly."""
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    denom = max(float(np.linalg.norm(want)), 1e-12)
    return float(np.linalg.norm(got - want)) / denom

def matmul_loops(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Triple-loop matrix product."""
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for l in range(k):
                out[i, j] += a[i, l] * b[l, j]
    return out


def iou_pixels(a, b) -> float:
    """IoU by literally rasterizing both boxes and counting pixels."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    w = max(ax + aw, bx + bw) + 1
    h = max(ay + ah, by + bh) + 1
    grid_a = np.zeros((h, w), dtype=bool)
    grid_b = np.zeros((h, w), dtype=bool)
    grid_a[ay : ay + ah, ax : ax + aw] = True
    grid_b[by : by + bh, bx : bx + bw] = True
    inter = np.logical_and(grid_a, grid_b).sum()
    union = np.logical_or(grid_a, grid_b).sum()
    return float(inter) / float(union) if union else 0.0


def greedy_match_naive(gt_boxes, det_boxes, det_scores, thr) -> list[bool]:
    """PASCAL-style greedy matching written with explicit scans.

    Detections are taken in descending score order (stable on ties); each
    claims the unmatched ground truth of highest IoU when that IoU clears
    the threshold.
    """
    order = sorted(range(len(det_boxes)), key=lambda i: (-det_scores[i], i))
    taken = [False] * len(gt_boxes)
    flags = [False] * len(det_boxes)
    for i in order:
        best_j = -1
        best_iou = 0.0
        for j in range(len(gt_boxes)):
            if taken[j]:
                continue
            v = iou_pixels(det_boxes[i], gt_boxes[j])
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0 and best_iou >= thr:
            taken[best_j] = True
            flags[i] = True
    return flags


def pr_ap_naive(flags: list[bool], num_gt: int) -> float:
    """Precision/recall sum built point by point from the ranked flags."""
    ap = 0.0
    tp = 0
    prev_recall = 0.0
    for k, is_tp in enumerate(flags, start=1):
        if is_tp:
            tp += 1
        precision = tp / k
        recall = tp / num_gt
        ap += precision * (recall - prev_recall)
        prev_recall = recall
    return ap


def nms_quadratic(boxes, scores, thr) -> list[int]:
    """O(n^2) suppression: compare every candidate against every kept box."""
    order = sorted(range(len(boxes)), key=lambda i: (-scores[i], i))
    kept: list[int] = []
    for i in order:
        ok = True
        for j in kept:
            if iou_pixels(boxes[i], boxes[j]) >= thr:
                ok = False
                break
        if ok:
            kept.append(i)
    return kept


def bbox_scan(mask: np.ndarray):
    """Bounding box of a binary mask by scanning every pixel."""
    rows, cols = [], []
    h, w = mask.shape
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                rows.append(r)
                cols.append(c)
    if not rows:
        return None
    return (min(cols), min(rows), max(cols) - min(cols) + 1, max(rows) - min(rows) + 1)


def ring_mode_centers(radius: float = 2.0, k: int = 8) -> np.ndarray:
    angles = np.arange(k) * (2.0 * np.pi / k)
    return np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)


def modes_covered(points: np.ndarray, sigma: float = 0.02, radius: float = 2.0,
                  min_fraction: float = 0.01) -> int:
    """Count ring modes holding at least `min_fraction` of the points within 3 sigma."""
    centers = ring_mode_centers(radius)
    need = int(np.ceil(min_fraction * len(points)))
    covered = 0
    for c in centers:
        dist = np.sqrt(((points - c) ** 2).sum(axis=1))
        if int((dist <= 3.0 * sigma).sum()) >= need:
            covered += 1
    return covered
