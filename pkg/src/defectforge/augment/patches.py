"""Defect patches: extraction from annotated images, alpha masks, feathering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datakit.manifest import AnnotatedImage


class BoxOutOfBoundsError(ValueError):
    """An annotation box does not fit inside its image."""


@dataclass
class DefectPatch:
    """A grayscale defect crop (or generated sample) with its alpha mask."""

    pixels: np.ndarray
    class_label: str
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]
    origin: str = "real"  # real | generated

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.mask is None:
            self.mask = np.ones_like(self.pixels)
        self.mask = np.asarray(self.mask, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError("patch pixels must be rank-2 grayscale")
        if self.mask.shape != self.pixels.shape:
            raise ValueError("mask and pixels must share a shape")
        if np.any(self.mask < 0.0) or np.any(self.mask > 1.0):
            raise ValueError("mask values must lie in [0, 1]")
        if self.origin not in ("real", "generated"):
            raise ValueError(f"unknown origin {self.origin!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]


def _erode4(binary: np.ndarray) -> np.ndarray:
    """Binary erosion with a 4-neighborhood; outside the array counts as background."""
    padded = np.pad(binary, 1, constant_values=False)
    return (
        binary
        & padded[:-2, 1:-1]
        & padded[2:, 1:-1]
        & padded[1:-1, :-2]
        & padded[1:-1, 2:]
    )


def feather_mask(binary: np.ndarray, width: int = 3) -> np.ndarray:
    """Linear alpha ramp of the given width along the foreground boundary.

    Pixels at interior depth d (in erosion steps) get alpha min(d, width)/width,
    so the outermost foreground ring gets 1/width and depth >= width gets 1.
    """
    binary = np.asarray(binary, dtype=bool)
    levels = binary.astype(np.float64)
    current = binary
    for _ in range(width - 1):
        current = _erode4(current)
        levels += current
    return levels / float(width)


def otsu_threshold(pixels: np.ndarray) -> float:
    """Otsu's split on a 256-bin histogram of [0,1] values."""
    vals = np.clip(np.asarray(pixels, dtype=np.float64).ravel(), 0.0, 1.0)
    hist, edges = np.histogram(vals, bins=256, range=(0.0, 1.0))
    total = vals.size
    prob = hist / total
    centers = (edges[:-1] + edges[1:]) / 2.0
    w0 = np.cumsum(prob)
    mu = np.cumsum(prob * centers)
    mu_total = mu[-1]
    w1 = 1.0 - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu_total * w0 - mu) ** 2 / (w0 * w1)
    between[~np.isfinite(between)] = -1.0
    return float(centers[int(np.argmax(between))])


def mask_from_intensity(pixels: np.ndarray, feather_width: int = 3) -> np.ndarray:
    """Alpha mask for a generated patch: Otsu split, minority side, feathered.

    The defect is taken to be the smaller side of the split (a blob on a
    mostly uniform background); when the split degenerates the mask falls
    back to full opacity.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    thr = otsu_threshold(pixels)
    above = pixels > thr
    n_above = int(above.sum())
    if n_above == 0 or n_above == above.size:
        return np.ones_like(pixels)
    foreground = above if n_above * 2 <= above.size else ~above
    return feather_mask(foreground, feather_width)


def _box_ring_mask(crop_h: int, crop_w: int, box_r0: int, box_c0: int,
                   box_h: int, box_w: int, pad: int) -> np.ndarray:
    """Alpha 1 on the box, linear falloff over the pad ring around it."""
    rows = np.arange(crop_h)[:, None]
    cols = np.arange(crop_w)[None, :]
    dr = np.maximum(np.maximum(box_r0 - rows, rows - (box_r0 + box_h - 1)), 0)
    dc = np.maximum(np.maximum(box_c0 - cols, cols - (box_c0 + box_w - 1)), 0)
    dist = np.maximum(dr, dc).astype(np.float64)
    return np.clip(1.0 - dist / (pad + 1.0), 0.0, 1.0)


def extract_patches(image: AnnotatedImage, pixels: np.ndarray, pad: int = 0) -> list[DefectPatch]:
    """One patch per ground-truth box; the crop is exact, the mask is full
    opacity on the box and feathers linearly across the pad ring."""
    if pad < 0:
        raise ValueError("pad must be >= 0")
    pixels = np.asarray(pixels, dtype=np.float64)
    h, w = pixels.shape
    patches = []
    for ann in image.annotations:
        b = ann.box
        if b.x2 > w or b.y2 > h:
            raise BoxOutOfBoundsError(
                f"image {image.id}: box {b.as_list()} exceeds pixel array {w}x{h}"
            )
        r0 = max(0, b.y - pad)
        c0 = max(0, b.x - pad)
        r1 = min(h, b.y2 + pad)
        c1 = min(w, b.x2 + pad)
        crop = pixels[r0:r1, c0:c1].copy()
        if pad == 0:
            mask = np.ones_like(crop)
        else:
            mask = _box_ring_mask(r1 - r0, c1 - c0, b.y - r0, b.x - c0, b.h, b.w, pad)
        patches.append(DefectPatch(crop, ann.class_label, mask, origin="real"))
    return patches
