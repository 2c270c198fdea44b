"""Alpha compositing of patches onto beds."""

from __future__ import annotations

import numpy as np

from .allocate import ImageBed, Placement
from .patches import DefectPatch


def blend_into(pixels: np.ndarray, patch: DefectPatch, placement: Placement) -> None:
    """Composite the patch over the box region in place: mask*patch + (1-mask)*bed."""
    h, w = patch.shape
    y, x = placement.y, placement.x
    if y < 0 or x < 0 or y + h > pixels.shape[0] or x + w > pixels.shape[1]:
        raise ValueError(f"placement {placement} lies outside the bed {pixels.shape}")
    if (placement.box.w, placement.box.h) != (w, h):
        raise ValueError("placement box extents must equal the patch extents")
    region = pixels[y : y + h, x : x + w]
    pixels[y : y + h, x : x + w] = patch.mask * patch.pixels + (1.0 - patch.mask) * region


def blend(bed: ImageBed, patch: DefectPatch, placement: Placement) -> np.ndarray:
    """Composited copy of the bed; the bed itself is never modified."""
    out = bed.pixels.copy()
    blend_into(out, patch, placement)
    return out
