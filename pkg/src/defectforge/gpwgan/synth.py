"""Sampling defect patches from a trained generator."""

from __future__ import annotations

import numpy as np

from ..augment.patches import DefectPatch, mask_from_intensity
from ..ndgrad import paused, tensor
from ..rng import rng_for
from .nets import GeneratorNet


def generate(gen: GeneratorNet, count: int, rng: np.random.Generator) -> np.ndarray:
    """Raw generator output for `count` noise draws, shape (count, out_dim)."""
    z = rng.standard_normal((count, gen.z_dim))
    with paused():
        return gen.forward(tensor(z)).data


def synthesize_patches(
    gen: GeneratorNet,
    count: int,
    seed: int,
    rescale: bool = False,
    feather_width: int = 3,
) -> list[DefectPatch]:
    """Generate patches carrying the generator's training class.

    Output pixels are clamped to [0, 1]; with `rescale` the intensity range
    is first stretched to span [0, 1] per patch.  Masks come from intensity
    thresholding with a feathered edge.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = rng_for(seed, "gpwgan/synthesize")
    h, w = gen.patch_shape
    flat = generate(gen, count, rng)
    patches = []
    for row in flat:
        pixels = row.reshape(h, w)
        if rescale:
            lo, hi = float(pixels.min()), float(pixels.max())
            if hi > lo:
                pixels = (pixels - lo) / (hi - lo)
        pixels = np.clip(pixels, 0.0, 1.0)
        patches.append(
            DefectPatch(
                pixels,
                class_label=gen.class_label,
                mask=mask_from_intensity(pixels, feather_width),
                origin="generated",
            )
        )
    return patches
