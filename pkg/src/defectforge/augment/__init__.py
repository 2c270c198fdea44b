"""Patch extraction, allocation onto beds, blending, and dataset building."""

from .allocate import (
    AllocationFailedError,
    AllocationPolicy,
    ImageBed,
    PatchTooLargeError,
    Placement,
    allocate,
)
from .blend import blend, blend_into
from .dataset import (
    NoBedsError,
    PatchSources,
    SyntheticSample,
    build_augmented_dataset,
    collect_beds,
    collect_real_patches,
    synthesize_sample,
)
from .patches import (
    BoxOutOfBoundsError,
    DefectPatch,
    extract_patches,
    feather_mask,
    mask_from_intensity,
    otsu_threshold,
)

__all__ = [
    "AllocationFailedError",
    "AllocationPolicy",
    "BoxOutOfBoundsError",
    "DefectPatch",
    "ImageBed",
    "NoBedsError",
    "PatchSources",
    "PatchTooLargeError",
    "Placement",
    "SyntheticSample",
    "allocate",
    "blend",
    "blend_into",
    "build_augmented_dataset",
    "collect_beds",
    "collect_real_patches",
    "extract_patches",
    "feather_mask",
    "mask_from_intensity",
    "otsu_threshold",
    "synthesize_sample",
]
