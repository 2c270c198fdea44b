"""Random placement of patches onto defect-free beds under overlap rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datakit.manifest import BoundingBox
from ..rng import rng_for
from .patches import DefectPatch


class PatchTooLargeError(ValueError):
    """A patch cannot fit inside the bed once margins are honored."""


class AllocationFailedError(RuntimeError):
    """Rejection sampling exhausted max_attempts; the bed is too crowded."""


@dataclass
class ImageBed:
    """A defect-free background image; carries no ground-truth boxes."""

    pixels: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError("bed pixels must be rank-2 grayscale")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class Placement:
    patch_index: int
    x: int
    y: int
    box: BoundingBox


@dataclass(frozen=True)
class AllocationPolicy:
    defects_per_bed: tuple[int, int] = (1, 3)
    max_iou: float | None = None  # None means strictly disjoint boxes
    max_attempts: int = 100
    margin: int = 0

    def __post_init__(self):
        lo, hi = self.defects_per_bed
        if lo < 0 or hi < lo:
            raise ValueError("defects_per_bed must be a non-empty inclusive range")
        if self.max_iou is not None and not (0.0 <= self.max_iou < 1.0):
            raise ValueError("max_iou must lie in [0, 1)")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")


def _pair_iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / float(a.area + b.area - inter)


def _admissible(box: BoundingBox, placed: list[BoundingBox], policy: AllocationPolicy) -> bool:
    if policy.max_iou is None:
        return all(_pair_iou(box, other) == 0.0 for other in placed)
    return all(_pair_iou(box, other) <= policy.max_iou for other in placed)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(int(seed), "augment/allocate")


def place_boxes(
    bed_shape: tuple[int, int],
    patch_shapes: list[tuple[int, int]],
    policy: AllocationPolicy,
    rng: np.random.Generator,
) -> list[tuple[int, int]]:
    """Rejection-sample a top-left position for each patch shape in order."""
    bed_h, bed_w = bed_shape
    positions: list[tuple[int, int]] = []
    placed: list[BoundingBox] = []
    for ph, pw in patch_shapes:
        max_x = bed_w - policy.margin - pw
        max_y = bed_h - policy.margin - ph
        if max_x < policy.margin or max_y < policy.margin:
            raise PatchTooLargeError(
                f"patch {pw}x{ph} cannot fit bed {bed_w}x{bed_h} with margin {policy.margin}"
            )
        for attempt in range(policy.max_attempts):
            x = int(rng.integers(policy.margin, max_x + 1))
            y = int(rng.integers(policy.margin, max_y + 1))
            box = BoundingBox(x, y, pw, ph)
            if _admissible(box, placed, policy):
                positions.append((x, y))
                placed.append(box)
                break
        else:
            raise AllocationFailedError(
                f"no admissible position after {policy.max_attempts} attempts"
            )
    return positions


def allocate(
    bed: ImageBed,
    patches: list[DefectPatch],
    policy: AllocationPolicy,
    seed,
) -> list[Placement]:
    """Draw a defect count, pick patches uniformly (with replacement), place them.

    Positions are uniform over the admissible area; the overlap rule is
    enforced by rejection sampling against the already-placed boxes.
    """
    if not patches:
        raise ValueError("patch pool is empty")
    rng = _as_rng(seed)
    lo, hi = policy.defects_per_bed
    k = int(rng.integers(lo, hi + 1))
    chosen = [int(i) for i in rng.integers(0, len(patches), size=k)]
    shapes = [patches[i].shape for i in chosen]
    positions = place_boxes(bed.shape, shapes, policy, rng)
    return [
        Placement(idx, x, y, BoundingBox(x, y, patches[idx].shape[1], patches[idx].shape[0]))
        for idx, (x, y) in zip(chosen, positions)
    ]
