"""Whole-sample synthesis and augmented-dataset construction.

Every output image draws from an RNG stream derived from (seed, image
index), so serial and parallel builds produce identical datasets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..datakit.manifest import AnnotatedImage, Annotation, BoundingBox, DatasetManifest
from ..imaging import save_gray
from ..ndgrad import paused, tensor
from ..rng import rng_for
from .allocate import AllocationPolicy, ImageBed, Placement, allocate, place_boxes
from .blend import blend_into
from .patches import DefectPatch, extract_patches, mask_from_intensity


class NoBedsError(ValueError):
    """No defect-free images are available to serve as beds."""


@dataclass
class SyntheticSample:
    """One synthesized image: blended pixels plus exact annotations."""

    pixels: np.ndarray
    annotations: list[tuple[str, BoundingBox]]
    bed_source: str
    placements: list[Placement]
    patch_origins: list[str]


def synthesize_sample(
    beds: list[ImageBed],
    patch_pool: list[DefectPatch],
    policy: AllocationPolicy,
    seed,
) -> SyntheticSample:
    """Pick a bed, allocate patches from the pool, blend, annotate."""
    if not beds:
        raise NoBedsError("bed pool is empty")
    if not patch_pool:
        raise ValueError("patch pool is empty")
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(int(seed), "augment/sample")
    bed = beds[int(rng.integers(0, len(beds)))]
    placements = allocate(bed, patch_pool, policy, rng)
    pixels = bed.pixels.copy()
    annotations = []
    origins = []
    for pl in placements:
        patch = patch_pool[pl.patch_index]
        blend_into(pixels, patch, pl)
        annotations.append((patch.class_label, pl.box))
        origins.append(patch.origin)
    return SyntheticSample(pixels, annotations, bed.source_id, placements, origins)


def _compose(bed: ImageBed, picks: list[tuple[DefectPatch, str]], policy, rng) -> SyntheticSample:
    shapes = [p.shape for p, _ in picks]
    positions = place_boxes(bed.shape, shapes, policy, rng)
    pixels = bed.pixels.copy()
    annotations = []
    placements = []
    origins = []
    for i, ((patch, origin), (x, y)) in enumerate(zip(picks, positions)):
        pl = Placement(i, x, y, BoundingBox(x, y, patch.shape[1], patch.shape[0]))
        blend_into(pixels, patch, pl)
        placements.append(pl)
        annotations.append((patch.class_label, pl.box))
        origins.append(origin)
    return SyntheticSample(pixels, annotations, bed.source_id, placements, origins)


@dataclass
class PatchSources:
    """Per-class real patch pools and generator models for synthetic draws."""

    real: dict[str, list[DefectPatch]] = field(default_factory=dict)
    models: dict = field(default_factory=dict)  # class label -> GeneratorNet

    def classes(self) -> list[str]:
        return sorted(set(self.real) | set(self.models))


def collect_real_patches(ds: DatasetManifest, pad: int = 0) -> dict[str, list[DefectPatch]]:
    """Extract every annotated defect in the dataset, grouped by class."""
    pools: dict[str, list[DefectPatch]] = {}
    for img in ds.images:
        if not img.annotations:
            continue
        pixels = ds.load_pixels(img)
        for patch in extract_patches(img, pixels, pad):
            pools.setdefault(patch.class_label, []).append(patch)
    return pools


def collect_beds(ds: DatasetManifest) -> list[ImageBed]:
    """Annotation-free images in the dataset are the defect-free beds."""
    beds = []
    for img in ds.images:
        if img.annotations:
            continue
        beds.append(ImageBed(ds.load_pixels(img), source_id=img.file))
    return beds


def _draw_patch(
    sources: PatchSources,
    class_label: str,
    mix: float,
    rng: np.random.Generator,
    feather_width: int = 3,
) -> tuple[DefectPatch, str]:
    pool = sources.real.get(class_label, [])
    model = sources.models.get(class_label)
    use_real = bool(pool) and (model is None or rng.uniform() < mix)
    if use_real:
        return pool[int(rng.integers(0, len(pool)))], "real"
    if model is None:
        raise ValueError(f"no patch source for class {class_label!r}")
    z = rng.standard_normal((1, model.z_dim))
    with paused():
        flat = model.forward(tensor(z)).data[0]
    h, w = model.patch_shape
    pixels = np.clip(flat.reshape(h, w), 0.0, 1.0)
    patch = DefectPatch(
        pixels,
        class_label=class_label,
        mask=mask_from_intensity(pixels, feather_width),
        origin="generated",
    )
    return patch, "generated"


def build_augmented_dataset(
    real: DatasetManifest,
    gen_models: dict,
    m_g: int,
    mix: float,
    policy: AllocationPolicy,
    seed: int,
    out_dir: str,
    class_weights: dict[str, float] | None = None,
    beds: list[ImageBed] | None = None,
    pad: int = 0,
    file_prefix: str = "aug",
) -> DatasetManifest:
    """Append m_g synthetic annotated images to the dataset.

    `mix` is the probability that a placed defect is a real extracted patch
    rather than a generated one (applied per placement, when both sources
    exist for the class).  Beds default to the dataset's annotation-free
    images.  Synthetic images are written to out_dir as PNGs and the
    returned manifest is rebased there, with per-image provenance recorded.
    """
    if m_g < 0:
        raise ValueError("m_g must be >= 0")
    if not (0.0 <= mix <= 1.0):
        raise ValueError("mix must lie in [0, 1]")
    os.makedirs(out_dir, exist_ok=True)
    out = real.rebase(out_dir)
    if m_g == 0:
        return out

    sources = PatchSources(real=collect_real_patches(real, pad), models=dict(gen_models))
    bed_pool = beds if beds is not None else collect_beds(real)
    if not bed_pool:
        raise NoBedsError("dataset has no annotation-free images and no beds were given")
    classes = [c for c in sources.classes()]
    if not classes:
        raise ValueError("no patch sources: dataset has no annotations and no models given")
    if class_weights is None:
        weights = np.full(len(classes), 1.0 / len(classes))
    else:
        weights = np.array([float(class_weights.get(c, 0.0)) for c in classes])
        if weights.sum() <= 0:
            raise ValueError("class_weights assign no mass to any available class")
        weights = weights / weights.sum()

    next_id = out.next_image_id()
    lo, hi = policy.defects_per_bed
    width = len(str(max(m_g, 1)))
    for i in range(m_g):
        rng = rng_for(seed, f"augment/image/{i}")
        bed = bed_pool[int(rng.integers(0, len(bed_pool)))]
        k = int(rng.integers(lo, hi + 1))
        picks = []
        for _ in range(k):
            label = classes[int(rng.choice(len(classes), p=weights))]
            picks.append(_draw_patch(sources, label, mix, rng))
        sample = _compose(bed, picks, policy, rng)

        fname = f"{file_prefix}_{i:0{width}d}.png"
        save_gray(os.path.join(out_dir, fname), sample.pixels)
        image_id = next_id + i
        img = AnnotatedImage(
            id=image_id,
            file=fname,
            width=sample.pixels.shape[1],
            height=sample.pixels.shape[0],
            annotations=[Annotation(lbl, box) for lbl, box in sample.annotations],
        )
        out.images.append(img)
        out.provenance.append(
            {
                "image_id": image_id,
                "file": fname,
                "bed_source": sample.bed_source,
                "seed": int(seed),
                "stream": f"augment/image/{i}",
                "patches": [
                    {"class": lbl, "origin": origin, "bbox": box.as_list()}
                    for (lbl, box), origin in zip(sample.annotations, sample.patch_origins)
                ],
            }
        )
    out.validate()
    return out
