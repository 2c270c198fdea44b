"""Imbalance construction and stratified cross-validation splitting."""

from __future__ import annotations

import numpy as np

from ..rng import rng_for
from .manifest import AnnotatedImage, DatasetManifest


class DropTooLargeError(ValueError):
    """More images requested for removal than the class provides."""


class TooFewImagesError(ValueError):
    """The dataset has fewer images than requested folds."""


def make_imbalanced(
    ds: DatasetManifest, class_label: str, drop_count: int, seed: int
) -> DatasetManifest:
    """Uniformly remove whole images containing the class; others untouched.

    Surviving images are the original objects, so their annotations stay
    byte-identical.
    """
    if drop_count < 0:
        raise ValueError("drop_count must be >= 0")
    candidates = [img for img in ds.images if class_label in img.class_labels()]
    if drop_count > len(candidates):
        raise DropTooLargeError(
            f"cannot drop {drop_count} images; only {len(candidates)} contain {class_label!r}"
        )
    rng = rng_for(seed, f"datakit/imbalance/{class_label}")
    order = sorted(candidates, key=lambda img: img.id)
    dropped = {order[i].id for i in rng.choice(len(order), size=drop_count, replace=False)}
    kept = [img for img in ds.images if img.id not in dropped]
    return DatasetManifest(
        classes=list(ds.classes),
        images=kept,
        provenance=[dict(p) for p in ds.provenance],
        base_dir=ds.base_dir,
    )


def _stratum_key(img: AnnotatedImage) -> str:
    # stratify on the first annotation's class; bed images form their own stratum
    return img.annotations[0].class_label if img.annotations else ""


def kfold_split(
    ds: DatasetManifest, k: int, seed: int
) -> list[tuple[DatasetManifest, DatasetManifest]]:
    """k stratified (train, test) pairs; test folds partition the dataset."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(ds.images) < k:
        raise TooFewImagesError(f"{len(ds.images)} images cannot fill {k} folds")
    rng = rng_for(seed, "datakit/kfold")
    strata: dict[str, list[AnnotatedImage]] = {}
    for img in sorted(ds.images, key=lambda im: im.id):
        strata.setdefault(_stratum_key(img), []).append(img)

    fold_ids: list[set[int]] = [set() for _ in range(k)]
    for key in sorted(strata):
        members = strata[key]
        order = rng.permutation(len(members))
        for pos, idx in enumerate(order):
            fold_ids[pos % k].add(members[idx].id)

    pairs = []
    for f in range(k):
        test = [img for img in ds.images if img.id in fold_ids[f]]
        train = [img for img in ds.images if img.id not in fold_ids[f]]
        mk = lambda imgs: DatasetManifest(
            classes=list(ds.classes), images=imgs, base_dir=ds.base_dir
        )
        pairs.append((mk(train), mk(test)))
    return pairs
