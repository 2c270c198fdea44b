"""Dataset model: boxes, annotated images, and the canonical manifest."""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..imaging import load_gray


@dataclass(frozen=True)
class BoundingBox:
    """Integer pixel box, top-left origin; covers columns [x, x+w) and rows [y, y+h)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box extents must be >= 1, got w={self.w} h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box origin must be >= 0, got x={self.x} y={self.y}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_list(cls, vals) -> "BoundingBox":
        x, y, w, h = (int(v) for v in vals)
        return cls(x, y, w, h)


@dataclass(frozen=True)
class Annotation:
    class_label: str
    box: BoundingBox


@dataclass
class AnnotatedImage:
    id: int
    file: str
    width: int
    height: int
    annotations: list[Annotation] = field(default_factory=list)

    def validate(self) -> None:
        for ann in self.annotations:
            b = ann.box
            if b.x2 > self.width or b.y2 > self.height:
                raise ValueError(
                    f"image {self.id}: box {b.as_list()} exceeds {self.width}x{self.height}"
                )

    def class_labels(self) -> set[str]:
        return {a.class_label for a in self.annotations}


@dataclass
class DatasetManifest:
    """Images plus the class list; image file paths are relative to base_dir."""

    classes: list[str]
    images: list[AnnotatedImage] = field(default_factory=list)
    provenance: list[dict] = field(default_factory=list)
    base_dir: str = "."

    def validate(self) -> None:
        ids = [img.id for img in self.images]
        if len(set(ids)) != len(ids):
            raise ValueError("image ids must be unique")
        known = set(self.classes)
        for img in self.images:
            img.validate()
            for ann in img.annotations:
                if ann.class_label not in known:
                    raise ValueError(f"image {img.id}: unknown class {ann.class_label!r}")

    def annotation_counts(self) -> dict[str, int]:
        counts = Counter(a.class_label for img in self.images for a in img.annotations)
        return {c: counts.get(c, 0) for c in self.classes}

    def images_with_class(self, class_label: str) -> list[AnnotatedImage]:
        return [img for img in self.images if class_label in img.class_labels()]

    def image_path(self, image: AnnotatedImage) -> str:
        return os.path.normpath(os.path.join(self.base_dir, image.file))

    def load_pixels(self, image: AnnotatedImage) -> np.ndarray:
        return load_gray(self.image_path(image))

    def next_image_id(self) -> int:
        return max((img.id for img in self.images), default=-1) + 1

    def copy_shallow(self) -> "DatasetManifest":
        """New manifest object that shares the (immutable-by-convention) images."""
        return DatasetManifest(
            classes=list(self.classes),
            images=list(self.images),
            provenance=[dict(p) for p in self.provenance],
            base_dir=self.base_dir,
        )

    def rebase(self, new_dir: str) -> "DatasetManifest":
        """Rewrite image paths relative to a different manifest directory."""
        new_dir = os.path.abspath(new_dir)
        rebased = []
        for img in self.images:
            abs_path = os.path.abspath(self.image_path(img))
            rebased.append(
                AnnotatedImage(
                    id=img.id,
                    file=os.path.relpath(abs_path, new_dir),
                    width=img.width,
                    height=img.height,
                    annotations=list(img.annotations),
                )
            )
        return DatasetManifest(
            classes=list(self.classes),
            images=rebased,
            provenance=[dict(p) for p in self.provenance],
            base_dir=new_dir,
        )
