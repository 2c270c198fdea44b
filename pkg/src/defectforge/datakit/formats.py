"""Canonical manifest I/O plus VOC import and COCO import/export adapters."""

from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET

import numpy as np

from ..errors import ParseError
from .manifest import AnnotatedImage, Annotation, BoundingBox, DatasetManifest


class EmptyMaskError(ValueError):
    """A segmentation mask with no foreground pixels has no box."""


def seg_to_bbox(mask: np.ndarray) -> BoundingBox:
    """Tight axis-aligned box around the foreground of a binary mask."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError("mask must be rank-2")
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    y0, y1 = int(rows[0]), int(rows[-1])
    x0, x1 = int(cols[0]), int(cols[-1])
    return BoundingBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


# ---------------------------------------------------------------------------
# canonical format


def save_canonical(manifest: DatasetManifest, path) -> None:
    doc = {
        "classes": list(manifest.classes),
        "images": [
            {"id": img.id, "file": img.file, "width": img.width, "height": img.height}
            for img in manifest.images
        ],
        "annotations": [
            {"image_id": img.id, "class": a.class_label, "bbox": a.box.as_list()}
            for img in manifest.images
            for a in img.annotations
        ],
    }
    if manifest.provenance:
        doc["provenance"] = manifest.provenance
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_canonical(path) -> DatasetManifest:
    doc = _load_json(path)
    try:
        images = {
            int(rec["id"]): AnnotatedImage(
                id=int(rec["id"]),
                file=str(rec["file"]),
                width=int(rec["width"]),
                height=int(rec["height"]),
            )
            for rec in doc["images"]
        }
        for rec in doc.get("annotations", []):
            img = images[int(rec["image_id"])]
            img.annotations.append(
                Annotation(str(rec["class"]), BoundingBox.from_list(rec["bbox"]))
            )
        manifest = DatasetManifest(
            classes=[str(c) for c in doc["classes"]],
            images=list(images.values()),
            provenance=list(doc.get("provenance", [])),
            base_dir=os.path.dirname(os.path.abspath(path)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed canonical manifest: {exc}") from exc
    manifest.validate()
    return manifest


# ---------------------------------------------------------------------------
# COCO adapter


def export_coco(manifest: DatasetManifest, path) -> None:
    categories = [{"id": i + 1, "name": c} for i, c in enumerate(manifest.classes)]
    cat_ids = {c: i + 1 for i, c in enumerate(manifest.classes)}
    images = [
        {"id": img.id, "file_name": img.file, "width": img.width, "height": img.height}
        for img in manifest.images
    ]
    annotations = []
    for img in manifest.images:
        for a in img.annotations:
            annotations.append(
                {
                    "id": len(annotations) + 1,
                    "image_id": img.id,
                    "category_id": cat_ids[a.class_label],
                    "bbox": [float(v) for v in a.box.as_list()],
                    "area": float(a.box.area),
                    "iscrowd": 0,
                }
            )
    doc = {"images": images, "annotations": annotations, "categories": categories}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def import_coco(path) -> DatasetManifest:
    doc = _load_json(path)
    try:
        cats = sorted(doc["categories"], key=lambda c: int(c["id"]))
        names = {int(c["id"]): str(c["name"]) for c in cats}
        images = {
            int(rec["id"]): AnnotatedImage(
                id=int(rec["id"]),
                file=str(rec["file_name"]),
                width=int(rec["width"]),
                height=int(rec["height"]),
            )
            for rec in doc["images"]
        }
        for rec in doc.get("annotations", []):
            img = images[int(rec["image_id"])]
            img.annotations.append(
                Annotation(names[int(rec["category_id"])], BoundingBox.from_list(rec["bbox"]))
            )
        manifest = DatasetManifest(
            classes=[str(c["name"]) for c in cats],
            images=list(images.values()),
            base_dir=os.path.dirname(os.path.abspath(path)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed COCO file: {exc}") from exc
    manifest.validate()
    return manifest


# ---------------------------------------------------------------------------
# VOC adapter (import only; boxes use the inclusive xmax/ymax convention)


def _voc_int(node, tag: str, path) -> int:
    child = node.find(tag)
    if child is None or child.text is None:
        raise ParseError(f"{path}: missing <{tag}>")
    return int(round(float(child.text)))


def import_voc(xml_dir) -> DatasetManifest:
    """Read every .xml file in a directory of VOC-style annotations."""
    files = sorted(f for f in os.listdir(xml_dir) if f.endswith(".xml"))
    images: list[AnnotatedImage] = []
    classes: set[str] = set()
    for idx, fname in enumerate(files):
        path = os.path.join(xml_dir, fname)
        try:
            root = ET.parse(path).getroot()
        except ET.ParseError as exc:
            line, col = exc.position
            raise ParseError(f"{path}: line {line} column {col}: {exc.msg}") from exc
        filename_node = root.find("filename")
        if filename_node is None or not filename_node.text:
            raise ParseError(f"{path}: missing <filename>")
        size = root.find("size")
        if size is None:
            raise ParseError(f"{path}: missing <size>")
        img = AnnotatedImage(
            id=idx,
            file=filename_node.text,
            width=_voc_int(size, "width", path),
            height=_voc_int(size, "height", path),
        )
        for obj in root.findall("object"):
            name_node = obj.find("name")
            if name_node is None or not name_node.text:
                raise ParseError(f"{path}: <object> missing <name>")
            box_node = obj.find("bndbox")
            if box_node is None:
                raise ParseError(f"{path}: <object> missing <bndbox>")
            xmin = _voc_int(box_node, "xmin", path)
            ymin = _voc_int(box_node, "ymin", path)
            xmax = _voc_int(box_node, "xmax", path)
            ymax = _voc_int(box_node, "ymax", path)
            # VOC xmax/ymax are inclusive pixel indices
            box = BoundingBox(xmin, ymin, xmax - xmin + 1, ymax - ymin + 1)
            img.annotations.append(Annotation(name_node.text, box))
            classes.add(name_node.text)
        images.append(img)
    manifest = DatasetManifest(
        classes=sorted(classes), images=images, base_dir=os.path.abspath(xml_dir)
    )
    manifest.validate()
    return manifest
