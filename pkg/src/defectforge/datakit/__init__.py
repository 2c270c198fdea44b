"""Dataset model, annotation formats, imbalance and fold construction."""

from .formats import (
    EmptyMaskError,
    export_coco,
    import_coco,
    import_voc,
    load_canonical,
    save_canonical,
    seg_to_bbox,
)
from .manifest import AnnotatedImage, Annotation, BoundingBox, DatasetManifest
from .splits import DropTooLargeError, TooFewImagesError, kfold_split, make_imbalanced

__all__ = [
    "AnnotatedImage",
    "Annotation",
    "BoundingBox",
    "DatasetManifest",
    "DropTooLargeError",
    "EmptyMaskError",
    "TooFewImagesError",
    "export_coco",
    "import_coco",
    "import_voc",
    "kfold_split",
    "load_canonical",
    "make_imbalanced",
    "save_canonical",
    "seg_to_bbox",
]
