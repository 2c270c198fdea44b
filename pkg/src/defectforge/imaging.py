"""8-bit grayscale PNG reading and writing for [0,1] float images."""

from __future__ import annotations

import numpy as np
from PIL import Image


def load_gray(path) -> np.ndarray:
    """Read a grayscale PNG as float64 values in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float64)
    return arr / 255.0


def save_gray(path, pixels: np.ndarray) -> None:
    """Write [0,1] float pixels as an 8-bit grayscale PNG (values are clamped)."""
    arr = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0)
    data = np.rint(arr * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def quantized(pixels: np.ndarray) -> np.ndarray:
    """The [0,1] values a save/load round-trip would produce."""
    arr = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0)
    return np.rint(arr * 255.0) / 255.0
