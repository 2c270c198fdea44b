"""defectforge: desk-scale rare-defect synthesis, augmentation, and detection scoring."""

__version__ = "0.1.0"
