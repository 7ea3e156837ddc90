"""Patch-based segmentation of the carotid intima-media complex in B-mode
ultrasound: far-wall localization, IMC contour extraction, thickness
measurement, evaluation tooling, and a review service."""

from ._version import __version__
from .errors import CaroSegError
from .geometry import Contour
from .imaging import RegionOfInterest, UltrasoundImage
from .pipeline import PipelineConfig, SegmentationResult, run

__all__ = [
    "__version__",
    "CaroSegError",
    "Contour",
    "RegionOfInterest",
    "UltrasoundImage",
    "PipelineConfig",
    "SegmentationResult",
    "run",
]
