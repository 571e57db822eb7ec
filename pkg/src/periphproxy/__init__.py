"""Peripheral proxy generation toolkit.

Converts a gazed-at image region into a color-enhanced proxy that is
maximally distinguishable from a reference region, plus gaze analytics
and a human-in-the-loop parameter calibration service.
"""

from periphproxy.colorspace import LabColor, RgbColor, HsvColor, ciede2000
from periphproxy.regions import RasterRegion, Detection
from periphproxy.quantizer import Palette, QuantizedRegion, quantize
from periphproxy.enhancer import EnhancementParams, generate_proxy

__all__ = [
    "LabColor",
    "RgbColor",
    "HsvColor",
    "ciede2000",
    "RasterRegion",
    "Detection",
    "Palette",
    "QuantizedRegion",
    "quantize",
    "EnhancementParams",
    "generate_proxy",
]
