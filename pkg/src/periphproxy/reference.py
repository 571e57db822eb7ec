"""Reference-image selection for proxy generation.

Strategy "screenshot" uses a localized crop of the target's
surroundings; strategy "msc" (most similar color) picks the neighboring
detection with the smallest CIEDE2000 distance to the target. Neighbor
discovery expands the target bounding box into a 2D box collider.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from periphproxy.colorspace import ciede2000
from periphproxy.quantizer import DEFAULT_K, DEFAULT_SEED, palette_mean_lab, quantize
from periphproxy.regions import Detection, RasterRegion

DEFAULT_MARGIN_FACTOR = 3.0
DEFAULT_EXPANSION_FACTOR = 0.5

STRATEGY_SCREENSHOT = "screenshot"
STRATEGY_MSC = "msc"
STRATEGY_BASELINE = "baseline"


class NoNeighbors(ValueError):
    """Raised when MSC reference selection has no neighbors to pick from."""


@dataclass
class ReferenceChoice:
    """A chosen reference region and how it was chosen."""

    strategy: str
    region: RasterRegion | None
    source_id: str | None = None
    distance: float | None = None


def screenshot_reference(
    frame: np.ndarray,
    target: Detection,
    margin_factor: float = DEFAULT_MARGIN_FACTOR,
) -> RasterRegion:
    """Crop centered on the target, sized margin_factor x max(bbox dims).

    The crop's mask excludes the target's own pixels: the reference
    should represent the surroundings, not the target itself.
    """
    fh, fw = frame.shape[:2]
    x, y, w, h = target.bbox
    cx, cy = x + w / 2.0, y + h / 2.0
    half = margin_factor * max(w, h) / 2.0

    x0 = max(0, int(round(cx - half)))
    x1 = min(fw, int(round(cx + half)))
    y0 = max(0, int(round(cy - half)))
    y1 = min(fh, int(round(cy + half)))

    mask = ~target.mask[y0:y1, x0:x1]
    return RasterRegion(frame[y0:y1, x0:x1], mask)


def _expanded_bbox(
    bbox: tuple[int, int, int, int], factor: float, absolute: bool
) -> tuple[float, float, float, float]:
    x, y, w, h = bbox
    dx = factor if absolute else factor * w
    dy = factor if absolute else factor * h
    return (x - dx, y - dy, x + w + dx, y + h + dy)


def _intersects(
    box: tuple[float, float, float, float], bbox: tuple[int, int, int, int]
) -> bool:
    x, y, w, h = bbox
    return box[0] < x + w and x < box[2] and box[1] < y + h and y < box[3]


def find_neighbors(
    detections: list[Detection],
    target: Detection,
    expansion_factor: float = DEFAULT_EXPANSION_FACTOR,
    absolute: bool = False,
) -> list[Detection]:
    """Detections whose bbox intersects the target bbox expanded per side.

    Expansion is a fraction of the target bbox dimension per side, or
    absolute pixels when `absolute` is set.
    """
    collider = _expanded_bbox(target.bbox, expansion_factor, absolute)
    return [
        d for d in detections if d.id != target.id and _intersects(collider, d.bbox)
    ]


def msc_reference(
    frame: np.ndarray,
    target: Detection,
    neighbors: list[Detection],
    k: int = DEFAULT_K,
    seed: int = DEFAULT_SEED,
) -> ReferenceChoice:
    """Pick the neighbor whose mean palette color is closest to the target's.

    Object color is the palette-weighted mean Lab of the K-color
    quantization; distances use CIEDE2000. Ties break by lower id.
    """
    if not neighbors:
        raise NoNeighbors("no neighboring detections")

    target_mean = palette_mean_lab(quantize(target.region(frame), k=k, seed=seed).palette)

    best: tuple[float, str] | None = None
    best_det: Detection | None = None
    for det in sorted(neighbors, key=lambda d: d.id):
        mean = palette_mean_lab(quantize(det.region(frame), k=k, seed=seed).palette)
        dist = ciede2000(target_mean, mean)
        if best is None or dist < best[0]:
            best = (dist, det.id)
            best_det = det
    assert best is not None and best_det is not None
    return ReferenceChoice(
        strategy=STRATEGY_MSC,
        region=best_det.region(frame),
        source_id=best_det.id,
        distance=best[0],
    )
