"""End-to-end orchestration: gaze decode, segmentation adapter, target
resolution, reference selection, proxy generation, and per-stage
profiling.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from periphproxy.enhancer import (
    EnhancementParams,
    ProxyResult,
    generate_proxy,
)
from periphproxy.quantizer import DEFAULT_K, DEFAULT_SEED, quantize
from periphproxy.reference import (
    STRATEGY_BASELINE,
    STRATEGY_MSC,
    STRATEGY_SCREENSHOT,
    NoNeighbors,
    ReferenceChoice,
    find_neighbors,
    msc_reference,
    screenshot_reference,
)
from periphproxy.regions import Detection, RasterRegion, load_detections

REDNESS_FLOOR = 0.2
REDNESS_CUT = 0.5  # keep pixels within this fraction of the max redness


class NoDotFound(ValueError):
    """Raised when a frame contains no plausible gaze dot."""


class NoTarget(ValueError):
    """Raised when the gaze pixel hits no detection mask."""


class BackendUnavailable(RuntimeError):
    """Raised when a segmentation backend cannot be reached."""


@dataclass
class StageTimings:
    """Per-stage pipeline durations in milliseconds."""

    durations_ms: dict[str, float] = field(default_factory=dict)

    @property
    def total_ms(self) -> float:
        return sum(self.durations_ms.values())

    def fractions(self) -> dict[str, float]:
        total = self.total_ms
        if total <= 0:
            return {name: 0.0 for name in self.durations_ms}
        return {name: d / total for name, d in self.durations_ms.items()}

    def to_json(self) -> dict:
        return {
            "durations_ms": self.durations_ms,
            "total_ms": self.total_ms,
            "fractions": self.fractions(),
        }


@dataclass
class PipelineResult:
    """ProxyResult plus reference choice and profiled stage timings."""

    proxy: ProxyResult
    reference: ReferenceChoice
    target_id: str
    timings: StageTimings


def decode_gaze_dot(frame: np.ndarray) -> tuple[float, float]:
    """Locate the gaze dot: intensity-weighted centroid of the reddest pixels.

    Redness is R - max(G, B) per pixel in [0, 1]; pixels within half of
    the maximum redness contribute. Raises NoDotFound when the frame has
    no sufficiently red content.
    """
    rgb = np.asarray(frame, dtype=np.float64) / 255.0
    redness = rgb[..., 0] - np.maximum(rgb[..., 1], rgb[..., 2])
    peak = float(redness.max())
    if peak < REDNESS_FLOOR:
        raise NoDotFound(f"max redness {peak:.3f} below {REDNESS_FLOOR}")
    ys, xs = np.nonzero(redness >= REDNESS_CUT * peak)
    weights = redness[ys, xs]
    total = weights.sum()
    return (float((xs * weights).sum() / total), float((ys * weights).sum() / total))


def resolve_target(
    detections: list[Detection], gaze_px: tuple[float, float]
) -> Detection | None:
    """Detection whose mask contains the gaze pixel; smallest area wins."""
    x, y = int(round(gaze_px[0])), int(round(gaze_px[1]))
    hits = []
    for det in detections:
        h, w = det.mask.shape
        if 0 <= y < h and 0 <= x < w and det.mask[y, x]:
            hits.append(det)
    if not hits:
        return None
    return min(hits, key=lambda d: (d.area, d.id))


class FileStubSegmenter:
    """Segmentation adapter backed by a detections JSON sidecar."""

    def __init__(self, detections: list[Detection] | str | Path):
        if isinstance(detections, (str, Path)):
            detections = load_detections(detections)
        self._detections = detections

    def segment(self, frame: np.ndarray) -> list[Detection]:
        return self._detections


class RemoteSegmenter:
    """Segmentation adapter speaking HTTP to a model server.

    POSTs the frame as PNG to {base_url}/segment and expects the
    detections JSON sidecar format in response.
    """

    def __init__(self, base_url: str, timeout_s: float = 5.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def segment(self, frame: np.ndarray) -> list[Detection]:
        import io

        import httpx
        from PIL import Image

        from periphproxy.regions import detection_from_json

        buf = io.BytesIO()
        Image.fromarray(np.asarray(frame, dtype=np.uint8)).save(buf, format="PNG")
        try:
            resp = httpx.post(
                f"{self.base_url}/segment",
                files={"frame": ("frame.png", buf.getvalue(), "image/png")},
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
        except httpx.TimeoutException as exc:
            raise TimeoutError(f"segmentation backend timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise BackendUnavailable(str(exc)) from exc
        return [detection_from_json(obj) for obj in resp.json()]


def run_pipeline(
    frame: np.ndarray,
    gaze_px: tuple[float, float] | None,
    segmenter,
    strategy: str = STRATEGY_MSC,
    params: EnhancementParams | None = None,
    seed: int = DEFAULT_SEED,
    k: int = DEFAULT_K,
    expansion_factor: float = 0.5,
    margin_factor: float = 3.0,
) -> PipelineResult:
    """Run the full frame-to-proxy pipeline with per-stage profiling.

    gaze_px=None decodes the gaze dot from the frame. Under the MSC
    strategy, a target with no neighbors yields a skipped
    (quantization-only) proxy with reason NoNeighbors.
    """
    params = params or EnhancementParams()
    timings = StageTimings()

    t0 = time.perf_counter()
    detections = segmenter.segment(frame)
    timings.durations_ms["segmentation"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    if gaze_px is None:
        gaze_px = decode_gaze_dot(frame)
    target = resolve_target(detections, gaze_px)
    timings.durations_ms["target_resolution"] = (time.perf_counter() - t0) * 1000.0
    if target is None:
        raise NoTarget(f"gaze {gaze_px} hits no detection mask")

    t0 = time.perf_counter()
    neighbors = find_neighbors(detections, target, expansion_factor)
    timings.durations_ms["neighbor_search"] = (time.perf_counter() - t0) * 1000.0

    reference: ReferenceChoice
    t0 = time.perf_counter()
    if strategy == STRATEGY_MSC:
        try:
            reference = msc_reference(frame, target, neighbors, k=k, seed=seed)
        except NoNeighbors:
            reference = ReferenceChoice(strategy=STRATEGY_MSC, region=None)
    elif strategy == STRATEGY_SCREENSHOT:
        reference = ReferenceChoice(
            strategy=STRATEGY_SCREENSHOT,
            region=screenshot_reference(frame, target, margin_factor),
        )
    elif strategy == STRATEGY_BASELINE:
        reference = ReferenceChoice(strategy=STRATEGY_BASELINE, region=None)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    timings.durations_ms["msc_selection"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    target_region = target.region(frame)
    if reference.region is None:
        qt = quantize(target_region, k=k, seed=seed)
        reason = "NoNeighbors" if strategy == STRATEGY_MSC else "BaselineNone"
        from periphproxy.enhancer import PaletteDistances

        proxy = ProxyResult(
            proxy=RasterRegion(qt.raster, qt.mask),
            skipped=True,
            skip_reason=reason,
            target_palette=qt.palette,
            reference_palette=qt.palette,
            distances=PaletteDistances(0.0, 0.0, 0.0, 0.5),
        )
    else:
        proxy = generate_proxy(
            target_region, reference.region, params=params, seed=seed, k=k
        )
    timings.durations_ms["quantize_enhance"] = (time.perf_counter() - t0) * 1000.0

    proxy.reference_id = reference.source_id
    return PipelineResult(
        proxy=proxy, reference=reference, target_id=target.id, timings=timings
    )
