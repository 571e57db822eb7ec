"""Palette-level distance analysis and masked color enhancement.

Stages: weighted centroid-pair distances, shared dominant color, boost
map, then the three masked channel adjustments (luminance in Lab,
saturation in HSV, chroma push in Lab) with optional gamma and CLAHE on
the L channel. Includes the skip rules and the end-to-end proxy
generator over a target/reference pair.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import cv2
import numpy as np

from periphproxy.colorspace import (
    LabColor,
    ciede2000,
    ciede2000_arrays,
    hsv_array_to_rgb,
    lab_array_to_rgb,
    rgb_array_to_hsv,
    rgb_array_to_lab,
)
from periphproxy.quantizer import (
    DEFAULT_K,
    DEFAULT_SEED,
    Palette,
    QuantizedRegion,
    quantize,
)
from periphproxy.regions import RasterRegion

SHARED_COLOR_OVERLAP_TAU = 25.0  # ΔE00 falloff for target-overlap scoring
CHROMA_EPS = 1e-6  # below this (a,b) offset norm, no push direction exists


class DimensionMismatch(ValueError):
    """Raised when a boost map does not match its target's shape."""


@dataclass
class EnhancementParams:
    """Tunable enhancement parameters plus pipeline tolerances.

    The three headline parameters default to the calibrated group-level
    75th-percentile values. gamma=1.0 disables gamma correction;
    clahe_clip<=0 disables CLAHE.
    """

    max_luminance: float = 2.125  # range [1, 8]
    max_sat_boost: float = 9.75  # range [1, 16]
    ab_push: float = 30.0  # range [0, 60]
    skip_delta_e: float = 5.0
    gamma: float = 0.9
    clahe_clip: float = 2.0
    clahe_tiles: int = 8
    boost_saturation_distance: float = 50.0
    boost_global_scale: float = 30.0

    def __post_init__(self) -> None:
        if self.max_luminance < 1:
            raise ValueError("max_luminance must be >= 1")
        if self.max_sat_boost < 1:
            raise ValueError("max_sat_boost must be >= 1")
        if self.ab_push < 0:
            raise ValueError("ab_push must be >= 0")
        if self.skip_delta_e < 0:
            raise ValueError("skip_delta_e must be >= 0")

    @property
    def gamma_enabled(self) -> bool:
        return self.gamma != 1.0

    @property
    def clahe_enabled(self) -> bool:
        return self.clahe_clip > 0

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "EnhancementParams":
        return cls(**obj)

    @classmethod
    def load(cls, path: str | Path) -> "EnhancementParams":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


@dataclass
class PaletteDistances:
    """Weighted perceptual distances between two palettes."""

    deltaE_total: float
    deltaL: float
    deltaC: float
    alpha: float


@dataclass
class BoostMap:
    """Per-pixel enhancement gain in [0, 1]; zero outside the mask."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)


@dataclass
class SkipDecision:
    skip: bool
    reason: str | None = None  # "DarkerTarget" | "BelowThreshold"


@dataclass
class ProxyResult:
    """Outcome of proxy generation: raster plus decision metadata."""

    proxy: RasterRegion
    skipped: bool
    skip_reason: str | None
    target_palette: Palette
    reference_palette: Palette
    distances: PaletteDistances
    timings_ms: dict[str, float] = field(default_factory=dict)
    reference_id: str | None = None
    burst_ms: int = 2000


def palette_distances(target: Palette, reference: Palette) -> PaletteDistances:
    """Full weighted double sum of CIEDE2000 / |ΔL| / |ΔC| over centroid pairs."""
    ct = target.centroid_array()
    cr = reference.centroid_array()
    ht = target.weight_array()
    hr = reference.weight_array()

    de = ciede2000_arrays(ct[:, None, :], cr[None, :, :])
    dl = np.abs(ct[:, None, 0] - cr[None, :, 0])
    chroma_t = np.hypot(ct[:, 1], ct[:, 2])
    chroma_r = np.hypot(cr[:, 1], cr[:, 2])
    dc = np.abs(chroma_t[:, None] - chroma_r[None, :])

    w = ht[:, None] * hr[None, :]
    delta_e = float(np.sum(w * de))
    delta_l = float(np.sum(w * dl))
    delta_c = float(np.sum(w * dc))
    denom = delta_l + delta_c
    alpha = delta_c / denom if denom > 0 else 0.5
    return PaletteDistances(delta_e, delta_l, delta_c, alpha)


def shared_dominant_color(target: Palette, reference: Palette) -> LabColor:
    """Pick the reference centroid that is also prominent in the target.

    score(j) = h_R(j) * sum_i h_T(i) * max(0, 1 - ΔE00(c_i^T, c_j^R)/tau).
    Ties break toward larger reference weight, then lower index.
    """
    ct = target.centroid_array()
    cr = reference.centroid_array()
    ht = target.weight_array()
    hr = reference.weight_array()

    de = ciede2000_arrays(ct[:, None, :], cr[None, :, :])
    overlap = np.clip(1.0 - de / SHARED_COLOR_OVERLAP_TAU, 0.0, None)
    scores = hr * (ht @ overlap)

    order = sorted(range(reference.k), key=lambda j: (-scores[j], -hr[j], j))
    return reference.centroids[order[0]]


def shared_dominant_index(target: Palette, reference: Palette) -> int:
    """Index variant of shared_dominant_color (used by the skip rule)."""
    shared = shared_dominant_color(target, reference)
    for j, c in enumerate(reference.centroids):
        if c == shared:
            return j
    raise AssertionError("shared color not in reference palette")


def boost_map(
    target: QuantizedRegion,
    shared: LabColor,
    distances: PaletteDistances,
    params: EnhancementParams,
) -> BoostMap:
    """Similarity to the shared color, scaled by the global distance.

    B = clamp01(max(0, 1 - ΔE00(pixel, shared)/D) * min(ΔE_total/ΔE_ref, 1)).
    """
    values = np.zeros(target.shape, dtype=np.float64)
    pixel_lab = target.masked_lab()
    de = ciede2000_arrays(pixel_lab, shared.as_array()[None, :])
    similarity = np.clip(1.0 - de / params.boost_saturation_distance, 0.0, None)
    global_scale = min(distances.deltaE_total / params.boost_global_scale, 1.0)
    values[target.mask] = np.clip(similarity * global_scale, 0.0, 1.0)
    return BoostMap(values)


def _apply_gamma(L: np.ndarray, gamma: float) -> np.ndarray:
    return 100.0 * (np.clip(L, 0.0, 100.0) / 100.0) ** gamma


def _apply_clahe(
    L: np.ndarray, mask: np.ndarray, clip: float, tiles: int
) -> np.ndarray:
    """CLAHE on the L channel over the masked bounding box."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return L
    y0, y1 = ys.min(), ys.max() + 1
    x0, x1 = xs.min(), xs.max() + 1
    box = L[y0:y1, x0:x1]
    scaled = np.clip(np.round(box / 100.0 * 255.0), 0, 255).astype(np.uint8)
    clahe = cv2.createCLAHE(clipLimit=clip, tileGridSize=(tiles, tiles))
    equalized = clahe.apply(scaled).astype(np.float64) / 255.0 * 100.0
    out = L.copy()
    boxmask = mask[y0:y1, x0:x1]
    out[y0:y1, x0:x1][boxmask] = equalized[boxmask]
    return out


def enhance(
    target: QuantizedRegion,
    boost: BoostMap,
    distances: PaletteDistances,
    ref_mean_ab: tuple[float, float],
    params: EnhancementParams,
) -> RasterRegion:
    """Apply the three masked channel adjustments to a quantized target.

    Order: luminance (Lab) -> gamma -> CLAHE(L) -> chroma push (Lab) ->
    saturation (HSV). Identity parameters with gamma/CLAHE disabled leave
    the raster bit-identical. Output is clamped in-gamut.
    """
    if boost.values.shape != target.shape:
        raise DimensionMismatch(
            f"boost shape {boost.values.shape} != target {target.shape}"
        )
    mask = target.mask
    b = boost.values[mask]
    alpha = distances.alpha
    any_boost = bool(np.any(b > 0))

    lum_active = params.max_luminance > 1 and alpha < 1 and any_boost
    push_active = params.ab_push > 0 and any_boost
    lab_active = (
        lum_active or push_active or params.gamma_enabled or params.clahe_enabled
    )
    sat_active = params.max_sat_boost > 1 and alpha > 0 and any_boost

    rgb = target.raster.astype(np.float64) / 255.0
    out = target.raster.copy()
    if not lab_active and not sat_active:
        return RasterRegion(out, mask.copy())

    masked_rgb = rgb[mask]
    if lab_active:
        lab = rgb_array_to_lab(masked_rgb)
        if lum_active:
            lab[:, 0] *= 1.0 + b * (params.max_luminance - 1.0) * (1.0 - alpha)
        lab[:, 0] = np.clip(lab[:, 0], 0.0, 100.0)
        if params.gamma_enabled:
            lab[:, 0] = _apply_gamma(lab[:, 0], params.gamma)
        if params.clahe_enabled:
            L_full = np.zeros(target.shape)
            L_full[mask] = lab[:, 0]
            L_full = _apply_clahe(
                L_full, mask, params.clahe_clip, params.clahe_tiles
            )
            lab[:, 0] = L_full[mask]
        if push_active:
            offset = lab[:, 1:] - np.asarray(ref_mean_ab, dtype=np.float64)
            norm = np.linalg.norm(offset, axis=1)
            pushable = norm >= CHROMA_EPS
            direction = np.zeros_like(offset)
            direction[pushable] = offset[pushable] / norm[pushable, None]
            lab[:, 1:] += (b * params.ab_push)[:, None] * direction
        masked_rgb = lab_array_to_rgb(lab)

    if sat_active:
        hsv = rgb_array_to_hsv(masked_rgb)
        hsv[:, 1] = np.clip(
            hsv[:, 1] * (1.0 + b * (params.max_sat_boost - 1.0) * alpha), 0.0, 1.0
        )
        masked_rgb = hsv_array_to_rgb(hsv)

    out[mask] = np.clip(np.round(masked_rgb * 255.0), 0, 255).astype(np.uint8)
    return RasterRegion(out, mask.copy())


def _palette_mean_l(p: Palette) -> float:
    return float(p.weight_array() @ p.centroid_array()[:, 0])


def palette_mean_ab(p: Palette) -> tuple[float, float]:
    mean = p.weight_array() @ p.centroid_array()[:, 1:]
    return (float(mean[0]), float(mean[1]))


def should_skip(
    target: QuantizedRegion,
    reference: QuantizedRegion,
    distances: PaletteDistances,
    params: EnhancementParams,
) -> SkipDecision:
    """Skip enhancement for darker targets or already-distinct pairs.

    DarkerTarget: palette-weighted mean L of the target is below the
    reference's. BelowThreshold: the shared dominant reference centroid
    is within skip_delta_e of the nearest target centroid.
    """
    if _palette_mean_l(target.palette) < _palette_mean_l(reference.palette):
        return SkipDecision(True, "DarkerTarget")

    shared = shared_dominant_color(target.palette, reference.palette)
    nearest = min(
        ciede2000(shared, c) for c in target.palette.centroids
    )
    if nearest < params.skip_delta_e:
        return SkipDecision(True, "BelowThreshold")
    return SkipDecision(False)


def generate_proxy(
    target: RasterRegion,
    reference: RasterRegion,
    params: EnhancementParams | None = None,
    seed: int = DEFAULT_SEED,
    k: int = DEFAULT_K,
    apply_skip_rules: bool = True,
) -> ProxyResult:
    """Full proxy pipeline over a target/reference pair.

    quantize both -> palette distances -> skip check -> (if enhancing)
    shared color, boost map, channel adjustments. apply_skip_rules=False
    always enhances (used when rendering calibration candidates).
    """
    params = params or EnhancementParams()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    qt = quantize(target, k=k, seed=seed)
    qr = quantize(reference, k=k, seed=seed)
    timings["quantize"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    dist = palette_distances(qt.palette, qr.palette)
    decision = (
        should_skip(qt, qr, dist, params)
        if apply_skip_rules
        else SkipDecision(False)
    )
    timings["analyze"] = (time.perf_counter() - t0) * 1000.0

    if decision.skip:
        return ProxyResult(
            proxy=RasterRegion(qt.raster, qt.mask),
            skipped=True,
            skip_reason=decision.reason,
            target_palette=qt.palette,
            reference_palette=qr.palette,
            distances=dist,
            timings_ms=timings,
        )

    t0 = time.perf_counter()
    shared = shared_dominant_color(qt.palette, qr.palette)
    boost = boost_map(qt, shared, dist, params)
    proxy = enhance(qt, boost, dist, palette_mean_ab(qr.palette), params)
    timings["enhance"] = (time.perf_counter() - t0) * 1000.0

    return ProxyResult(
        proxy=proxy,
        skipped=False,
        skip_reason=None,
        target_palette=qt.palette,
        reference_palette=qr.palette,
        distances=dist,
        timings_ms=timings,
    )
