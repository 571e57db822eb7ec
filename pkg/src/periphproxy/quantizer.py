"""Color quantization: reduce a masked raster to K dominant colors.

Mini-batch k-means in CIELAB with k-means++ seeding. Clustering uses
Euclidean distance in Lab (the standard perceptual proxy); CIEDE2000 is
not a metric inside k-means and is avoided here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from periphproxy.colorspace import LabColor, lab_array_to_rgb, rgb_array_to_lab
from periphproxy.regions import EmptyMask, RasterRegion

DEFAULT_K = 7
DEFAULT_SEED = 42

MINIBATCH_SIZE = 1024
MAX_ITER = 100
SHIFT_TOL = 1e-3
N_INIT = 5  # restarts; best kept by full-data inertia


@dataclass
class Palette:
    """K weighted Lab centroids with a normalized coverage histogram.

    Empty clusters carry weight 0; weights sum to 1.
    """

    centroids: list[LabColor]
    weights: list[float]
    k: int

    def __post_init__(self) -> None:
        if not (len(self.centroids) == len(self.weights) == self.k):
            raise ValueError("centroids, weights, and k must agree")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    def centroid_array(self) -> np.ndarray:
        return np.array([c.as_array() for c in self.centroids])

    def weight_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=np.float64)


@dataclass
class QuantizedRegion:
    """A raster whose masked pixels are snapped to their palette centroid."""

    raster: np.ndarray
    mask: np.ndarray
    palette: Palette
    assignment: np.ndarray  # cluster index per masked pixel, mask-order

    @property
    def shape(self) -> tuple[int, int]:
        return self.raster.shape[:2]

    def masked_lab(self) -> np.ndarray:
        """Lab coordinates of each masked pixel's assigned centroid, (N, 3)."""
        return self.palette.centroid_array()[self.assignment]


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            # fewer distinct points than k: duplicate an existing center
            centers[i] = centers[0]
            continue
        idx = rng.choice(n, p=d2 / total)
        centers[i] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[i]) ** 2, axis=1))
    return centers


def _nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ties break toward the lowest index (argmin behavior)
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def quantize(
    region: RasterRegion,
    k: int = DEFAULT_K,
    seed: int = DEFAULT_SEED,
) -> QuantizedRegion:
    """Quantize the masked pixels of a region to at most k colors.

    Deterministic for a fixed seed. Raises EmptyMask if the mask selects
    no pixels.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pixels = region.masked_pixels()
    if pixels.shape[0] == 0:
        raise EmptyMask("mask selects no pixels")

    lab = rgb_array_to_lab(pixels.astype(np.float64) / 255.0)
    n = lab.shape[0]

    best_centers: np.ndarray | None = None
    best_inertia = np.inf
    for restart in range(N_INIT):
        rng = np.random.default_rng((seed, restart))
        centers = _kmeans_pp_init(lab, k, rng)
        counts = np.zeros(k)
        for _ in range(MAX_ITER):
            batch = lab[rng.integers(n, size=min(MINIBATCH_SIZE, n))]
            assign = _nearest(batch, centers)
            old = centers.copy()
            for j in np.unique(assign):
                members = batch[assign == j]
                counts[j] += members.shape[0]
                eta = members.shape[0] / counts[j]
                centers[j] = (1.0 - eta) * centers[j] + eta * members.mean(axis=0)
            if np.max(np.linalg.norm(centers - old, axis=1)) < SHIFT_TOL:
                break
        assign = _nearest(lab, centers)
        inertia = float(((lab - centers[assign]) ** 2).sum())
        if inertia < best_inertia:
            best_inertia = inertia
            best_centers = centers

    assert best_centers is not None
    centers = best_centers
    assignment = _nearest(lab, centers)
    weights = np.bincount(assignment, minlength=k).astype(np.float64)
    weights /= weights.sum()

    # snap used centroids to exact in-gamut colors via the quantized raster
    quant_rgb = np.clip(
        np.round(lab_array_to_rgb(centers) * 255.0), 0, 255
    ).astype(np.uint8)
    raster = region.raster.copy()
    raster[region.mask] = quant_rgb[assignment]

    palette = Palette(
        centroids=[LabColor(*c) for c in centers],
        weights=weights.tolist(),
        k=k,
    )
    return QuantizedRegion(
        raster=raster,
        mask=region.mask.copy(),
        palette=palette,
        assignment=assignment,
    )


def palette_mean_lab(p: Palette) -> LabColor:
    """Coverage-weighted mean Lab coordinates of a palette."""
    mean = p.weight_array() @ p.centroid_array()
    return LabColor(*mean)
