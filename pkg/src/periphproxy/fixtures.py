"""Procedural test stimuli: fruit-like textures and simple scenes.

Used by the calibration service's built-in stimulus, the example
scripts, and the test suite. Everything is seeded and deterministic.
"""

from __future__ import annotations

import numpy as np

from periphproxy.regions import Detection, RasterRegion


def fruit_texture(
    base_rgb: tuple[int, int, int],
    size: int = 64,
    variation: int = 18,
    seed: int = 0,
) -> RasterRegion:
    """A round fruit-like blob with mild per-pixel color variation."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    c = (size - 1) / 2.0
    mask = (xx - c) ** 2 + (yy - c) ** 2 <= (0.45 * size) ** 2

    raster = np.zeros((size, size, 3), dtype=np.int16)
    raster[...] = np.array(base_rgb, dtype=np.int16)
    noise = rng.integers(-variation, variation + 1, size=(size, size, 3))
    # radial shading darkens the rim slightly
    r = np.sqrt((xx - c) ** 2 + (yy - c) ** 2) / (0.45 * size)
    shade = (1.0 - 0.25 * np.clip(r, 0, 1) ** 2)[..., None]
    raster = np.clip((raster + noise) * shade, 0, 255).astype(np.uint8)
    raster[~mask] = 0
    return RasterRegion(raster, mask)


def pear_and_apple(size: int = 64) -> tuple[RasterRegion, RasterRegion]:
    """Lighter yellowish-green target vs darker green reference."""
    pear = fruit_texture((168, 200, 96), size=size, seed=11)
    apple = fruit_texture((76, 140, 60), size=size, seed=12)
    return pear, apple


def two_region_texture(
    top_rgb: tuple[int, int, int],
    bottom_rgb: tuple[int, int, int],
    size: int = 64,
    top_fraction: float = 0.5,
    variation: int = 8,
    seed: int = 0,
) -> RasterRegion:
    """A packaging-style texture: shared header color over a distinct body."""
    rng = np.random.default_rng(seed)
    split = int(size * top_fraction)
    raster = np.zeros((size, size, 3), dtype=np.int16)
    raster[:split] = np.array(top_rgb, dtype=np.int16)
    raster[split:] = np.array(bottom_rgb, dtype=np.int16)
    raster += rng.integers(-variation, variation + 1, size=(size, size, 3))
    raster = np.clip(raster, 0, 255).astype(np.uint8)
    return RasterRegion.full(raster)


def lower_half(region: RasterRegion) -> RasterRegion:
    h = region.shape[0]
    return RasterRegion(region.raster[h // 2 :], region.mask[h // 2 :])


def scene_with_detections(
    colors: list[tuple[int, int, int]],
    object_size: int = 32,
    gap: int = 8,
    seed: int = 0,
) -> tuple[np.ndarray, list[Detection]]:
    """A shelf-like frame: one blob per color in a horizontal row."""
    n = len(colors)
    height = object_size + 2 * gap
    width = n * (object_size + gap) + gap
    frame = np.full((height, width, 3), 230, dtype=np.uint8)
    detections = []
    for i, color in enumerate(colors):
        blob = fruit_texture(color, size=object_size, seed=seed + i)
        x = gap + i * (object_size + gap)
        y = gap
        patch = frame[y : y + object_size, x : x + object_size]
        patch[blob.mask] = blob.raster[blob.mask]
        mask = np.zeros((height, width), dtype=bool)
        mask[y : y + object_size, x : x + object_size] = blob.mask
        detections.append(
            Detection(
                id=f"obj{i}",
                bbox=(x, y, object_size, object_size),
                mask=mask,
                label=f"color{i}",
            )
        )
    return frame, detections


def frame_with_gaze_dot(
    frame: np.ndarray, center: tuple[int, int], radius: int = 3
) -> np.ndarray:
    """Stamp a pure-red gaze dot onto a copy of the frame."""
    out = np.asarray(frame, dtype=np.uint8).copy()
    x0, y0 = center
    yy, xx = np.mgrid[0 : out.shape[0], 0 : out.shape[1]]
    dot = (xx - x0) ** 2 + (yy - y0) ** 2 <= radius ** 2
    out[dot] = (255, 0, 0)
    return out
