"""Raster regions, detections, and their file formats.

A RasterRegion is an RGB raster plus a binary mask selecting the pixels
that belong to the object. Detections arrive from a JSON sidecar with
row-major run-length encoded masks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image


class EmptyMask(ValueError):
    """Raised when an operation needs at least one masked pixel."""


@dataclass
class RasterRegion:
    """An RGB raster (H, W, 3) uint8 plus a boolean mask (H, W)."""

    raster: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        self.raster = np.asarray(self.raster, dtype=np.uint8)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.raster.ndim != 3 or self.raster.shape[2] != 3:
            raise ValueError(f"raster must be (H, W, 3), got {self.raster.shape}")
        if self.mask.shape != self.raster.shape[:2]:
            raise ValueError("mask shape must match raster")

    @classmethod
    def full(cls, raster: np.ndarray) -> "RasterRegion":
        raster = np.asarray(raster, dtype=np.uint8)
        return cls(raster, np.ones(raster.shape[:2], dtype=bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.raster.shape[:2]

    def masked_pixels(self) -> np.ndarray:
        """Masked pixel colors as an (N, 3) uint8 array."""
        return self.raster[self.mask]


@dataclass
class Detection:
    """A detected object: id, bbox [x, y, w, h], mask, optional label."""

    id: str
    bbox: tuple[int, int, int, int]
    mask: np.ndarray
    label: str | None = None

    def __post_init__(self) -> None:
        self.mask = np.asarray(self.mask, dtype=bool)
        self.bbox = tuple(int(v) for v in self.bbox)

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    def region(self, frame: np.ndarray) -> RasterRegion:
        """Cut this detection out of a full frame as a RasterRegion."""
        x, y, w, h = self.bbox
        return RasterRegion(frame[y : y + h, x : x + w], self.mask[y : y + h, x : x + w])


def rle_encode(mask: np.ndarray) -> dict:
    """Row-major RLE: run counts alternate zeros/ones, starting with zeros."""
    mask = np.asarray(mask, dtype=bool)
    flat = mask.ravel()
    changes = np.flatnonzero(np.diff(flat.astype(np.int8)))
    bounds = np.concatenate([[0], changes + 1, [flat.size]])
    counts = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        counts = [0] + counts
    return {"size": [int(mask.shape[0]), int(mask.shape[1])], "counts": counts}


def rle_decode(rle: dict) -> np.ndarray:
    h, w = rle["size"]
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for count in rle["counts"]:
        if value:
            flat[pos : pos + count] = True
        pos += count
        value = not value
    if pos != h * w:
        raise ValueError(f"RLE counts cover {pos} pixels, mask has {h * w}")
    return flat.reshape(h, w)


def detection_to_json(det: Detection) -> dict:
    return {
        "id": det.id,
        "bbox": list(det.bbox),
        "mask": rle_encode(det.mask),
        "label": det.label,
    }


def detection_from_json(obj: dict) -> Detection:
    return Detection(
        id=str(obj["id"]),
        bbox=tuple(obj["bbox"]),
        mask=rle_decode(obj["mask"]),
        label=obj.get("label"),
    )


def load_detections(path: str | Path) -> list[Detection]:
    with open(path) as fh:
        data = json.load(fh)
    return [detection_from_json(obj) for obj in data]


def save_detections(detections: list[Detection], path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump([detection_to_json(d) for d in detections], fh)


def load_image(path: str | Path) -> np.ndarray:
    """Load an image file as an (H, W, 3) uint8 RGB array."""
    return np.asarray(Image.open(path).convert("RGB"))


def save_image(raster: np.ndarray, path: str | Path) -> None:
    Image.fromarray(np.asarray(raster, dtype=np.uint8)).save(path)


def load_mask(path: str | Path) -> np.ndarray:
    """Load a grayscale image as a boolean mask (nonzero = selected)."""
    return np.asarray(Image.open(path).convert("L")) > 0
