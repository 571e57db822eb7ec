import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periphproxy.regions import (
    Detection,
    RasterRegion,
    detection_from_json,
    detection_to_json,
    load_detections,
    load_image,
    rle_decode,
    rle_encode,
    save_detections,
    save_image,
)


class TestRasterRegion:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            RasterRegion(np.zeros((4, 4), dtype=np.uint8), np.ones((4, 4), dtype=bool))
        with pytest.raises(ValueError):
            RasterRegion(
                np.zeros((4, 4, 3), dtype=np.uint8), np.ones((3, 4), dtype=bool)
            )

    def test_full_selects_everything(self):
        r = RasterRegion.full(np.zeros((3, 5, 3), dtype=np.uint8))
        assert r.mask.all()
        assert r.masked_pixels().shape == (15, 3)


class TestRle:
    def test_empty_mask(self):
        mask = np.zeros((3, 4), dtype=bool)
        rle = rle_encode(mask)
        assert rle == {"size": [3, 4], "counts": [12]}
        assert np.array_equal(rle_decode(rle), mask)

    def test_full_mask_starts_with_zero_run(self):
        mask = np.ones((2, 3), dtype=bool)
        rle = rle_encode(mask)
        assert rle["counts"][0] == 0
        assert np.array_equal(rle_decode(rle), mask)

    def test_known_pattern(self):
        mask = np.array([[0, 1, 1], [0, 0, 1]], dtype=bool)
        assert rle_encode(mask)["counts"] == [1, 2, 2, 1]

    @given(st.integers(0, 2**30))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_random(self, seed):
        rng = np.random.default_rng(seed)
        mask = rng.random((rng.integers(1, 12), rng.integers(1, 12))) > 0.5
        assert np.array_equal(rle_decode(rle_encode(mask)), mask)

    def test_bad_counts_rejected(self):
        with pytest.raises(ValueError):
            rle_decode({"size": [2, 2], "counts": [1, 2]})


class TestDetectionIo:
    def test_json_round_trip(self):
        mask = np.zeros((6, 8), dtype=bool)
        mask[2:5, 3:7] = True
        det = Detection(id="a", bbox=(3, 2, 4, 3), mask=mask, label="box")
        back = detection_from_json(detection_to_json(det))
        assert back.id == det.id and back.bbox == det.bbox
        assert back.label == "box"
        assert np.array_equal(back.mask, det.mask)

    def test_file_round_trip(self, tmp_path):
        mask = np.zeros((4, 4), dtype=bool)
        mask[1:3, 1:3] = True
        dets = [Detection(id="x", bbox=(1, 1, 2, 2), mask=mask)]
        path = tmp_path / "detections.json"
        save_detections(dets, path)
        loaded = load_detections(path)
        assert len(loaded) == 1
        assert loaded[0].id == "x"
        assert np.array_equal(loaded[0].mask, mask)

    def test_region_cuts_bbox(self):
        frame = np.arange(6 * 8 * 3, dtype=np.uint8).reshape(6, 8, 3)
        mask = np.zeros((6, 8), dtype=bool)
        mask[2:5, 3:7] = True
        det = Detection(id="a", bbox=(3, 2, 4, 3), mask=mask)
        region = det.region(frame)
        assert region.shape == (3, 4)
        assert region.mask.all()
        assert np.array_equal(region.raster, frame[2:5, 3:7])
        assert det.area == 12


def test_image_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (10, 12, 3), dtype=np.uint8)
    path = tmp_path / "img.png"
    save_image(img, path)
    assert np.array_equal(load_image(path), img)
