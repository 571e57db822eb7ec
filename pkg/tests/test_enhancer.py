import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periphproxy.colorspace import LabColor, ciede2000, rgb_array_to_hsv, rgb_array_to_lab
from periphproxy.enhancer import (
    BoostMap,
    DimensionMismatch,
    EnhancementParams,
    PaletteDistances,
    boost_map,
    enhance,
    generate_proxy,
    palette_distances,
    palette_mean_ab,
    shared_dominant_color,
    should_skip,
)
from periphproxy.fixtures import (
    fruit_texture,
    lower_half,
    pear_and_apple,
    two_region_texture,
)
from periphproxy.quantizer import Palette, quantize
from periphproxy.regions import RasterRegion

from oracles import brute_force_palette_distances

IDENTITY = EnhancementParams(
    max_luminance=1.0,
    max_sat_boost=1.0,
    ab_push=0.0,
    gamma=1.0,
    clahe_clip=0.0,
)


def uniform_quantized(rgb8, size=16):
    region = RasterRegion.full(np.full((size, size, 3), rgb8, dtype=np.uint8))
    return quantize(region, k=1)


def random_palette(rng, k=7):
    centroids = [
        LabColor(rng.uniform(5, 95), rng.uniform(-60, 60), rng.uniform(-60, 60))
        for _ in range(k)
    ]
    w = rng.random(k)
    w /= w.sum()
    return Palette(centroids, w.tolist(), k)


class TestPaletteDistances:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            pt, pr = random_palette(rng), random_palette(rng)
            d = palette_distances(pt, pr)
            de, dl, dc = brute_force_palette_distances(
                pt.centroid_array(), pt.weight_array(),
                pr.centroid_array(), pr.weight_array(),
            )
            assert d.deltaE_total == pytest.approx(de, abs=1e-9)
            assert d.deltaL == pytest.approx(dl, abs=1e-9)
            assert d.deltaC == pytest.approx(dc, abs=1e-9)
            assert d.alpha == pytest.approx(dc / (dl + dc), abs=1e-9)

    def test_identical_single_color_is_degenerate(self):
        p = Palette([LabColor(50, 10, -10)], [1.0], 1)
        d = palette_distances(p, p)
        assert d.deltaE_total == 0.0
        assert d.deltaL == 0.0 and d.deltaC == 0.0
        assert d.alpha == 0.5

    def test_pure_lightness_difference(self):
        pt = Palette([LabColor(80, 0, 0)], [1.0], 1)
        pr = Palette([LabColor(40, 0, 0)], [1.0], 1)
        d = palette_distances(pt, pr)
        assert d.deltaL == pytest.approx(40.0)
        assert d.deltaC == pytest.approx(0.0)
        assert d.alpha == pytest.approx(0.0)

    def test_pure_chroma_difference(self):
        pt = Palette([LabColor(50, 30, 40)], [1.0], 1)  # chroma 50
        pr = Palette([LabColor(50, 0, 0)], [1.0], 1)
        d = palette_distances(pt, pr)
        assert d.deltaL == pytest.approx(0.0)
        assert d.deltaC == pytest.approx(50.0)
        assert d.alpha == pytest.approx(1.0)


class TestSharedDominantColor:
    def test_exact_shared_centroid_wins(self):
        shared = LabColor(60, 20, 30)
        pt = Palette([shared, LabColor(30, -40, 10)], [0.5, 0.5], 2)
        pr = Palette([LabColor(80, 0, -50), shared], [0.5, 0.5], 2)
        assert shared_dominant_color(pt, pr) == shared

    def test_weight_breaks_overlap_ties(self):
        # both reference centroids overlap the target identically
        c = LabColor(50, 0, 0)
        pt = Palette([c], [1.0], 1)
        pr = Palette([c, c], [0.3, 0.7], 2)
        got = shared_dominant_color(pt, pr)
        assert got == pr.centroids[1]

    def test_lower_index_breaks_full_ties(self):
        c = LabColor(50, 0, 0)
        pt = Palette([c], [1.0], 1)
        pr = Palette([c, c], [0.5, 0.5], 2)
        # identical score and weight: index 0 wins
        assert shared_dominant_color(pt, pr) is pr.centroids[0]

    def test_distant_reference_color_scores_zero(self):
        # overlap term is zero beyond tau=25 deltaE, so only the nearby
        # centroid can win even with a tiny weight
        near = LabColor(60, 10, 10)
        far = LabColor(5, -80, 80)
        pt = Palette([LabColor(62, 12, 8)], [1.0], 1)
        pr = Palette([far, near], [0.95, 0.05], 2)
        assert shared_dominant_color(pt, pr) == near


class TestBoostMap:
    def test_pixel_equal_to_shared_with_large_distance(self):
        q = uniform_quantized((128, 128, 128))
        shared = q.palette.centroids[0]
        dist = PaletteDistances(45.0, 10.0, 10.0, 0.5)
        b = boost_map(q, shared, dist, EnhancementParams())
        assert np.all(b.values[q.mask] == pytest.approx(1.0))

    def test_distant_pixel_gets_zero(self):
        q = uniform_quantized((10, 10, 10))
        far = LabColor(95.0, 0.0, 0.0)
        dist = PaletteDistances(45.0, 10.0, 10.0, 0.5)
        assert ciede2000(q.palette.centroids[0], far) >= 50.0
        b = boost_map(q, far, dist, EnhancementParams())
        assert np.all(b.values == 0.0)

    def test_global_scale_attenuates(self):
        # deltaE_total = 7.5 against reference 30 scales similarity by 0.25
        q = uniform_quantized((128, 128, 128))
        shared = q.palette.centroids[0]
        dist = PaletteDistances(7.5, 10.0, 10.0, 0.5)
        b = boost_map(q, shared, dist, EnhancementParams())
        assert np.all(b.values[q.mask] == pytest.approx(0.25))

    def test_zero_outside_mask(self):
        q = quantize(fruit_texture((150, 90, 60), seed=2))
        dist = PaletteDistances(45.0, 10.0, 10.0, 0.5)
        b = boost_map(q, q.palette.centroids[0], dist, EnhancementParams())
        assert np.all(b.values[~q.mask] == 0.0)

    @given(st.floats(0, 200), st.floats(0, 100))
    @settings(max_examples=30, deadline=None)
    def test_values_always_in_unit_interval(self, total, L):
        q = uniform_quantized((70, 140, 210), size=4)
        dist = PaletteDistances(total, 10.0, 10.0, 0.5)
        b = boost_map(q, LabColor(L, 0, 0), dist, EnhancementParams())
        assert b.values.min() >= 0.0 and b.values.max() <= 1.0


class TestEnhance:
    def test_identity_params_bit_identical(self):
        q = quantize(fruit_texture((168, 200, 96), seed=11))
        boost = BoostMap(np.where(q.mask, 1.0, 0.0))
        dist = PaletteDistances(45.0, 20.0, 20.0, 0.5)
        out = enhance(q, boost, dist, (0.0, 0.0), IDENTITY)
        assert np.array_equal(out.raster, q.raster)

    def test_zero_boost_bit_identical(self):
        q = quantize(fruit_texture((168, 200, 96), seed=11))
        boost = BoostMap(np.zeros(q.shape))
        dist = PaletteDistances(45.0, 20.0, 20.0, 0.5)
        params = EnhancementParams(gamma=1.0, clahe_clip=0.0)
        out = enhance(q, boost, dist, (0.0, 0.0), params)
        assert np.array_equal(out.raster, q.raster)

    def test_luminance_formula(self):
        # L' = L * (1 + b (max_lum - 1)(1 - alpha)); here 1.375 L
        q = uniform_quantized((100, 100, 100))
        L_in = q.palette.centroids[0].L
        boost = BoostMap(np.full(q.shape, 0.5))
        dist = PaletteDistances(45.0, 30.0, 10.0, 0.25)
        params = EnhancementParams(
            max_luminance=2.0, max_sat_boost=1.0, ab_push=0.0,
            gamma=1.0, clahe_clip=0.0,
        )
        out = enhance(q, boost, dist, (0.0, 0.0), params)
        lab = rgb_array_to_lab(out.raster[out.mask].astype(np.float64) / 255.0)
        assert lab[:, 0].mean() == pytest.approx(1.375 * L_in, abs=0.5)

    def test_saturation_formula(self):
        # S' = S * (1 + b (max_sat - 1) alpha); here 1.25 S
        rgb8 = (51, 153, 102)
        q = uniform_quantized(rgb8)
        s_in = rgb_array_to_hsv(np.array([rgb8]) / 255.0)[0, 1]
        boost = BoostMap(np.full(q.shape, 0.25))
        dist = PaletteDistances(45.0, 0.0, 10.0, 1.0)
        params = EnhancementParams(
            max_luminance=1.0, max_sat_boost=2.0, ab_push=0.0,
            gamma=1.0, clahe_clip=0.0,
        )
        out = enhance(q, boost, dist, (0.0, 0.0), params)
        hsv = rgb_array_to_hsv(out.raster[out.mask].astype(np.float64) / 255.0)
        assert hsv[:, 1].mean() == pytest.approx(1.25 * s_in, abs=0.02)

    def test_chroma_push_moves_away_from_reference_mean(self):
        rgb8 = (180, 150, 150)
        q = uniform_quantized(rgb8)
        lab_in = rgb_array_to_lab(np.array([rgb8]) / 255.0)[0]
        chroma_in = float(np.hypot(lab_in[1], lab_in[2]))
        boost = BoostMap(np.ones(q.shape))
        dist = PaletteDistances(45.0, 10.0, 10.0, 0.5)
        params = EnhancementParams(
            max_luminance=1.0, max_sat_boost=1.0, ab_push=10.0,
            gamma=1.0, clahe_clip=0.0,
        )
        out = enhance(q, boost, dist, (0.0, 0.0), params)
        lab = rgb_array_to_lab(out.raster[out.mask].astype(np.float64) / 255.0)
        chroma_out = float(np.hypot(lab[:, 1], lab[:, 2]).mean())
        assert chroma_out == pytest.approx(chroma_in + 10.0, abs=0.6)
        # direction is radial: hue angle is preserved
        ang_in = np.arctan2(lab_in[2], lab_in[1])
        ang_out = np.arctan2(lab[:, 2], lab[:, 1]).mean()
        assert ang_out == pytest.approx(ang_in, abs=0.05)

    def test_neutral_pixel_has_no_push_direction(self):
        q = uniform_quantized((128, 128, 128))
        lab_in = rgb_array_to_lab(np.array([[128, 128, 128]]) / 255.0)[0]
        boost = BoostMap(np.ones(q.shape))
        dist = PaletteDistances(45.0, 10.0, 10.0, 0.5)
        params = EnhancementParams(
            max_luminance=1.0, max_sat_boost=1.0, ab_push=20.0,
            gamma=1.0, clahe_clip=0.0,
        )
        out = enhance(q, boost, dist, (lab_in[1], lab_in[2]), params)
        assert np.array_equal(out.raster, q.raster)

    def test_output_stays_in_gamut(self):
        q = quantize(fruit_texture((220, 210, 60), seed=7))
        boost = BoostMap(np.where(q.mask, 1.0, 0.0))
        dist = PaletteDistances(100.0, 10.0, 10.0, 0.5)
        params = EnhancementParams(max_luminance=8.0, max_sat_boost=16.0, ab_push=60.0)
        out = enhance(q, boost, dist, (0.0, 0.0), params)
        assert out.raster.dtype == np.uint8

    def test_shape_mismatch_rejected(self):
        q = uniform_quantized((90, 90, 90), size=8)
        boost = BoostMap(np.ones((4, 4)))
        dist = PaletteDistances(45.0, 10.0, 10.0, 0.5)
        with pytest.raises(DimensionMismatch):
            enhance(q, boost, dist, (0.0, 0.0), EnhancementParams())

    def test_untouched_outside_mask(self):
        region = fruit_texture((150, 200, 90), seed=3)
        q = quantize(region)
        boost = BoostMap(np.where(q.mask, 1.0, 0.0))
        dist = PaletteDistances(60.0, 10.0, 10.0, 0.5)
        out = enhance(q, boost, dist, (0.0, 0.0), EnhancementParams())
        assert np.array_equal(out.raster[~q.mask], q.raster[~q.mask])


class TestSkipRules:
    def test_darker_target_skipped(self):
        dark = quantize(fruit_texture((40, 60, 30), seed=1))
        light = quantize(fruit_texture((180, 220, 120), seed=2))
        dist = palette_distances(dark.palette, light.palette)
        d = should_skip(dark, light, dist, EnhancementParams())
        assert d.skip and d.reason == "DarkerTarget"

    def test_distinct_brighter_target_not_skipped(self):
        light = quantize(fruit_texture((220, 210, 80), seed=1))
        dark = quantize(fruit_texture((60, 80, 160), seed=2))
        dist = palette_distances(light.palette, dark.palette)
        d = should_skip(light, dark, dist, EnhancementParams())
        assert not d.skip and d.reason is None

    def test_shared_header_triggers_below_threshold(self):
        # two packages share a bright header color; bodies differ
        target = two_region_texture((245, 205, 60), (200, 120, 70), seed=5)
        reference = two_region_texture((245, 205, 60), (90, 110, 170), seed=6)
        qt, qr = quantize(target), quantize(reference)
        dist = palette_distances(qt.palette, qr.palette)
        d = should_skip(qt, qr, dist, EnhancementParams())
        assert d.skip and d.reason == "BelowThreshold"

    def test_cropping_away_header_unskips(self):
        target = two_region_texture((245, 205, 60), (200, 120, 70), seed=5)
        reference = two_region_texture((245, 205, 60), (90, 110, 170), seed=6)
        qt = quantize(lower_half(target))
        qr = quantize(lower_half(reference))
        dist = palette_distances(qt.palette, qr.palette)
        d = should_skip(qt, qr, dist, EnhancementParams())
        assert not d.skip


class TestGenerateProxy:
    def test_pear_vs_apple_enhances(self):
        pear, apple = pear_and_apple()
        result = generate_proxy(pear, apple)
        assert not result.skipped
        lab_in = rgb_array_to_lab(pear.masked_pixels() / 255.0)
        lab_out = rgb_array_to_lab(
            result.proxy.raster[result.proxy.mask].astype(np.float64) / 255.0
        )
        assert lab_out[:, 0].mean() > lab_in[:, 0].mean()
        hsv_in = rgb_array_to_hsv(pear.masked_pixels() / 255.0)
        hsv_out = rgb_array_to_hsv(
            result.proxy.raster[result.proxy.mask].astype(np.float64) / 255.0
        )
        assert hsv_out[:, 1].mean() > hsv_in[:, 1].mean()

    def test_deterministic(self):
        pear, apple = pear_and_apple()
        a = generate_proxy(pear, apple, seed=4)
        b = generate_proxy(pear, apple, seed=4)
        assert np.array_equal(a.proxy.raster, b.proxy.raster)

    def test_skip_preserves_quantized_target(self):
        dark = fruit_texture((40, 60, 30), seed=1)
        light = fruit_texture((180, 220, 120), seed=2)
        result = generate_proxy(dark, light)
        assert result.skipped and result.skip_reason == "DarkerTarget"
        q = quantize(dark)
        assert np.array_equal(result.proxy.raster, q.raster)

    def test_skip_rules_bypass(self):
        dark = fruit_texture((40, 60, 30), seed=1)
        light = fruit_texture((180, 220, 120), seed=2)
        result = generate_proxy(dark, light, apply_skip_rules=False)
        assert not result.skipped

    def test_timings_recorded(self):
        pear, apple = pear_and_apple()
        result = generate_proxy(pear, apple)
        assert set(result.timings_ms) == {"quantize", "analyze", "enhance"}
        assert all(v >= 0 for v in result.timings_ms.values())
        assert result.burst_ms == 2000


class TestEnhancementParams:
    def test_calibrated_defaults(self):
        p = EnhancementParams()
        assert p.max_luminance == 2.125
        assert p.max_sat_boost == 9.75
        assert p.ab_push == 30.0
        assert p.skip_delta_e == 5.0

    def test_json_round_trip(self, tmp_path):
        p = EnhancementParams(max_luminance=3.0, gamma=1.0, clahe_clip=0.0)
        path = tmp_path / "params.json"
        p.save(path)
        assert EnhancementParams.load(path) == p

    def test_disable_conventions(self):
        assert not EnhancementParams(gamma=1.0).gamma_enabled
        assert EnhancementParams(gamma=0.9).gamma_enabled
        assert not EnhancementParams(clahe_clip=0.0).clahe_enabled
        assert EnhancementParams(clahe_clip=2.0).clahe_enabled

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"max_luminance": 0.5},
            {"max_sat_boost": 0.0},
            {"ab_push": -1.0},
            {"skip_delta_e": -0.1},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            EnhancementParams(**kwargs)


def test_palette_mean_ab():
    p = Palette([LabColor(20, 10, -4), LabColor(80, -30, 8)], [0.25, 0.75], 2)
    a, b = palette_mean_ab(p)
    assert a == pytest.approx(0.25 * 10 + 0.75 * -30)
    assert b == pytest.approx(0.25 * -4 + 0.75 * 8)
