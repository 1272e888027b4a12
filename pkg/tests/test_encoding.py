import numpy as np
import pytest

from radvis.encoding import (
    ALPHA_TRANSPARENT,
    ColorLut,
    EncodingSpec,
    KINDS,
    band_quantize,
    load_viridis,
    make_spec,
    sample_continuous,
    shade_color,
)


class TestLut:
    def test_viridis_fixture_shape(self, lut):
        assert lut.entries.shape == (256, 4)
        assert np.all(lut.entries[:, 3] == 255)

    def test_viridis_endpoints_pinned(self, lut):
        assert tuple(lut.rgb[0]) == (0x44, 0x01, 0x54)
        assert tuple(lut.rgb[255]) == (0xFD, 0xE7, 0x25)

    def test_wrong_size_rejected(self):
        with pytest.raises(ValueError):
            ColorLut(entries=np.zeros((100, 4), dtype=np.uint8))


class TestSampleContinuous:
    def test_endpoints(self, lut):
        assert sample_continuous(0.0, lut) == (0x44, 0x01, 0x54, 255)
        assert sample_continuous(1.0, lut) == (0xFD, 0xE7, 0x25, 255)

    def test_midpoint_interpolates_127_128(self, lut):
        got = sample_continuous(0.5, lut)
        c0 = lut.rgb[127].astype(float)
        c1 = lut.rgb[128].astype(float)
        expect = tuple(int(np.floor(0.5 * a + 0.5 * b + 0.5)) for a, b in zip(c0, c1))
        assert got[:3] == expect

    def test_out_of_range_rejected(self, lut):
        with pytest.raises(ValueError):
            sample_continuous(-0.01, lut)
        with pytest.raises(ValueError):
            sample_continuous(1.01, lut)

    def test_continuity(self, lut):
        us = np.linspace(0.0, 1.0 - 1e-4, 1000)
        for u in us:
            a = np.array(sample_continuous(float(u), lut)[:3], dtype=int)
            b = np.array(sample_continuous(float(u) + 1e-4, lut)[:3], dtype=int)
            assert np.max(np.abs(a - b)) <= 2


class TestBandQuantize:
    def test_bottom_band_center(self):
        assert band_quantize(0.0, 8) == pytest.approx(0.0625)

    def test_u_013_lands_in_band_1(self):
        assert band_quantize(0.13, 8) == pytest.approx(0.1875)

    def test_top_band_center(self):
        assert band_quantize(1.0, 8) == pytest.approx(0.9375)

    def test_exactly_n_outputs(self):
        outs = {band_quantize(u, 8) for u in np.linspace(0, 1, 10_000)}
        assert len(outs) == 8

    def test_half_maps_to_band_4(self):
        assert band_quantize(0.5, 8) == pytest.approx(0.5625)


class TestShadeColor:
    def test_transparent_alpha(self, lut):
        spec = make_spec("transparent")
        assert spec.alpha == ALPHA_TRANSPARENT
        rgba = shade_color(0.5, spec, lut)
        assert rgba[3] == int(np.floor(0.33 * 255 + 0.5)) == 84
        assert rgba[:3] == sample_continuous(0.5, lut)[:3]

    def test_banded_routes_through_band_center(self, lut):
        got = shade_color(0.5, make_spec("banded"), lut)
        assert got == shade_color(band_quantize(0.5, 8), make_spec("continuous"), lut)

    def test_continuous_endpoint_opaque(self, lut):
        assert shade_color(0.0, make_spec("continuous"), lut) == (0x44, 0x01, 0x54, 255)

    def test_alpha_universe(self, lut):
        for kind in KINDS:
            for u in np.linspace(0, 1, 17):
                a = shade_color(float(u), make_spec(kind), lut)[3]
                assert a in (255, 84)

    def test_banded_palette_has_at_most_8_colors(self, lut):
        colors = {shade_color(float(u), make_spec("banded"), lut)[:3] for u in np.linspace(0, 1, 5000)}
        assert len(colors) <= 8

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            EncodingSpec(kind="mosaic")

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            EncodingSpec(kind="banded", bands=1)
        with pytest.raises(ValueError):
            EncodingSpec(kind="continuous", alpha=0.0)
        with pytest.raises(ValueError):
            EncodingSpec(kind="circle", tile_scale=-1.0)
