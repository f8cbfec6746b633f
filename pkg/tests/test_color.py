import colorsys
import math
import random

import pytest

from gazeadapt.color import (
    BLACK,
    WHITE,
    contrast_ratio,
    lighten_to_contrast,
    parse_hex,
    relative_luminance,
    to_hex,
)


def hand_luminance(rgb):
    """Independent WCAG pipeline for cross-checking."""
    def lin(c):
        s = c / 255
        return s / 12.92 if s <= 0.04045 else math.pow((s + 0.055) / 1.055, 2.4)
    r, g, b = rgb
    return 0.2126 * lin(r) + 0.7152 * lin(g) + 0.0722 * lin(b)


def test_white_black_is_exactly_21():
    assert contrast_ratio(WHITE, BLACK) == 21.0


def test_identity_is_one():
    for c in [(0, 0, 0), (255, 255, 255), (12, 200, 99)]:
        assert contrast_ratio(c, c) == 1.0


def test_mid_grey_matches_hand_computation():
    grey = (128, 128, 128)
    expected = (hand_luminance(grey) + 0.05) / (hand_luminance(BLACK) + 0.05)
    assert contrast_ratio(grey, BLACK) == pytest.approx(expected, abs=1e-12)


def test_symmetric():
    a, b = (10, 40, 200), (250, 240, 10)
    assert contrast_ratio(a, b) == contrast_ratio(b, a)


def test_channel_domain():
    with pytest.raises(ValueError):
        contrast_ratio((-1, 0, 0), BLACK)
    with pytest.raises(ValueError):
        contrast_ratio((0, 0, 300), BLACK)


def test_lighten_keeps_compliant_color_unchanged():
    c = (200, 220, 210)
    assert contrast_ratio(c, BLACK) >= 4.5
    assert lighten_to_contrast(c, 4.5) == c


def test_lighten_near_black():
    out = lighten_to_contrast((10, 10, 10), 4.5)
    assert contrast_ratio(out, BLACK) >= 4.5 - 1e-9
    assert out[0] == out[1] == out[2]  # hue-neutral input stays neutral


def test_min_contrast_one_is_vacuous():
    for c in [(0, 0, 0), (5, 9, 3)]:
        assert lighten_to_contrast(c, 1.0) == c


def test_lighten_random_palettes():
    rng = random.Random(99)
    for _ in range(300):
        c = (rng.randrange(256), rng.randrange(256), rng.randrange(256))
        out = lighten_to_contrast(c, 4.5)
        assert contrast_ratio(out, BLACK) >= 4.5 - 1e-9
        # idempotent
        assert lighten_to_contrast(out, 4.5) == out
        # hue preserved (greys carry no hue)
        h0, l0, s0 = colorsys.rgb_to_hls(*(ch / 255 for ch in c))
        h1, l1, s1 = colorsys.rgb_to_hls(*(ch / 255 for ch in out))
        if s0 > 1e-9 and s1 > 1e-9:
            dh = abs(h0 - h1)
            assert min(dh, 1 - dh) < 0.02
        assert l1 >= l0 - 1e-9


def test_min_contrast_domain():
    with pytest.raises(ValueError):
        lighten_to_contrast((0, 0, 0), 0.5)
    with pytest.raises(ValueError):
        lighten_to_contrast((0, 0, 0), 22)


def test_hex_round_trip():
    assert parse_hex("#A1B2C3") == (0xA1, 0xB2, 0xC3)
    assert to_hex((0xA1, 0xB2, 0xC3)) == "#A1B2C3"
    with pytest.raises(ValueError):
        parse_hex("#FFF")
