"""WCAG contrast arithmetic and bar-color normalization.

Bars get a black thickened outline when highlighted, so every bar color must
keep a minimum contrast ratio against black. Colors are normalized by raising
HLS lightness (hue untouched) until the quantized sRGB color meets the target.
"""
from __future__ import annotations

import colorsys

RGB = tuple[int, int, int]

BLACK: RGB = (0, 0, 0)
WHITE: RGB = (255, 255, 255)


def _linearize(channel: int) -> float:
    s = channel / 255.0
    return s / 12.92 if s <= 0.04045 else ((s + 0.055) / 1.055) ** 2.4


def relative_luminance(color: RGB) -> float:
    r, g, b = color
    return 0.2126 * _linearize(r) + 0.7152 * _linearize(g) + 0.0722 * _linearize(b)


def contrast_ratio(c1: RGB, c2: RGB) -> float:
    """WCAG contrast ratio in [1, 21]; symmetric in its arguments."""
    for c in (c1, c2):
        if any(not (0 <= ch <= 255) for ch in c):
            raise ValueError(f"channels must be in [0, 255]: {c}")
    l1, l2 = relative_luminance(c1), relative_luminance(c2)
    lighter, darker = max(l1, l2), min(l1, l2)
    return (lighter + 0.05) / (darker + 0.05)


def _quantize(rgb01: tuple[float, float, float]) -> RGB:
    return tuple(min(255, max(0, round(ch * 255.0))) for ch in rgb01)  # type: ignore[return-value]


def lighten_to_contrast(color: RGB, min_contrast: float, against: RGB = BLACK) -> RGB:
    """Smallest lightness raise that meets ``min_contrast`` against ``against``.

    Hue and saturation are preserved. Already-compliant colors are returned
    unchanged. Lightness 1 is white (ratio 21 against black), so any ratio a
    color can reach at all is reachable by lightness alone.
    """
    if not 1.0 <= min_contrast <= 21.0:
        raise ValueError("min_contrast must be within [1, 21]")
    if contrast_ratio(color, against) >= min_contrast:
        return color
    h, l0, s = colorsys.rgb_to_hls(color[0] / 255.0, color[1] / 255.0, color[2] / 255.0)

    def ok(l: float) -> bool:
        return contrast_ratio(_quantize(colorsys.hls_to_rgb(h, l, s)), against) >= min_contrast

    lo, hi = l0, 1.0
    if not ok(hi):
        # unreachable for against=black; guard for odd reference colors
        return _quantize(colorsys.hls_to_rgb(h, 1.0, s))
    for _ in range(60):
        mid = (lo + hi) / 2.0
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return _quantize(colorsys.hls_to_rgb(h, hi, s))


def parse_hex(text: str) -> RGB:
    t = text.strip().lstrip("#")
    if len(t) != 6:
        raise ValueError(f"expected #RRGGBB, got {text!r}")
    return (int(t[0:2], 16), int(t[2:4], 16), int(t[4:6], 16))


def to_hex(color: RGB) -> str:
    return "#{:02X}{:02X}{:02X}".format(*color)
