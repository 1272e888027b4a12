"""Color encodings: continuous / banded / transparent lookup on a 256-entry LUT.

The LUT ships as a CSV fixture (256 lines of "R,G,B") so no colormap library
is needed at runtime; other palettes drop in by swapping the file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

KINDS = ("continuous", "banded", "transparent", "circle", "hex", "arrow")
STENCIL_KINDS = ("circle", "hex", "arrow")

ALPHA_OPAQUE = 1.0
ALPHA_TRANSPARENT = 0.33

# Default meters-per-tile for the stencil kinds; non-canonical, sized so the
# three shapes read at a similar visual scale.
DEFAULT_TILE_SCALE = {"circle": 0.30, "hex": 0.30, "arrow": 0.35}


@dataclass(frozen=True)
class ColorLut:
    """256 RGBA entries, 8-bit channels, alpha fixed at 255."""

    entries: np.ndarray
    name: str = "viridis"

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.uint8)
        if e.shape != (256, 4):
            raise ValueError("LUT must have exactly 256 RGBA entries")
        if not np.all(e[:, 3] == 255):
            raise ValueError("LUT entries carry no alpha; alpha is applied by the encoding")
        object.__setattr__(self, "entries", e)

    @property
    def rgb(self) -> np.ndarray:
        return self.entries[:, :3]


@dataclass(frozen=True)
class EncodingSpec:
    """One of the six visual encodings plus its parameters."""

    kind: str
    bands: int = 8
    alpha: float | None = None
    tile_scale: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown encoding kind: {self.kind!r}")
        if self.bands < 2:
            raise ValueError("bands must be >= 2")
        if self.alpha is None:
            default = ALPHA_TRANSPARENT if self.kind == "transparent" else ALPHA_OPAQUE
            object.__setattr__(self, "alpha", default)
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")
        if self.tile_scale is not None and self.tile_scale <= 0:
            raise ValueError("tile_scale must be > 0")

    @property
    def is_stencil(self) -> bool:
        return self.kind in STENCIL_KINDS

    @property
    def effective_tile_scale(self) -> float:
        if self.tile_scale is not None:
            return self.tile_scale
        return DEFAULT_TILE_SCALE.get(self.kind, 0.30)


def make_spec(kind: str, tile_scale: float | None = None) -> EncodingSpec:
    """Encoding spec with the default parameters for the given kind."""
    return EncodingSpec(kind=kind, bands=8, tile_scale=tile_scale)


def load_viridis() -> ColorLut:
    """Load the bundled Viridis fixture (256 lines of R,G,B decimal CSV)."""
    text = resources.files("radvis").joinpath("data/viridis_256.csv").read_text()
    return load_lut_text(text, name="viridis")


def load_lut_text(text: str, name: str = "custom") -> ColorLut:
    rows = []
    for line in text.strip().splitlines():
        r, g, b = (int(v) for v in line.split(","))
        rows.append((r, g, b, 255))
    if len(rows) != 256:
        raise ValueError(f"LUT file must have 256 lines, got {len(rows)}")
    return ColorLut(entries=np.array(rows, dtype=np.uint8), name=name)


def sample_continuous(u: float, lut: ColorLut) -> tuple[int, int, int, int]:
    """Linear interpolation between the two nearest LUT entries at u*255."""
    if not (0.0 <= u <= 1.0):
        raise ValueError("u must be in [0, 1]")
    pos = u * 255.0
    i0 = int(math.floor(pos))
    if i0 >= 255:
        r, g, b = (int(c) for c in lut.rgb[255])
        return r, g, b, 255
    t = pos - i0
    c0 = lut.rgb[i0]
    c1 = lut.rgb[i0 + 1]
    out = tuple(int(math.floor(float(c0[k]) * (1.0 - t) + float(c1[k]) * t + 0.5)) for k in range(3))
    return out[0], out[1], out[2], 255


def band_quantize(u: float, n: int) -> float:
    """Snap u to the center of its band; exactly n distinct outputs."""
    if n < 2:
        raise ValueError("bands must be >= 2")
    capped = min(u, 1.0 - 1e-9)
    return (math.floor(capped * n) + 0.5) / n


def shade_color(u: float, spec: EncodingSpec, lut: ColorLut) -> tuple[int, int, int, int]:
    """Color a normalized intensity. Banded routes through band centers;
    transparent carries alpha 0.33; all other kinds are opaque."""
    if spec.kind == "banded":
        u = band_quantize(u, spec.bands)
    r, g, b, _ = sample_continuous(u, lut)
    a = int(math.floor(spec.alpha * 255.0 + 0.5))
    return r, g, b, a
