"""Point-source radiation field model.

Dose rates are Sv/h throughout; distances are meters. Time integration
(exposure module) converts to Sv/s at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Distance clamp before squaring. Keeps the dose finite at a source and the
# color mapping stable; also defines the cap of the default intensity range.
EPS_DISTANCE_M = 0.05


@dataclass(frozen=True)
class RadiationSource:
    """Point emitter with a dose rate measured at 1 m (Sv/h)."""

    position: tuple[float, float, float]
    rate_at_1m: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.position):
            raise ValueError("source position must be finite")
        if not (math.isfinite(self.rate_at_1m) and self.rate_at_1m > 0):
            raise ValueError("rate_at_1m must be > 0")

    def position_array(self) -> np.ndarray:
        return np.array(self.position, dtype=float)


@dataclass(frozen=True)
class IntensityRange:
    """Dose-rate domain (Sv/h) mapped onto the color scale."""

    i_min: float
    i_max: float

    def __post_init__(self):
        if not (0 < self.i_min < self.i_max):
            raise ValueError("intensity range requires 0 < i_min < i_max")


def dose_rate(point: Sequence[float], sources: Sequence[RadiationSource]) -> float:
    """Accumulated dose rate (Sv/h) at a point: sum of r_i / max(d_i, eps)^2."""
    if not sources:
        raise ValueError("no sources")
    px, py, pz = (float(c) for c in point)
    if not (math.isfinite(px) and math.isfinite(py) and math.isfinite(pz)):
        raise ValueError("query point must be finite")
    total = 0.0
    for s in sources:
        dx = px - s.position[0]
        dy = py - s.position[1]
        dz = pz - s.position[2]
        d = math.sqrt(dx * dx + dy * dy + dz * dz)
        if d < EPS_DISTANCE_M:
            d = EPS_DISTANCE_M
        total += s.rate_at_1m / (d * d)
    return total


def normalized_intensity(i: float, rng: IntensityRange) -> float:
    """Map a dose rate into [0, 1] on a log scale over the range.

    The color response is exponential in distance, so equal color steps
    correspond to equal dose-rate ratios.
    """
    if not (math.isfinite(i) and i > 0):
        raise ValueError("dose rate must be > 0")
    u = (math.log(i) - math.log(rng.i_min)) / (math.log(rng.i_max) - math.log(rng.i_min))
    if u < 0.0:
        return 0.0
    if u > 1.0:
        return 1.0
    return u


def weighted_source_centroid(
    point: Sequence[float], sources: Sequence[RadiationSource]
) -> np.ndarray:
    """Average source position weighted by each source's local contribution.

    Weights are r_i / max(d_i, eps)^2 evaluated at the queried point, so the
    sources dominating the local dose also dominate the direction cue.
    """
    if not sources:
        raise ValueError("no sources")
    px, py, pz = (float(c) for c in point)
    acc = np.zeros(3)
    wsum = 0.0
    for s in sources:
        dx = px - s.position[0]
        dy = py - s.position[1]
        dz = pz - s.position[2]
        d = math.sqrt(dx * dx + dy * dy + dz * dz)
        if d < EPS_DISTANCE_M:
            d = EPS_DISTANCE_M
        w = s.rate_at_1m / (d * d)
        acc += w * s.position_array()
        wsum += w
    return acc / wsum


def default_range(
    sources: Sequence[RadiationSource], override: IntensityRange | None = None
) -> IntensityRange:
    """Intensity range making the strongest single source reach u=0 at 2 m.

    i_min = max rate / 4 (inverse square at 2 m); i_max caps at the clamped
    minimum distance, max rate / eps^2.
    """
    if override is not None:
        return override
    if not sources:
        raise ValueError("no sources")
    top = max(s.rate_at_1m for s in sources)
    return IntensityRange(i_min=top / 4.0, i_max=top / (EPS_DISTANCE_M * EPS_DISTANCE_M))
