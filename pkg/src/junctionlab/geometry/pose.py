"""Planar poses.

Coordinates are metres in a fixed world frame: x east, y north.  Headings are
radians, counter-clockwise from the +x axis, always normalized to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TAU = 2.0 * math.pi


def normalize_heading(heading: float) -> float:
    """Wrap an angle into (-pi, pi].  Idempotent."""
    h = math.remainder(heading, TAU)
    # math.remainder returns values in [-pi, pi]; fold the open end.
    if h <= -math.pi:
        h += TAU
    return h


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", normalize_heading(self.heading))

    @property
    def cos_h(self) -> float:
        return math.cos(self.heading)

    @property
    def sin_h(self) -> float:
        return math.sin(self.heading)

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)
