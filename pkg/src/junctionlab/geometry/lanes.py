"""Lane curves and the road network graph.

Lanes are centerline curves parameterized by arc length (``longitudinal``,
metres from the lane start).  The lateral coordinate is signed, positive to
the *left* of the direction of travel.  A road network is a directed graph of
named lanes with per-lane right-of-way priorities and optional left/right
neighbours for lane changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .pose import TAU, Pose, normalize_heading


class LaneCoords(NamedTuple):
    """Projection of a point onto a lane curve."""

    longitudinal: float
    lateral: float
    within_extent: bool


class StraightLane:
    def __init__(self, start: tuple[float, float], heading: float, length: float,
                 width: float = 4.0):
        if length <= 0.0:
            raise ValueError(f"lane length must be positive, got {length}")
        self.start = (float(start[0]), float(start[1]))
        self.heading = normalize_heading(heading)
        self.length = float(length)
        self.width = float(width)
        self._dir = (math.cos(self.heading), math.sin(self.heading))

    def position(self, longitudinal: float, lateral: float = 0.0) -> tuple[float, float]:
        dx, dy = self._dir
        # left normal is the direction rotated +90 degrees
        return (self.start[0] + longitudinal * dx - lateral * dy,
                self.start[1] + longitudinal * dy + lateral * dx)

    def heading_at(self, longitudinal: float) -> float:
        return self.heading

    def local_coordinates(self, x: float, y: float) -> LaneCoords:
        dx, dy = self._dir
        px, py = x - self.start[0], y - self.start[1]
        s = px * dx + py * dy
        lat = -px * dy + py * dx
        within = 0.0 <= s <= self.length
        return LaneCoords(min(max(s, 0.0), self.length), lat, within)

    def end_pose(self) -> Pose:
        ex, ey = self.position(self.length)
        return Pose(ex, ey, self.heading)


class ArcLane:
    """Circular-arc lane.

    ``sweep`` is the signed angle subtended by the centerline: positive for
    counter-clockwise travel, negative for clockwise.  |sweep| must stay below
    a full turn; projections use the principal angle.
    """

    def __init__(self, center: tuple[float, float], radius: float,
                 start_angle: float, sweep: float, width: float = 4.0):
        if radius <= 0.0:
            raise ValueError(f"arc radius must be positive, got {radius}")
        if not 0.0 < abs(sweep) < TAU:
            raise ValueError(f"arc sweep must be in (0, 2*pi), got {sweep}")
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        self.start_angle = normalize_heading(start_angle)
        self.sweep = float(sweep)
        self.width = float(width)
        self.ccw = sweep > 0.0
        self.length = self.radius * abs(self.sweep)

    def _angle_at(self, longitudinal: float) -> float:
        step = longitudinal / self.radius
        return self.start_angle + (step if self.ccw else -step)

    def position(self, longitudinal: float, lateral: float = 0.0) -> tuple[float, float]:
        phi = self._angle_at(longitudinal)
        # left of travel points toward the center on CCW arcs, away on CW ones
        r = self.radius - lateral if self.ccw else self.radius + lateral
        return (self.center[0] + r * math.cos(phi), self.center[1] + r * math.sin(phi))

    def heading_at(self, longitudinal: float) -> float:
        phi = self._angle_at(longitudinal)
        return normalize_heading(phi + (math.pi / 2.0 if self.ccw else -math.pi / 2.0))

    def local_coordinates(self, x: float, y: float) -> LaneCoords:
        vx, vy = x - self.center[0], y - self.center[1]
        dist = math.hypot(vx, vy)
        phi = math.atan2(vy, vx)
        rel = normalize_heading(phi - self.start_angle)
        progress = rel if self.ccw else -rel
        if progress < 0.0:
            progress += TAU
        s = self.radius * progress
        within = s <= self.length
        if not within:
            # past-the-end angles closer to the start wrap back to s=0
            gap_past = progress - abs(self.sweep)
            gap_before = TAU - progress
            s = 0.0 if gap_before < gap_past else self.length
        lat = self.radius - dist if self.ccw else dist - self.radius
        return LaneCoords(s, lat, within)

    def end_pose(self) -> Pose:
        ex, ey = self.position(self.length)
        return Pose(ex, ey, self.heading_at(self.length))


Lane = StraightLane | ArcLane


def lane_frame(pose: Pose, lane: Lane) -> LaneCoords:
    """Project a pose onto a lane curve (clamped, flagged when off-extent)."""
    return lane.local_coordinates(pose.x, pose.y)


@dataclass
class RoadNetwork:
    """Directed graph of named lanes with priorities and lane-change neighbours."""

    _lanes: dict[str, Lane] = field(default_factory=dict)
    _successors: dict[str, tuple[str, ...]] = field(default_factory=dict)
    _priority: dict[str, int] = field(default_factory=dict)
    _left: dict[str, str] = field(default_factory=dict)
    _right: dict[str, str] = field(default_factory=dict)

    def add_lane(self, lane_id: str, lane: Lane, priority: int = 0) -> None:
        if lane_id in self._lanes:
            raise ValueError(f"duplicate lane id {lane_id!r}")
        self._lanes[lane_id] = lane
        self._successors[lane_id] = ()
        self._priority[lane_id] = int(priority)

    def link(self, from_id: str, to_id: str) -> None:
        for lane_id in (from_id, to_id):
            if lane_id not in self._lanes:
                raise KeyError(f"unknown lane id {lane_id!r}")
        self._successors[from_id] = self._successors[from_id] + (to_id,)

    def set_neighbours(self, lane_id: str, left: str | None = None,
                       right: str | None = None) -> None:
        if left is not None:
            self._left[lane_id] = left
        if right is not None:
            self._right[lane_id] = right

    def lane(self, lane_id: str) -> Lane:
        return self._lanes[lane_id]

    def has_lane(self, lane_id: str) -> bool:
        return lane_id in self._lanes

    def lane_ids(self) -> tuple[str, ...]:
        return tuple(self._lanes)

    def successors(self, lane_id: str) -> tuple[str, ...]:
        return self._successors[lane_id]

    def priority(self, lane_id: str) -> int:
        return self._priority[lane_id]

    def left_of(self, lane_id: str) -> str | None:
        return self._left.get(lane_id)

    def right_of(self, lane_id: str) -> str | None:
        return self._right.get(lane_id)

    def next_on_route(self, lane_id: str, route: tuple[str, ...]) -> str | None:
        """Next lane after ``lane_id``: the route's choice if listed, else the
        first successor, else None (terminal lane)."""
        if lane_id in route:
            idx = route.index(lane_id)
            if idx + 1 < len(route):
                return route[idx + 1]
        succ = self._successors.get(lane_id, ())
        return succ[0] if succ else None

    def polyline_dump(self, step: float = 1.0) -> dict:
        """Debug dump of lane centerlines as JSON-ready polylines."""
        lanes = []
        for lane_id, lane in self._lanes.items():
            n = max(2, int(math.ceil(lane.length / step)) + 1)
            points = []
            for i in range(n):
                s = lane.length * i / (n - 1)
                x, y = lane.position(s)
                points.append([round(x, 3), round(y, 3)])
            lanes.append({
                "id": lane_id,
                "kind": "arc" if isinstance(lane, ArcLane) else "straight",
                "length": round(lane.length, 3),
                "width": lane.width,
                "priority": self._priority[lane_id],
                "successors": list(self._successors[lane_id]),
                "points": points,
            })
        return {"schema": "lanes/v1", "lanes": lanes}
