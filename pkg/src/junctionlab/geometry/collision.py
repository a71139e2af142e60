"""Oriented-rectangle collision tests (separating-axis theorem).

Pure scalar math; these run in the simulation inner loop, so keep them free
of numpy call overhead.
"""

from __future__ import annotations

import math

from .kinematics import VehicleState
from .pose import Pose

Corners = tuple[tuple[float, float], ...]


def footprint_corners(pose: Pose, length: float, width: float) -> Corners:
    """Rectangle corners around the pose (footprint center), CCW order."""
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    hl, hw = 0.5 * length, 0.5 * width
    lx, ly = hl * c, hl * s
    wx, wy = -hw * s, hw * c
    x, y = pose.x, pose.y
    return (
        (x + lx + wx, y + ly + wy),
        (x - lx + wx, y - ly + wy),
        (x - lx - wx, y - ly - wy),
        (x + lx - wx, y + ly - wy),
    )


def vehicle_corners(state: VehicleState) -> Corners:
    return footprint_corners(state.pose, state.length, state.width)


def _separated_on_axes(a: Corners, b: Corners) -> bool:
    """True if some edge normal of ``a`` separates the two convex polygons."""
    n = len(a)
    for i in range(n):
        x1, y1 = a[i]
        x2, y2 = a[(i + 1) % n]
        # outward normal of edge (x1,y1)->(x2,y2); no normalization needed
        ax, ay = y2 - y1, x1 - x2
        amin = amax = a[0][0] * ax + a[0][1] * ay
        for px, py in a[1:]:
            p = px * ax + py * ay
            if p < amin:
                amin = p
            elif p > amax:
                amax = p
        bmin = bmax = b[0][0] * ax + b[0][1] * ay
        for px, py in b[1:]:
            p = px * ax + py * ay
            if p < bmin:
                bmin = p
            elif p > bmax:
                bmax = p
        if amax < bmin or bmax < amin:
            return True
    return False


def convex_polygons_collide(a: Corners, b: Corners) -> bool:
    return not (_separated_on_axes(a, b) or _separated_on_axes(b, a))


def footprints_collide(a: VehicleState, b: VehicleState) -> bool:
    """Exact overlap test between two oriented vehicle rectangles."""
    # cheap circle pre-check on bounding radii
    ra = 0.5 * math.hypot(a.length, a.width)
    rb = 0.5 * math.hypot(b.length, b.width)
    dx = a.pose.x - b.pose.x
    dy = a.pose.y - b.pose.y
    if dx * dx + dy * dy > (ra + rb) * (ra + rb):
        return False
    return convex_polygons_collide(vehicle_corners(a), vehicle_corners(b))


def convex_hull(points: list[tuple[float, float]]) -> Corners:
    """Monotone-chain convex hull, CCW, no duplicate endpoint."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)

    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


def swept_rectangles_collide(a0: Corners, a1: Corners, b0: Corners, b1: Corners) -> bool:
    """Continuous-ish overlap test across one sampling interval.

    Works in the relative frame: holding ``a`` at its interval-start pose,
    ``b`` is swept by the relative displacement of the two centers.  For
    straight-line motion this is exact (unlike testing the union of both
    absolute sweeps, which false-positives when the two bodies pass through
    the same corridor at different times); rotation within an interval only
    contributes a centimetre-scale error at road speeds.
    """
    if convex_polygons_collide(a0, b0):
        return True
    ax = sum(p[0] for p in a1) - sum(p[0] for p in a0)
    ay = sum(p[1] for p in a1) - sum(p[1] for p in a0)
    bx = sum(p[0] for p in b1) - sum(p[0] for p in b0)
    by = sum(p[1] for p in b1) - sum(p[1] for p in b0)
    rel_x = (bx - ax) / len(b0)
    rel_y = (by - ay) / len(b0)
    translated = [(px + rel_x, py + rel_y) for px, py in b0]
    swept = convex_hull(list(b0) + translated)
    return convex_polygons_collide(a0, swept)
