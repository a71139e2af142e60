"""Collision tests, including the dense point-sampling oracle sweep."""

import math

import numpy as np
import pytest

from junctionlab.geometry import (
    Pose,
    VehicleState,
    convex_hull,
    convex_polygons_collide,
    footprint_corners,
    footprints_collide,
    swept_rectangles_collide,
)


def _vehicle(x, y, heading, length=5.0, width=2.0):
    return VehicleState(pose=Pose(x, y, heading), speed=0.0, length=length,
                        width=width)


def test_identical_poses_collide():
    a = _vehicle(1.0, 2.0, 0.3)
    assert footprints_collide(a, a)


def test_lateral_separation_beyond_half_widths():
    a = _vehicle(0.0, 0.0, 0.0)
    b = _vehicle(0.0, 2.001, 0.0)  # offset just past (width_a+width_b)/2
    assert not footprints_collide(a, b)
    c = _vehicle(0.0, 1.999, 0.0)
    assert footprints_collide(a, c)


def test_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = _vehicle(*rng.uniform(-4, 4, size=2), rng.uniform(-math.pi, math.pi))
        b = _vehicle(*rng.uniform(-4, 4, size=2), rng.uniform(-math.pi, math.pi))
        assert footprints_collide(a, b) == footprints_collide(b, a)


def _point_in_rect(px, py, pose, length, width):
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    dx, dy = px - pose.x, py - pose.y
    lon = dx * c + dy * s
    lat = -dx * s + dy * c
    return abs(lon) <= length / 2 and abs(lat) <= width / 2


def _sampling_overlap_margin(a: VehicleState, b: VehicleState, step=0.05):
    """Dense grid oracle: samples rectangle `a` and returns (overlap, margin).

    margin is how deep the sampled overlap reaches (max distance of an
    overlapping sample from b's boundary) when overlapping, or the smallest
    sampled distance from a's samples to b's rectangle when disjoint.
    """
    c, s = math.cos(a.pose.heading), math.sin(a.pose.heading)
    n_lon = int(a.length / step) + 1
    n_lat = int(a.width / step) + 1
    overlap_depth = 0.0
    min_outside = math.inf
    cb, sb = math.cos(b.pose.heading), math.sin(b.pose.heading)
    for i in range(n_lon):
        lon = -a.length / 2 + a.length * i / (n_lon - 1)
        for j in range(n_lat):
            lat = -a.width / 2 + a.width * j / (n_lat - 1)
            px = a.pose.x + lon * c - lat * s
            py = a.pose.y + lon * s + lat * c
            dx, dy = px - b.pose.x, py - b.pose.y
            blon = dx * cb + dy * sb
            blat = -dx * sb + dy * cb
            d_lon = abs(blon) - b.length / 2
            d_lat = abs(blat) - b.width / 2
            if d_lon <= 0 and d_lat <= 0:
                overlap_depth = max(overlap_depth, min(-d_lon, -d_lat))
            else:
                min_outside = min(min_outside, math.hypot(max(d_lon, 0.0),
                                                          max(d_lat, 0.0)))
    if overlap_depth > 0.0:
        return True, overlap_depth
    return False, min_outside


def test_random_pairs_match_point_sampling_oracle():
    rng = np.random.default_rng(42)
    checked = 0
    for _ in range(1000):
        a = _vehicle(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)),
                     float(rng.uniform(-math.pi, math.pi)))
        b = _vehicle(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)),
                     float(rng.uniform(-math.pi, math.pi)))
        oracle_overlap, margin = _sampling_overlap_margin(a, b)
        if margin <= 0.1:
            continue  # marginal case, oracle resolution insufficient
        checked += 1
        assert footprints_collide(a, b) == oracle_overlap
    assert checked > 600  # the sweep must actually exercise the comparison


def test_convex_hull_square():
    pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]
    hull = convex_hull(pts)
    assert set(hull) == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}
    assert len(hull) == 4


def test_swept_collision_catches_tunnelling():
    # two rectangles crossing between samples: static tests miss the contact,
    # the swept test must catch it
    a0 = footprint_corners(Pose(-6.0, 0.0, 0.0), 5.0, 2.0)
    a1 = footprint_corners(Pose(6.0, 0.0, 0.0), 5.0, 2.0)
    b0 = footprint_corners(Pose(0.0, -6.0, math.pi / 2), 5.0, 2.0)
    b1 = footprint_corners(Pose(0.0, 6.0, math.pi / 2), 5.0, 2.0)
    assert not convex_polygons_collide(a0, b0)
    assert not convex_polygons_collide(a1, b1)
    assert swept_rectangles_collide(a0, a1, b0, b1)


def test_swept_collision_respects_clear_separation():
    a0 = footprint_corners(Pose(-6.0, 10.0, 0.0), 5.0, 2.0)
    a1 = footprint_corners(Pose(6.0, 10.0, 0.0), 5.0, 2.0)
    b0 = footprint_corners(Pose(-6.0, -10.0, 0.0), 5.0, 2.0)
    b1 = footprint_corners(Pose(6.0, -10.0, 0.0), 5.0, 2.0)
    assert not swept_rectangles_collide(a0, a1, b0, b1)
