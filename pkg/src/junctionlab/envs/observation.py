"""Ego-centric V x 7 observation matrices.

Row layout: [p, x, y, v_x, v_y, cos_h, sin_h].  Row 0 is the ego vehicle with
absolute (normalized) position; the following rows are the nearest
surrounding vehicles with ego-relative positions, sorted by distance.  Rows
without a vehicle have p = 0 and are all-zero.  Every feature is scaled into
[-1, 1] by the declared ranges and clipped.
"""

from __future__ import annotations

import math

import numpy as np

from ..geometry import VehicleState

FEATURES = ("p", "x", "y", "vx", "vy", "cos_h", "sin_h")
FEATURE_COUNT = len(FEATURES)
POSITION_RANGE = 100.0  # m
SPEED_RANGE = 20.0      # m/s


def _clip(value: float) -> float:
    return min(max(value, -1.0), 1.0)


def _feature_row(state: VehicleState, ref_x: float, ref_y: float) -> list[float]:
    vx = state.speed * state.pose.cos_h
    vy = state.speed * state.pose.sin_h
    return [
        1.0,
        _clip((state.pose.x - ref_x) / POSITION_RANGE),
        _clip((state.pose.y - ref_y) / POSITION_RANGE),
        _clip(vx / SPEED_RANGE),
        _clip(vy / SPEED_RANGE),
        state.pose.cos_h,
        state.pose.sin_h,
    ]


def rank_others(ego: VehicleState, others: list[VehicleState],
                limit: int) -> list[int]:
    """Indices of the limit-1 nearest surrounding vehicles, by distance then
    stable input order; this fixes the observation row layout."""
    ranked = sorted(
        ((math.hypot(v.pose.x - ego.pose.x, v.pose.y - ego.pose.y), idx)
         for idx, v in enumerate(others)),
    )
    return [idx for _, idx in ranked[: limit - 1]]


def build_observation(ego: VehicleState, others: list[VehicleState],
                      limit: int) -> np.ndarray:
    """Assemble the V x 7 matrix for ``limit`` rows (ego + limit-1 nearest)."""
    obs = np.zeros((limit, FEATURE_COUNT), dtype=np.float64)
    obs[0] = _feature_row(ego, 0.0, 0.0)
    for row, idx in enumerate(rank_others(ego, others, limit), start=1):
        obs[row] = _feature_row(others[idx], ego.pose.x, ego.pose.y)
    return obs
