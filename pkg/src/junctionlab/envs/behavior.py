"""Scripted surrounding-vehicle behaviour.

Three layers, combined by taking the most cautious acceleration:

* proportional speed tracking toward each vehicle's target speed;
* gap keeping behind the chain leader (nearest vehicle ahead on the same
  lane chain);
* predict-and-yield: when the three-second constant-speed projections of two
  conflicting vehicles intersect, the lower-priority one brakes until the
  prediction clears.  Vehicles already inside the junction do not yield.

Steering always tracks the assigned lane centerline (curvature feedforward
plus heading and cross-track feedback).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from ..geometry import (
    ACCEL_MAX,
    ACCEL_MIN,
    STEERING_MAX,
    WHEELBASE,
    ArcLane,
    Pose,
    RoadNetwork,
    footprint_corners,
    convex_polygons_collide,
    swept_rectangles_collide,
)
from ..geometry.lanes import Lane

if TYPE_CHECKING:
    from .core import Vehicle

PREDICTION_HORIZON = 3.0   # s
PREDICTION_DT = 0.2        # s; swept-hull bridging keeps coarse sampling sound
YIELD_BRAKE = -5.0         # m/s^2 applied while yielding
LEADER_LOOKAHEAD = 45.0    # m along the lane chain
GAP_STANDSTILL = 3.0       # m bumper-to-bumper at rest
GAP_TIME = 1.0             # s time headway


def speed_tracking_accel(speed: float, target: float, dt: float) -> float:
    """Dead-beat proportional control: lands exactly on the target once the
    gap fits inside one step, so max-speed reward conditions are reachable."""
    return min(max((target - speed) / dt, ACCEL_MIN), ACCEL_MAX)


def gap_keeping_accel(gap: float, speed: float, leader_speed: float) -> float:
    desired = GAP_STANDSTILL + GAP_TIME * speed
    accel = 1.5 * (gap - desired) + 1.2 * (leader_speed - speed)
    return min(max(accel, ACCEL_MIN), ACCEL_MAX)


def steering_toward_lane(pose: Pose, speed: float, lane: Lane,
                         longitudinal: float, lateral: float) -> float:
    """Curvature feedforward + heading error + cross-track (Stanley-style)."""
    if isinstance(lane, ArcLane):
        curvature = (1.0 if lane.ccw else -1.0) / lane.radius
        feedforward = math.atan(WHEELBASE * curvature)
    else:
        feedforward = 0.0
    lane_heading = lane.heading_at(longitudinal)
    heading_error = math.remainder(lane_heading - pose.heading, math.tau)
    cross_track = math.atan2(-1.5 * lateral, speed + 2.0)
    steering = feedforward + heading_error + cross_track
    return min(max(steering, -STEERING_MAX), STEERING_MAX)


# ---------------------------------------------------------------------------
# lane chains and leader search
# ---------------------------------------------------------------------------

def lane_chain(network: RoadNetwork, lane_id: str, route: tuple[str, ...],
               from_longitudinal: float = 0.0,
               lookahead: float = LEADER_LOOKAHEAD) -> tuple[tuple[str, float], ...]:
    """Downstream lane sequence as (lane_id, chain offset of lane start),
    covering ``lookahead`` metres ahead of ``from_longitudinal``."""
    chain: list[tuple[str, float]] = [(lane_id, 0.0)]
    offset = network.lane(lane_id).length
    current = lane_id
    while offset - from_longitudinal < lookahead:
        nxt = network.next_on_route(current, route)
        if nxt is None or any(nxt == lid for lid, _ in chain):
            break
        chain.append((nxt, offset))
        offset += network.lane(nxt).length
        current = nxt
    return tuple(chain)


@dataclass(frozen=True)
class Obstacle:
    """Nearest body blocking the chain ahead: a same-route leader, a vehicle
    queued on a sibling connector, or a crossing/crashed blocker."""

    vehicle: "Vehicle"
    bumper_gap: float
    speed_along: float


def project_obstacle(vehicle: "Vehicle", other: "Vehicle",
                     chain: tuple[tuple[str, float], ...],
                     network: RoadNetwork) -> Obstacle | None:
    """Project ``other`` onto this vehicle's chain; None when off the path."""
    state = vehicle.state
    my_s = state.longitudinal
    for lane_id, offset in chain:
        if offset - my_s > LEADER_LOOKAHEAD:
            break
        lane = network.lane(lane_id)
        o_state = other.state
        coords = lane.local_coordinates(o_state.pose.x, o_state.pose.y)
        if not coords.within_extent or abs(coords.lateral) > 3.8:
            continue
        heading_delta = math.remainder(
            o_state.pose.heading - lane.heading_at(coords.longitudinal), math.tau)
        cos_d, sin_d = math.cos(heading_delta), math.sin(heading_delta)
        # contact is possible when the other's footprint can reach across the
        # lateral offset: my half width plus its heading-dependent half reach
        lateral_reach = 0.5 * state.width + 0.2 \
            + 0.5 * (abs(sin_d) * o_state.length + abs(cos_d) * o_state.width)
        if abs(coords.lateral) > lateral_reach:
            continue
        distance = offset + coords.longitudinal - my_s
        if distance <= 0.1 or distance > LEADER_LOOKAHEAD:
            continue
        half_extent = 0.5 * (abs(cos_d) * o_state.length
                             + abs(sin_d) * o_state.width)
        gap = distance - 0.5 * state.length - half_extent
        speed_along = max(o_state.speed * cos_d, 0.0)
        return Obstacle(other, gap, speed_along)
    return None


def surrounding_policy(vehicle: "Vehicle", network: RoadNetwork, dt: float,
                       obstacle: Obstacle | None,
                       yielding: bool) -> "BicycleCommand":
    """Scripted-vehicle control for one physics step.

    Longitudinal: track the target speed, cap by gap keeping behind the
    chain obstacle, and brake while yielding.  Lateral: steer onto the
    assigned lane centerline.  Off-network vehicles cruise straight.
    """
    from ..geometry import BicycleCommand

    state = vehicle.state
    accel = speed_tracking_accel(state.speed, vehicle.target_speed, dt)
    if state.lane_id is None:
        return BicycleCommand.clipped(accel, 0.0)
    lane = network.lane(state.lane_id)
    coords = lane.local_coordinates(state.pose.x, state.pose.y)
    steering = steering_toward_lane(state.pose, state.speed, lane,
                                    coords.longitudinal, coords.lateral)
    if obstacle is not None:
        accel = min(accel, gap_keeping_accel(obstacle.bumper_gap, state.speed,
                                             obstacle.speed_along))
    if yielding:
        accel = min(accel, YIELD_BRAKE)
    return BicycleCommand.clipped(accel, steering)


def find_obstacle(vehicle: "Vehicle", vehicles: list["Vehicle"],
                  chain: tuple[tuple[str, float], ...],
                  network: RoadNetwork) -> Obstacle | None:
    """Nearest vehicle whose footprint sits on this vehicle's chain ahead.

    Vehicles are matched by projecting their centers onto the chain lanes
    (within-extent, |lateral| <= 2 m), which catches bodies on *other* lanes
    that overlap the path, not just same-lane leaders.
    """
    state = vehicle.state
    sx, sy = state.pose.x, state.pose.y
    reach = LEADER_LOOKAHEAD + 8.0
    best: Obstacle | None = None
    for other in vehicles:
        if other is vehicle:
            continue
        o_state = other.state
        dx, dy = o_state.pose.x - sx, o_state.pose.y - sy
        if dx * dx + dy * dy > reach * reach:
            continue
        found = project_obstacle(vehicle, other, chain, network)
        if found and (best is None or found.bumper_gap < best.bumper_gap):
            best = found
    return best


# ---------------------------------------------------------------------------
# trajectory conflicts and yield decisions
# ---------------------------------------------------------------------------

@dataclass
class PredictedPath:
    """Cached per-decision prediction: pose samples, numpy centers, corners."""

    poses: tuple[Pose, ...]        # includes the current pose at index 0
    length: float
    width: float
    xs: np.ndarray = field(init=False)
    ys: np.ndarray = field(init=False)
    travel: np.ndarray = field(init=False)    # per-sample swept allowance
    bbox: tuple[float, float, float, float] = field(init=False)
    bound_radius: float = field(init=False)
    _corners: dict[int, tuple] = field(init=False, default_factory=dict)

    def __post_init__(self) -> None:
        self.xs = np.fromiter((p.x for p in self.poses), dtype=np.float64)
        self.ys = np.fromiter((p.y for p in self.poses), dtype=np.float64)
        self.bound_radius = 0.5 * math.hypot(self.length, self.width)
        steps = np.hypot(np.diff(self.xs), np.diff(self.ys))
        travel = np.zeros(len(self.poses))
        if len(steps):
            travel[:-1] = steps
            travel[1:] = np.maximum(travel[1:], steps)
        self.travel = travel
        pad = self.bound_radius + (float(steps.max()) if len(steps) else 0.0)
        self.bbox = (float(self.xs.min()) - pad, float(self.xs.max()) + pad,
                     float(self.ys.min()) - pad, float(self.ys.max()) + pad)

    def corners(self, index: int):
        got = self._corners.get(index)
        if got is None:
            got = footprint_corners(self.poses[index], self.length, self.width)
            self._corners[index] = got
        return got


def first_conflict_index(a: PredictedPath, b: PredictedPath) -> int:
    """Index of the first sample whose swept footprints intersect, or -1.

    Sample intervals are bridged with convex sweeps so crossings cannot slip
    between samples."""
    n = min(len(a.poses), len(b.poses))
    if n == 0:
        return -1
    ax0, ax1, ay0, ay1 = a.bbox
    bx0, bx1, by0, by1 = b.bbox
    if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
        return -1
    dx = a.xs[:n] - b.xs[:n]
    dy = a.ys[:n] - b.ys[:n]
    d2 = dx * dx + dy * dy
    reach = a.bound_radius + b.bound_radius + a.travel[:n] + b.travel[:n]
    close = np.flatnonzero(d2 <= reach * reach)
    for idx in close:
        i = int(idx)
        if convex_polygons_collide(a.corners(i), b.corners(i)):
            return i
        if i + 1 < n and swept_rectangles_collide(a.corners(i), a.corners(i + 1),
                                                  b.corners(i), b.corners(i + 1)):
            return i
    return -1


def paths_conflict(a: PredictedPath, b: PredictedPath,
                   limit: int | None = None) -> bool:
    """True if the predicted swept footprints intersect on the horizon (or
    within its first ``limit`` samples)."""
    idx = first_conflict_index(a, b)
    if idx < 0:
        return False
    return limit is None or idx < limit


def effective_priority(vehicle: "Vehicle", network: RoadNetwork,
                       zone_of: dict[str, str],
                       approach_uses_route: bool = False) -> int:
    """Right-of-way rank of a vehicle: the priority of its current lane.

    With ``approach_uses_route`` (intersection roads, where the rank depends
    on the movement), vehicles still approaching rank by the first junction
    lane on their route instead.  Roundabout entries keep their own low rank:
    entering always yields to the ring.
    """
    lane_id = vehicle.state.lane_id
    if lane_id is None:
        return 99
    if approach_uses_route and zone_of.get(lane_id) == "approach":
        for nxt in vehicle.route:
            if zone_of.get(nxt) == "junction":
                return network.priority(nxt)
    return network.priority(lane_id)


def evaluate_conflicts(vehicles: list["Vehicle"], paths: dict[int, PredictedPath],
                       priorities: dict[int, int], zones: dict[int, str],
                       leaders: dict[int, int | None], ego_id: int | None,
                       emergency_limit: int | None = None,
                       ego_rescuable: bool = True,
                       ) -> tuple[set[int], set[int]]:
    """Returns (rule_yields, emergency_brakes) for this decision interval.

    rule_yields is the right-of-way decision: for every conflicting pair that
    is not a leader-follower relation, the lower-priority vehicle yields,
    unless it has already cleared the junction (exit zone) or is the
    policy-controlled ego.  emergency_brakes adds scripted vehicles whose
    conflict is imminent (within ``emergency_limit`` samples) regardless of
    priority, the last-resort braking real traffic performs for anyone.  The
    ego triggers that reaction only while ``ego_rescuable`` (slow enough for
    other drivers to react to); the ego itself never brakes automatically.
    """
    rule_yields: set[int] = set()
    emergency: set[int] = set()
    ids = [v.vid for v in vehicles if v.vid in paths]
    for i, vid_a in enumerate(ids):
        for vid_b in ids[i + 1:]:
            if leaders.get(vid_a) == vid_b or leaders.get(vid_b) == vid_a:
                continue
            prio_a, prio_b = priorities[vid_a], priorities[vid_b]
            low = vid_a if prio_a < prio_b else vid_b
            low_eligible = (prio_a != prio_b and low != ego_id
                            and zones.get(low) != "exit"
                            and low not in rule_yields)
            emergency_pair = (
                emergency_limit is not None
                and (ego_rescuable or ego_id not in (vid_a, vid_b))
                and not all(vid in emergency or vid == ego_id
                            for vid in (vid_a, vid_b)))
            if not (low_eligible or emergency_pair):
                continue
            conflict_at = first_conflict_index(paths[vid_a], paths[vid_b])
            if conflict_at < 0:
                continue
            if low_eligible:
                rule_yields.add(low)
            if emergency_pair and conflict_at < emergency_limit:
                emergency.update(vid for vid in (vid_a, vid_b)
                                 if vid != ego_id)
    return rule_yields, emergency


def decide_yields(vehicles: list["Vehicle"], paths: dict[int, PredictedPath],
                  priorities: dict[int, int], zones: dict[int, str],
                  leaders: dict[int, int | None],
                  ego_id: int | None) -> set[int]:
    """Right-of-way yield set only (no emergency layer)."""
    return evaluate_conflicts(vehicles, paths, priorities, zones, leaders,
                              ego_id)[0]
