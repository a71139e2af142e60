"""Scenario geometry and rules for the two junctions.

Intersection: two perpendicular single-lane-per-direction roads; the ego
comes from the south (60 m out) and turns left (west); the horizontal road
has the right of way.  Success: 25 m or more past the turn exit.

Roundabout: a two-lane CCW ring (radii 20/24 m) with four tangent
entries/exits; the ego comes from the south entry (125 m out) and takes the
second exit (north); ring traffic has the right of way.  Success: 10 m or
more down the exit lane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from ..errors import ContractError
from ..geometry import ArcLane, Pose, RoadNetwork, StraightLane, VehicleState
from .config import INTERSECTION, ROUNDABOUT, ScenarioConfig
from .core import StepEvents, Vehicle

if TYPE_CHECKING:
    from .core import JunctionEnv

HALF_PI = math.pi / 2.0


@dataclass
class ScenarioSpec:
    kind: str
    config: ScenarioConfig
    network: RoadNetwork
    action_names: tuple[str, ...]
    zone_of: dict[str, str]
    ego_lane: str
    ego_longitudinal: float
    ego_route: tuple[str, ...]
    goal_lane: str
    goal_longitudinal: float
    view_box: tuple[float, float, float, float]  # min_x, min_y, width, height
    speed_step: float = 5.0
    # intersection right-of-way depends on the movement (turn vs straight),
    # so approaching vehicles rank by their route's junction lane there
    approach_priority_from_route: bool = False

    # -- ego ------------------------------------------------------------------

    def spawn_ego(self) -> Vehicle:
        lane = self.network.lane(self.ego_lane)
        x, y = lane.position(self.ego_longitudinal)
        state = VehicleState(pose=Pose(x, y, lane.heading_at(self.ego_longitudinal)),
                             speed=self.config.v_max, lane_id=self.ego_lane,
                             longitudinal=self.ego_longitudinal)
        return Vehicle(vid=0, state=state, route=self.ego_route,
                       target_speed=self.config.v_max)

    def ego_succeeded(self, ego: Vehicle) -> bool:
        return (ego.state.lane_id == self.goal_lane
                and ego.state.longitudinal >= self.goal_longitudinal)

    # -- hooks overridden per kind ---------------------------------------------

    def spawn_zones(self) -> list[tuple[str, float, float, float]]:
        """Spawnable (lane_id, s_min, s_max, weight) regions."""
        raise NotImplementedError

    def sample_route(self, rng: np.random.Generator, lane_id: str) -> tuple[str, ...]:
        raise NotImplementedError

    def apply_ego_action(self, env: "JunctionEnv", action: int,
                         events: StepEvents) -> None:
        raise NotImplementedError

    def reward(self, events: StepEvents) -> float:
        raise NotImplementedError


def _apply_speed_action(env: "JunctionEnv", delta: float) -> None:
    ego = env.ego
    ego.target_speed = min(max(ego.target_speed + delta, 0.0), env.config.v_max)


# ---------------------------------------------------------------------------
# intersection
# ---------------------------------------------------------------------------

_IX_J = 10.0        # junction half-extent
_IX_OFFSET = 2.0    # lane center offset from the road axis
_IX_APPROACH = 80.0
_IX_EXIT = 60.0

# (approach heading, entry point) per origin arm; right-hand traffic
_IX_ARMS = {
    "s": (HALF_PI, (_IX_OFFSET, -_IX_J)),
    "n": (-HALF_PI, (-_IX_OFFSET, _IX_J)),
    "e": (math.pi, (_IX_J, _IX_OFFSET)),
    "w": (0.0, (-_IX_J, -_IX_OFFSET)),
}

# horizontal road (e/w arms) outranks the vertical one; straights beat right
# turns beat left turns; all ranks distinct so conflicts totally order
_IX_PRIORITY = {
    "conn_e_s": 23, "conn_w_s": 22, "conn_e_r": 21, "conn_w_r": 20,
    "conn_e_l": 19, "conn_w_l": 18,
    "conn_s_s": 13, "conn_n_s": 12, "conn_s_r": 11, "conn_n_r": 10,
    "conn_s_l": 9, "conn_n_l": 8,
}

_IX_EXIT_OF = {  # connector -> exit arm direction of travel
    "conn_s_s": "n", "conn_s_l": "w", "conn_s_r": "e",
    "conn_n_s": "s", "conn_n_l": "e", "conn_n_r": "w",
    "conn_e_s": "w", "conn_e_l": "s", "conn_e_r": "n",
    "conn_w_s": "e", "conn_w_l": "n", "conn_w_r": "s",
}


class IntersectionScenario(ScenarioSpec):
    def __init__(self, config: ScenarioConfig):
        net = RoadNetwork()
        zone: dict[str, str] = {}
        exit_start = {
            "n": ((_IX_OFFSET, _IX_J), HALF_PI),
            "s": ((-_IX_OFFSET, -_IX_J), -HALF_PI),
            "e": ((_IX_J, -_IX_OFFSET), 0.0),
            "w": ((-_IX_J, _IX_OFFSET), math.pi),
        }
        for arm, (start, heading) in exit_start.items():
            net.add_lane(f"exit_{arm}", StraightLane(start, heading, _IX_EXIT),
                         priority=90)
            zone[f"exit_{arm}"] = "exit"
        for arm, (heading, entry) in _IX_ARMS.items():
            sx = entry[0] - _IX_APPROACH * math.cos(heading)
            sy = entry[1] - _IX_APPROACH * math.sin(heading)
            net.add_lane(f"app_{arm}", StraightLane((sx, sy), heading, _IX_APPROACH),
                         priority=1)
            zone[f"app_{arm}"] = "approach"
        for arm, (heading, entry) in _IX_ARMS.items():
            left = (-math.sin(heading), math.cos(heading))
            # straight across the box
            straight = f"conn_{arm}_s"
            net.add_lane(straight, StraightLane(entry, heading, 2 * _IX_J),
                         priority=_IX_PRIORITY[straight])
            # left turn: CCW quarter arc, radius 12
            lid = f"conn_{arm}_l"
            lcenter = (entry[0] + 12.0 * left[0], entry[1] + 12.0 * left[1])
            lstart = math.atan2(entry[1] - lcenter[1], entry[0] - lcenter[0])
            net.add_lane(lid, ArcLane(lcenter, 12.0, lstart, HALF_PI),
                         priority=_IX_PRIORITY[lid])
            # right turn: CW quarter arc, radius 8
            rid = f"conn_{arm}_r"
            rcenter = (entry[0] - 8.0 * left[0], entry[1] - 8.0 * left[1])
            rstart = math.atan2(entry[1] - rcenter[1], entry[0] - rcenter[0])
            net.add_lane(rid, ArcLane(rcenter, 8.0, rstart, -HALF_PI),
                         priority=_IX_PRIORITY[rid])
            for conn in (straight, lid, rid):
                zone[conn] = "junction"
                net.link(f"app_{arm}", conn)
                net.link(conn, f"exit_{_IX_EXIT_OF[conn]}")

        ego_s = _IX_APPROACH - 60.0
        super().__init__(
            kind=INTERSECTION, config=config, network=net,
            action_names=("slower", "no-operation", "faster"),
            zone_of=zone,
            ego_lane="app_s", ego_longitudinal=ego_s,
            ego_route=("app_s", "conn_s_l", "exit_w"),
            goal_lane="exit_w", goal_longitudinal=25.0,
            view_box=(-95.0, -95.0, 190.0, 190.0),
            approach_priority_from_route=True,
        )

    def spawn_zones(self) -> list[tuple[str, float, float, float]]:
        zones = []
        for arm in ("n", "e", "w"):
            zones.append((f"app_{arm}", 0.0, _IX_APPROACH - 8.0, 1.0))
        # on the ego's arm only behind the ego, so scripted traffic never
        # walls off the single-lane approach
        behind = self.ego_longitudinal - 10.0
        if behind > 1.0:
            zones.append(("app_s", 0.0, behind, 1.0))
        return zones

    def sample_route(self, rng: np.random.Generator, lane_id: str) -> tuple[str, ...]:
        arm = lane_id.removeprefix("app_")
        turn = ("l", "s", "r")[int(rng.integers(3))]
        conn = f"conn_{arm}_{turn}"
        return (lane_id, conn, f"exit_{_IX_EXIT_OF[conn]}")

    def apply_ego_action(self, env: "JunctionEnv", action: int,
                         events: StepEvents) -> None:
        if action == 0:
            _apply_speed_action(env, -self.speed_step)
        elif action == 2:
            _apply_speed_action(env, self.speed_step)

    def reward(self, events: StepEvents) -> float:
        if events.collided:
            return -5.0
        if events.at_max_speed or events.succeeded:
            return 1.0
        return 0.0


# ---------------------------------------------------------------------------
# roundabout
# ---------------------------------------------------------------------------

_RB_R_OUT = 24.0
_RB_R_IN = 20.0
_RB_ALPHA = math.radians(24.0)
# ring nodes CCW starting at the south entry; even arcs end at an exit node
_RB_NODES = [
    -HALF_PI + _RB_ALPHA,            # south entry
    -_RB_ALPHA,                      # east exit
    _RB_ALPHA,                       # east entry
    HALF_PI - _RB_ALPHA,             # north exit
    HALF_PI + _RB_ALPHA,             # north entry
    math.pi - _RB_ALPHA,             # west exit
    math.pi + _RB_ALPHA,             # west entry
    1.5 * math.pi - _RB_ALPHA,       # south exit
]
_RB_EXIT_ARM = {0: "e", 2: "n", 4: "w", 6: "s"}       # arc index -> exit arm
_RB_ENTRY_ARC = {"s": 0, "e": 2, "n": 4, "w": 6}      # entry arm -> first arc
# feeders are arcs curving away from the ring (tangent at the node) with a
# 66-degree sweep, which turns every outer stem exactly radial (N/S/E/W);
# same-arm entry and exit stems then run parallel and never cross
_RB_RAMP_RADIUS = 20.0
_RB_RAMP_SWEEP = math.radians(66.0)
_RB_RAMP_LEN = _RB_RAMP_RADIUS * _RB_RAMP_SWEEP
_RB_TOTAL_EGO_ENTRY = 135.0
_RB_EGO_STEM = _RB_TOTAL_EGO_ENTRY - _RB_RAMP_LEN
_RB_STEM = 40.0
_RB_EXIT_STEM = 40.0


def _ring_point(radius: float, angle: float) -> tuple[float, float]:
    return (radius * math.cos(angle), radius * math.sin(angle))


def _ramp_arc(node_angle: float, ending_at_node: bool) -> ArcLane:
    """Clockwise arc of radius _RB_RAMP_RADIUS tangent to the ring at the
    node; entries end there, exits start there."""
    node = _ring_point(_RB_R_OUT, node_angle)
    center = (node[0] + _RB_RAMP_RADIUS * math.cos(node_angle),
              node[1] + _RB_RAMP_RADIUS * math.sin(node_angle))
    sweep = -_RB_RAMP_SWEEP
    node_angle_on_ramp = node_angle + math.pi
    start = node_angle_on_ramp - sweep if ending_at_node else node_angle_on_ramp
    return ArcLane(center, _RB_RAMP_RADIUS, start, sweep)


class RoundaboutScenario(ScenarioSpec):
    def __init__(self, config: ScenarioConfig):
        net = RoadNetwork()
        zone: dict[str, str] = {}
        for k in range(8):
            sweep = (_RB_NODES[(k + 1) % 8] - _RB_NODES[k]) % (2 * math.pi)
            net.add_lane(f"ring_o_{k}", ArcLane((0.0, 0.0), _RB_R_OUT,
                                                _RB_NODES[k], sweep), priority=40 + k)
            net.add_lane(f"ring_i_{k}", ArcLane((0.0, 0.0), _RB_R_IN,
                                                _RB_NODES[k], sweep), priority=50 + k)
            zone[f"ring_o_{k}"] = zone[f"ring_i_{k}"] = "junction"
        for k in range(8):
            net.link(f"ring_o_{k}", f"ring_o_{(k + 1) % 8}")
            net.link(f"ring_i_{k}", f"ring_i_{(k + 1) % 8}")
            net.set_neighbours(f"ring_o_{k}", left=f"ring_i_{k}")
            net.set_neighbours(f"ring_i_{k}", right=f"ring_o_{k}")
        for idx, (arm, k) in enumerate(_RB_ENTRY_ARC.items()):
            angle = _RB_NODES[k]
            ramp_id = f"entry_{arm}"
            ramp = _ramp_arc(angle, ending_at_node=True)
            net.add_lane(ramp_id, ramp, priority=5 + idx)
            stem_len = _RB_EGO_STEM if arm == "s" else _RB_STEM
            ramp_start = ramp.position(0.0)
            heading = ramp.heading_at(0.0)
            stem_id = f"entry_{arm}_far"
            stem_start = (ramp_start[0] - stem_len * math.cos(heading),
                          ramp_start[1] - stem_len * math.sin(heading))
            net.add_lane(stem_id, StraightLane(stem_start, heading, stem_len),
                         priority=5 + idx)
            net.link(stem_id, ramp_id)
            net.link(ramp_id, f"ring_o_{k}")
            zone[ramp_id] = zone[stem_id] = "approach"
        for k, arm in _RB_EXIT_ARM.items():
            angle = _RB_NODES[(k + 1) % 8]
            ramp_id = f"exit_{arm}"
            ramp = _ramp_arc(angle, ending_at_node=False)
            net.add_lane(ramp_id, ramp, priority=90)
            end = ramp.end_pose()
            stem_id = f"exit_{arm}_far"
            net.add_lane(stem_id, StraightLane((end.x, end.y), end.heading,
                                               _RB_EXIT_STEM), priority=90)
            net.link(f"ring_o_{k}", ramp_id)
            net.link(ramp_id, stem_id)
            zone[ramp_id] = zone[stem_id] = "exit"

        super().__init__(
            kind=ROUNDABOUT, config=config, network=net,
            action_names=("lane_left", "lane_right", "idle", "faster", "slower"),
            zone_of=zone,
            ego_lane="entry_s_far",
            ego_longitudinal=_RB_TOTAL_EGO_ENTRY - 125.0,
            ego_route=("entry_s_far", "entry_s", "ring_o_0", "ring_o_1",
                       "ring_o_2", "exit_n", "exit_n_far"),
            goal_lane="exit_n", goal_longitudinal=10.0,
            view_box=(-130.0, -115.0, 230.0, 185.0),
        )

    def spawn_zones(self) -> list[tuple[str, float, float, float]]:
        # ring lanes weighted up: the contested resource is ring occupancy
        zones = []
        for arm in ("e", "n", "w"):  # not the ego's own entry
            zones.append((f"entry_{arm}_far", 0.0, _RB_STEM, 1.0))
            zones.append((f"entry_{arm}", 0.0, _RB_RAMP_LEN - 5.0, 1.0))
        for k in range(8):
            for ring in ("ring_o", "ring_i"):
                lane = self.network.lane(f"{ring}_{k}")
                zones.append((f"{ring}_{k}", 0.0, lane.length, 1.5))
        return zones

    def _outer_route_from(self, arc: int, exits_ahead: int) -> tuple[str, ...]:
        route = []
        k = arc
        passed = 0
        for _ in range(16):
            route.append(f"ring_o_{k}")
            if k in _RB_EXIT_ARM:
                passed += 1
                if passed == exits_ahead:
                    arm = _RB_EXIT_ARM[k]
                    route += [f"exit_{arm}", f"exit_{arm}_far"]
                    return tuple(route)
            k = (k + 1) % 8
        return tuple(route)

    def sample_route(self, rng: np.random.Generator, lane_id: str) -> tuple[str, ...]:
        exits_ahead = 1 + int(rng.integers(4))
        if lane_id.startswith("entry_"):
            arm = lane_id.removeprefix("entry_").removesuffix("_far")
            tail = self._outer_route_from(_RB_ENTRY_ARC[arm], exits_ahead)
            if lane_id.endswith("_far"):
                return (lane_id, f"entry_{arm}") + tail
            return (lane_id,) + tail
        if lane_id.startswith("ring_o_"):
            return self._outer_route_from(int(lane_id.removeprefix("ring_o_")),
                                          exits_ahead)
        return ()  # inner ring: circulate via successors

    def ego_route_from(self, lane_id: str) -> tuple[str, ...]:
        """Ego route after a lane change: outer lanes aim at the north exit,
        the inner ring just circulates."""
        if lane_id.startswith("ring_o_"):
            k = int(lane_id.removeprefix("ring_o_"))
            route = []
            for _ in range(9):
                route.append(f"ring_o_{k}")
                if k == 2:
                    route += ["exit_n", "exit_n_far"]
                    return tuple(route)
                k = (k + 1) % 8
        if lane_id.startswith("ring_i_"):
            return ()
        return self.ego_route

    def apply_ego_action(self, env: "JunctionEnv", action: int,
                         events: StepEvents) -> None:
        if action == 3:
            _apply_speed_action(env, self.speed_step)
        elif action == 4:
            _apply_speed_action(env, -self.speed_step)
        elif action in (0, 1):
            ego = env.ego
            lane_id = ego.state.lane_id
            if lane_id is None:
                return
            target = (env.network.left_of(lane_id) if action == 0
                      else env.network.right_of(lane_id))
            if target is None:
                return  # no adjacent lane: degrade to idle, no penalty
            lane = env.network.lane(target)
            coords = lane.local_coordinates(ego.state.pose.x, ego.state.pose.y)
            ego.state = replace(ego.state, lane_id=target,
                                longitudinal=coords.longitudinal)
            ego.route = self.ego_route_from(target)
            events.lane_changed = True

    def reward(self, events: StepEvents) -> float:
        reward = 0.0
        if events.at_max_speed:
            reward += 0.5
        if events.collided:
            reward -= 1.0
        if events.lane_changed:
            reward -= 0.05
        if events.succeeded:
            reward += 1.0
        return reward


def make_scenario(config: ScenarioConfig) -> ScenarioSpec:
    if config.kind == INTERSECTION:
        return IntersectionScenario(config)
    if config.kind == ROUNDABOUT:
        return RoundaboutScenario(config)
    raise ContractError(f"unknown scenario kind {config.kind!r}")
