"""The junction MDP: reset/step machinery shared by both scenarios."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from ..errors import ContractError
from ..geometry import (
    BicycleCommand,
    Pose,
    VehicleState,
    footprints_collide,
    predict_positions,
    step_bicycle,
)
from .behavior import (
    PREDICTION_DT,
    PREDICTION_HORIZON,
    PredictedPath,
    effective_priority,
    evaluate_conflicts,
    find_obstacle,
    lane_chain,
    project_obstacle,
    speed_tracking_accel,
    steering_toward_lane,
    surrounding_policy,
)
from .config import PHYSICS_RATE, ScenarioConfig
from .observation import build_observation, rank_others

if TYPE_CHECKING:
    from .scenario import ScenarioSpec

logger = logging.getLogger(__name__)

SPAWN_MIN_GAP = 10.0   # m between any two spawned vehicle centers
SPAWN_RETRIES = 40
YIELD_REFRESH_SUBSTEPS = 5   # re-evaluate yields every third of a second
EGO_RESCUE_SPEED = 8.0       # m/s; faster egos are too sudden to brake for


class Outcome(enum.Enum):
    NONE = "none"
    COLLISION = "collision"
    SUCCESS = "success"
    TIMEOUT = "timeout"


@dataclass
class Vehicle:
    """Mutable simulation body; ``vid`` 0 is always the ego."""

    vid: int
    state: VehicleState
    route: tuple[str, ...]
    target_speed: float
    crashed: bool = False

    @property
    def is_ego(self) -> bool:
        return self.vid == 0


@dataclass(frozen=True)
class EnvState:
    """Immutable snapshot used by determinism checks and replay export."""

    time: float
    ego: VehicleState
    others: tuple[tuple[VehicleState, tuple[str, ...]], ...]
    terminal: bool
    outcome: Outcome
    rng_state: str


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool
    outcome: Outcome


@dataclass
class StepEvents:
    collided: bool = False
    succeeded: bool = False
    lane_changed: bool = False
    at_max_speed: bool = False


class JunctionEnv:
    """One ego vehicle crossing a junction among scripted traffic.

    Deterministic: the per-episode generator is consumed only at reset, and
    stepping is pure arithmetic, so (config, action sequence) fixes every
    outcome bit.
    """

    def __init__(self, config: ScenarioConfig):
        from .scenario import make_scenario  # local import breaks the cycle

        self.config = config
        self.scenario: "ScenarioSpec" = make_scenario(config)
        self.network = self.scenario.network
        self.vehicles: list[Vehicle] = []
        self.time_substeps = 0
        self.terminal = True
        self.outcome = Outcome.NONE
        self.tracing = False
        self._trace_rows: list[dict] = []
        self._rng_state_repr = ""
        self._obstacle_of: dict[int, Vehicle] = {}

    # -- lifecycle ----------------------------------------------------------

    @property
    def action_count(self) -> int:
        return len(self.scenario.action_names)

    @property
    def ego(self) -> Vehicle:
        return self.vehicles[0]

    def reset(self) -> np.ndarray:
        rng = np.random.default_rng(self.config.seed)
        self.time_substeps = 0
        self.terminal = False
        self.outcome = Outcome.NONE
        self._trace_rows = []
        ego = self.scenario.spawn_ego()
        self.vehicles = [ego]
        self._spawn_surrounding(rng)
        self._rng_state_repr = repr(rng.bit_generator.state)
        if self.tracing:
            self._record_substep(None)
        return self._observe()

    def _spawn_surrounding(self, rng: np.random.Generator) -> None:
        zones = self.scenario.spawn_zones()
        lengths = np.array([(hi - lo) * weight for _, lo, hi, weight in zones])
        weights = lengths / lengths.sum()
        lo_speed, hi_speed = self.config.spawn_speed_range
        placed = 0
        for _ in range(self.config.spawn_count):
            ok = False
            for _ in range(SPAWN_RETRIES):
                zone_idx = int(rng.choice(len(zones), p=weights))
                lane_id, s_lo, s_hi, _ = zones[zone_idx]
                s = float(rng.uniform(s_lo, s_hi))
                lane = self.network.lane(lane_id)
                x, y = lane.position(s)
                if any(math.hypot(v.state.pose.x - x, v.state.pose.y - y) < SPAWN_MIN_GAP
                       for v in self.vehicles):
                    continue
                speed = float(rng.uniform(lo_speed, hi_speed))
                route = self.scenario.sample_route(rng, lane_id)
                state = VehicleState(pose=Pose(x, y, lane.heading_at(s)), speed=speed,
                                     lane_id=lane_id, longitudinal=s)
                self.vehicles.append(Vehicle(vid=len(self.vehicles), state=state,
                                             route=route, target_speed=speed))
                placed += 1
                ok = True
                break
            if not ok:
                logger.warning("spawn congestion: placed %d of %d vehicles (seed %d)",
                               placed, self.config.spawn_count, self.config.seed)
                break

    # -- stepping -----------------------------------------------------------

    def step(self, action: int) -> StepResult:
        if self.terminal:
            raise ContractError("step() called on a terminated episode")
        if not 0 <= int(action) < self.action_count:
            raise ContractError(f"action {action} outside 0..{self.action_count - 1}")

        events = StepEvents()
        self.scenario.apply_ego_action(self, int(action), events)
        yielding = self._decide_yields()

        dt = self.config.physics_dt
        for sub in range(self.config.substeps_per_decision):
            if sub and sub % YIELD_REFRESH_SUBSTEPS == 0:
                yielding = self._decide_yields()
            self._advance_substep(dt, yielding, events)
            if self.tracing:
                self._record_substep(int(action))
            if events.collided:
                self.outcome = Outcome.COLLISION
                break
            if events.succeeded:
                self.outcome = Outcome.SUCCESS
                break
            if self.time_substeps >= self.config.max_substeps:
                self.outcome = Outcome.TIMEOUT
                break

        if self.outcome is not Outcome.NONE:
            self.terminal = True
        events.at_max_speed = abs(self.ego.state.speed - self.config.v_max) <= 1e-6
        reward = self.scenario.reward(events)
        return StepResult(self._observe(), reward, self.terminal, self.outcome)

    def _decide_yields(self, include_emergency: bool = True) -> set[int]:
        paths: dict[int, PredictedPath] = {}
        priorities: dict[int, int] = {}
        zones: dict[int, str] = {}
        leaders: dict[int, int | None] = {}
        net = self.network
        zone_of = self.scenario.zone_of
        for veh in self.vehicles:
            lane_id = veh.state.lane_id
            if lane_id is None:
                continue
            pred = predict_positions(veh.state, net, PREDICTION_HORIZON,
                                     PREDICTION_DT, route=veh.route)
            paths[veh.vid] = PredictedPath((veh.state.pose,) + pred.poses,
                                           veh.state.length, veh.state.width)
            priorities[veh.vid] = effective_priority(
                veh, net, zone_of,
                approach_uses_route=self.scenario.approach_priority_from_route)
            zones[veh.vid] = zone_of.get(lane_id, "exit")
            chain = lane_chain(net, lane_id, veh.route, veh.state.longitudinal)
            found = find_obstacle(veh, self.vehicles, chain, net)
            leaders[veh.vid] = found.vehicle.vid if found else None
            if found:
                self._obstacle_of[veh.vid] = found.vehicle
            else:
                self._obstacle_of.pop(veh.vid, None)
        # imminent-collision override looks 1.5 s out (sample 0 is "now");
        # scripted drivers can react to a slow-moving ego, not a speeding one
        emergency_limit = 1 + round(1.5 / PREDICTION_DT)
        rule_yields, emergency = evaluate_conflicts(
            self.vehicles, paths, priorities, zones, leaders, ego_id=0,
            emergency_limit=emergency_limit if include_emergency else None,
            ego_rescuable=self.ego.state.speed <= EGO_RESCUE_SPEED)
        return rule_yields | emergency

    def _advance_substep(self, dt: float, yielding: set[int],
                         events: StepEvents) -> None:
        net = self.network
        for veh in self.vehicles:
            if veh.crashed:
                continue
            state = veh.state
            if veh.is_ego:
                if state.lane_id is None:
                    steering = 0.0
                else:
                    lane = net.lane(state.lane_id)
                    coords = lane.local_coordinates(state.pose.x, state.pose.y)
                    steering = steering_toward_lane(state.pose, state.speed,
                                                    lane, coords.longitudinal,
                                                    coords.lateral)
                accel = speed_tracking_accel(state.speed, veh.target_speed, dt)
                cmd = BicycleCommand.clipped(accel, steering)
            else:
                # obstacle identity refreshes with the yield cadence; the gap
                # to it is re-projected every physics step
                obstacle = None
                target = self._obstacle_of.get(veh.vid)
                if target is not None and state.lane_id is not None:
                    chain = lane_chain(net, state.lane_id, veh.route,
                                       state.longitudinal)
                    obstacle = project_obstacle(veh, target, chain, net)
                cmd = surrounding_policy(veh, net, dt, obstacle,
                                         veh.vid in yielding)
            veh.state = step_bicycle(state, cmd, dt, v_max=self.config.v_max)
            self._update_lane_position(veh)
        self.time_substeps += 1
        self._detect_collisions(events)
        if not events.collided and self.scenario.ego_succeeded(self.ego):
            events.succeeded = True

    def _update_lane_position(self, veh: Vehicle) -> None:
        net = self.network
        for _ in range(4):
            if veh.state.lane_id is None:
                return
            lane = net.lane(veh.state.lane_id)
            coords = lane.local_coordinates(veh.state.pose.x, veh.state.pose.y)
            if coords.longitudinal < lane.length - 1e-9:
                veh.state = replace(veh.state, longitudinal=coords.longitudinal)
                return
            nxt = net.next_on_route(veh.state.lane_id, veh.route)
            if nxt is None:
                veh.state = replace(veh.state, lane_id=None, longitudinal=0.0)
                return
            veh.state = replace(veh.state, lane_id=nxt)
        veh.state = replace(veh.state, longitudinal=coords.longitudinal)

    def _detect_collisions(self, events: StepEvents) -> None:
        vehicles = self.vehicles
        n = len(vehicles)
        for i in range(n):
            a = vehicles[i]
            for j in range(i + 1, n):
                b = vehicles[j]
                if a.crashed and b.crashed:
                    continue
                if footprints_collide(a.state, b.state):
                    a.crashed = b.crashed = True
                    a.state = replace(a.state, speed=0.0)
                    b.state = replace(b.state, speed=0.0)
                    if a.is_ego or b.is_ego:
                        events.collided = True

    # -- views ---------------------------------------------------------------

    def _observe(self) -> np.ndarray:
        return build_observation(self.ego.state,
                                 [v.state for v in self.vehicles[1:]],
                                 self.config.observed_vehicle_limit)

    def observed_vehicle_ids(self) -> list[int]:
        """Vehicle id per observation row (ego first); aligns attention
        weights with vehicles for replay export."""
        others = self.vehicles[1:]
        ranked = rank_others(self.ego.state, [v.state for v in others],
                             self.config.observed_vehicle_limit)
        return [0] + [others[i].vid for i in ranked]

    @property
    def time_seconds(self) -> float:
        return self.time_substeps / PHYSICS_RATE

    def snapshot(self) -> EnvState:
        return EnvState(
            time=self.time_seconds,
            ego=self.ego.state,
            others=tuple((v.state, v.route) for v in self.vehicles[1:]),
            terminal=self.terminal,
            outcome=self.outcome,
            rng_state=self._rng_state_repr,
        )

    def ego_distance_to_junction(self) -> float:
        """Metres along the ego route from the ego to the first junction lane."""
        veh = self.ego
        lane_id = veh.state.lane_id
        if lane_id is None or self.scenario.zone_of.get(lane_id) != "approach":
            return 0.0
        net = self.network
        total = net.lane(lane_id).length - veh.state.longitudinal
        current = lane_id
        while True:
            nxt = net.next_on_route(current, veh.route)
            if nxt is None or self.scenario.zone_of.get(nxt) != "approach":
                return total
            total += net.lane(nxt).length
            current = nxt

    def classify_outcome(self) -> str:
        """Terminal outcome folded to the episode bookkeeping categories:
        timeout counts as freezing."""
        if not self.terminal:
            raise ContractError("episode has not terminated")
        if self.outcome is Outcome.COLLISION:
            return "collision"
        if self.outcome is Outcome.SUCCESS:
            return "success"
        return "freeze"

    # -- tracing ---------------------------------------------------------------

    def _record_substep(self, action: int | None) -> None:
        t = round(self.time_seconds, 6)
        for veh in self.vehicles:
            self._trace_rows.append({
                "t": t,
                "vehicle_id": veh.vid,
                "x": round(veh.state.pose.x, 4),
                "y": round(veh.state.pose.y, 4),
                "heading": round(veh.state.pose.heading, 5),
                "speed": round(veh.state.speed, 4),
                "ego_action": action,
            })

    def drain_trace(self) -> list[dict]:
        rows, self._trace_rows = self._trace_rows, []
        return rows
