"""Vehicle state, the kinematic bicycle step, and trajectory prediction.

The vehicle pose is the footprint center.  Yaw dynamics follow the classic
single-track model, heading rate = v / wheelbase * tan(steering).  Speeds are
non-negative; the step clamps them into [0, v_max].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from ..errors import ContractError, InvalidStateError
from .pose import Pose, normalize_heading

if TYPE_CHECKING:
    from .lanes import RoadNetwork

WHEELBASE = 2.5           # m
VEHICLE_LENGTH = 5.0      # m
VEHICLE_WIDTH = 2.0       # m
ACCEL_MIN = -5.0          # m/s^2
ACCEL_MAX = 5.0           # m/s^2
STEERING_MAX = math.pi / 4.0


@dataclass(frozen=True, slots=True)
class BicycleCommand:
    acceleration: float
    steering: float

    @staticmethod
    def clipped(acceleration: float, steering: float) -> "BicycleCommand":
        return BicycleCommand(
            min(max(acceleration, ACCEL_MIN), ACCEL_MAX),
            min(max(steering, -STEERING_MAX), STEERING_MAX),
        )


@dataclass(frozen=True, slots=True)
class VehicleState:
    pose: Pose
    speed: float
    length: float = VEHICLE_LENGTH
    width: float = VEHICLE_WIDTH
    lane_id: str | None = None
    longitudinal: float = 0.0

    def is_finite(self) -> bool:
        return self.pose.is_finite() and math.isfinite(self.speed)


def step_bicycle(state: VehicleState, cmd: BicycleCommand, dt: float,
                 wheelbase: float = WHEELBASE, v_max: float = 10.0) -> VehicleState:
    """Advance one physics step.

    Speed integrates trapezoidally (displacement uses the mean of old and
    clamped new speed); the position update uses the midpoint heading, so
    constant-steering arcs track the closed-form circle to second order.
    """
    if dt <= 0.0:
        raise ContractError(f"dt must be positive, got {dt}")
    if not (state.is_finite() and math.isfinite(cmd.acceleration)
            and math.isfinite(cmd.steering)):
        raise InvalidStateError("non-finite vehicle state or command")
    if not (ACCEL_MIN - 1e-12 <= cmd.acceleration <= ACCEL_MAX + 1e-12
            and -STEERING_MAX - 1e-12 <= cmd.steering <= STEERING_MAX + 1e-12):
        raise ContractError(f"command out of bounds: {cmd}")

    v0 = state.speed
    v1 = min(max(v0 + cmd.acceleration * dt, 0.0), v_max)
    v_bar = 0.5 * (v0 + v1)
    yaw_rate = v_bar / wheelbase * math.tan(cmd.steering)
    heading_mid = state.pose.heading + 0.5 * yaw_rate * dt
    x = state.pose.x + v_bar * math.cos(heading_mid) * dt
    y = state.pose.y + v_bar * math.sin(heading_mid) * dt
    heading = normalize_heading(state.pose.heading + yaw_rate * dt)
    return replace(state, pose=Pose(x, y, heading), speed=v1)


@dataclass(frozen=True, slots=True)
class TrajectoryPrediction:
    poses: tuple[Pose, ...]
    on_network: bool


def predict_positions(state: VehicleState, network: "RoadNetwork", horizon: float,
                      dt: float, route: tuple[str, ...] = ()) -> TrajectoryPrediction:
    """Constant-speed lane-following projection over ``horizon`` seconds.

    Poses lie on lane centerlines, following the route (then first successors)
    across lane boundaries; past a terminal lane the path extrapolates
    straight.  Off-network vehicles yield an empty prediction with the
    ``on_network`` flag cleared.
    """
    if horizon <= 0.0 or dt <= 0.0:
        raise ContractError(f"horizon and dt must be positive, got {horizon}, {dt}")
    steps = math.ceil(horizon / dt - 1e-9)
    if abs(steps * dt - horizon) > 1e-6 * max(1.0, horizon):
        raise ContractError(f"dt={dt} does not divide horizon={horizon}")

    if state.lane_id is None or not network.has_lane(state.lane_id):
        return TrajectoryPrediction((), False)

    poses: list[Pose] = []
    lane_id = state.lane_id
    lane = network.lane(lane_id)
    s = state.longitudinal
    terminal_pose: Pose | None = None
    overshoot = 0.0
    for _ in range(steps):
        if terminal_pose is None:
            s += state.speed * dt
            while s > lane.length:
                next_id = network.next_on_route(lane_id, route)
                if next_id is None:
                    overshoot = s - lane.length
                    terminal_pose = lane.end_pose()
                    break
                s -= lane.length
                lane_id = next_id
                lane = network.lane(lane_id)
        else:
            overshoot += state.speed * dt
        if terminal_pose is not None:
            x = terminal_pose.x + overshoot * terminal_pose.cos_h
            y = terminal_pose.y + overshoot * terminal_pose.sin_h
            poses.append(Pose(x, y, terminal_pose.heading))
        else:
            x, y = lane.position(s)
            poses.append(Pose(x, y, lane.heading_at(s)))
    return TrajectoryPrediction(tuple(poses), True)
