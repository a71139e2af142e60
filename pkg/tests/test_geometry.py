"""Pose, lane, and bicycle-step tests against independent oracles."""

import math

import numpy as np
import pytest

from junctionlab.errors import ContractError, InvalidStateError
from junctionlab.geometry import (
    ArcLane,
    BicycleCommand,
    Pose,
    RoadNetwork,
    StraightLane,
    VehicleState,
    lane_frame,
    normalize_heading,
    predict_positions,
    step_bicycle,
)


# ---------------------------------------------------------------------------
# heading normalization
# ---------------------------------------------------------------------------

def test_normalize_heading_range_and_idempotence():
    rng = np.random.default_rng(0)
    for h in rng.uniform(-50.0, 50.0, size=500):
        w = normalize_heading(float(h))
        assert -math.pi < w <= math.pi
        assert normalize_heading(w) == w


def test_normalize_heading_boundary():
    assert normalize_heading(math.pi) == math.pi
    assert normalize_heading(-math.pi) == math.pi
    assert normalize_heading(3 * math.pi) == pytest.approx(math.pi)
    assert normalize_heading(0.0) == 0.0


# ---------------------------------------------------------------------------
# bicycle step
# ---------------------------------------------------------------------------

def _vehicle(x=0.0, y=0.0, heading=0.0, speed=0.0):
    return VehicleState(pose=Pose(x, y, heading), speed=speed)


def test_straight_line_displacement_exact():
    state = _vehicle(heading=0.7, speed=5.0)
    out = step_bicycle(state, BicycleCommand(0.0, 0.0), dt=1.0)
    assert out.pose.x == pytest.approx(5.0 * math.cos(0.7), abs=1e-12)
    assert out.pose.y == pytest.approx(5.0 * math.sin(0.7), abs=1e-12)
    assert out.pose.heading == state.pose.heading
    assert out.speed == 5.0


def test_stationary_vehicle_unmoved():
    state = _vehicle(x=3.0, y=-2.0, heading=1.1)
    out = step_bicycle(state, BicycleCommand(0.0, 0.3), dt=1.0)
    assert out.pose == state.pose
    assert out.speed == 0.0


def test_trapezoidal_speed_integral_with_accel():
    # steering 0: displacement must equal the trapezoid of (v0, v1) over dt
    state = _vehicle(speed=4.0)
    out = step_bicycle(state, BicycleCommand(2.0, 0.0), dt=0.5, v_max=50.0)
    v1 = 4.0 + 2.0 * 0.5
    assert out.speed == pytest.approx(v1)
    assert out.pose.x == pytest.approx(0.5 * (4.0 + v1) * 0.5 / 1.0 * 1.0, abs=1e-12)
    assert out.pose.heading == 0.0


def test_speed_clamped_to_bounds():
    state = _vehicle(speed=9.8)
    out = step_bicycle(state, BicycleCommand(5.0, 0.0), dt=1.0, v_max=10.0)
    assert out.speed == 10.0
    state = _vehicle(speed=0.5)
    out = step_bicycle(state, BicycleCommand(-5.0, 0.0), dt=1.0)
    assert out.speed == 0.0


def _reference_arc_integration(speed, steering, wheelbase, total_time, fine_dt=1e-4):
    """Fine-step Euler integration of the bicycle ODE (independent oracle)."""
    x = y = heading = 0.0
    steps = int(round(total_time / fine_dt))
    for _ in range(steps):
        x += speed * math.cos(heading) * fine_dt
        y += speed * math.sin(heading) * fine_dt
        heading += speed / wheelbase * math.tan(steering) * fine_dt
    return x, y, heading


def test_constant_steering_matches_fine_integrator():
    speed, steering, wb = 5.0, 0.1, 2.5
    state = _vehicle(speed=speed)
    for _ in range(100):
        state = step_bicycle(state, BicycleCommand(0.0, steering), dt=0.05,
                             wheelbase=wb, v_max=50.0)
    ref_x, ref_y, ref_heading = _reference_arc_integration(speed, steering, wb, 5.0)
    # closed form: heading rate is exactly v/L*tan(delta)
    closed_form = speed / wb * math.tan(steering) * 5.0
    assert state.pose.heading == pytest.approx(closed_form, abs=1e-3)
    assert state.pose.heading == pytest.approx(ref_heading, abs=1e-3)
    assert state.pose.x == pytest.approx(ref_x, abs=0.05)
    assert state.pose.y == pytest.approx(ref_y, abs=0.05)


def test_step_rejects_bad_inputs():
    state = _vehicle(speed=1.0)
    with pytest.raises(ContractError):
        step_bicycle(state, BicycleCommand(0.0, 0.0), dt=0.0)
    with pytest.raises(InvalidStateError):
        step_bicycle(_vehicle(x=math.nan), BicycleCommand(0.0, 0.0), dt=0.1)
    with pytest.raises(InvalidStateError):
        step_bicycle(state, BicycleCommand(math.inf, 0.0), dt=0.1)
    with pytest.raises(ContractError):
        step_bicycle(state, BicycleCommand(99.0, 0.0), dt=0.1)


def test_command_clipping_helper():
    cmd = BicycleCommand.clipped(99.0, -9.0)
    assert cmd.acceleration == 5.0
    assert cmd.steering == -math.pi / 4.0


# ---------------------------------------------------------------------------
# lane frames
# ---------------------------------------------------------------------------

def test_straight_lane_frame_basics():
    lane = StraightLane((10.0, 5.0), heading=0.0, length=40.0)
    start = lane_frame(Pose(10.0, 5.0, 0.0), lane)
    assert start.longitudinal == pytest.approx(0.0)
    assert start.lateral == pytest.approx(0.0)
    assert start.within_extent
    # 3 m left of the midpoint: positive lateral by convention
    mid_left = lane_frame(Pose(30.0, 8.0, 0.0), lane)
    assert mid_left.longitudinal == pytest.approx(20.0)
    assert mid_left.lateral == pytest.approx(3.0)


def test_straight_lane_frame_clamps_out_of_extent():
    lane = StraightLane((0.0, 0.0), heading=0.0, length=10.0)
    before = lane_frame(Pose(-4.0, 1.0, 0.0), lane)
    assert before.longitudinal == 0.0 and not before.within_extent
    after = lane_frame(Pose(14.0, 0.0, 0.0), lane)
    assert after.longitudinal == 10.0 and not after.within_extent


@pytest.mark.parametrize("ccw", [True, False])
def test_arc_lane_round_trip(ccw):
    sweep = math.radians(120.0) * (1.0 if ccw else -1.0)
    lane = ArcLane(center=(3.0, -7.0), radius=20.0, start_angle=0.4, sweep=sweep)
    rng = np.random.default_rng(7)
    for _ in range(200):
        s = float(rng.uniform(0.0, lane.length))
        lat = float(rng.uniform(-1.8, 1.8))
        x, y = lane.position(s, lat)
        coords = lane.local_coordinates(x, y)
        assert coords.within_extent
        assert abs(coords.longitudinal - s) < 1e-6
        assert abs(coords.lateral - lat) < 1e-6


def test_arc_heading_perpendicular_to_radius():
    lane = ArcLane(center=(0.0, 0.0), radius=12.0, start_angle=0.0,
                   sweep=math.pi / 2.0)
    for s in (0.0, 5.0, lane.length):
        phi = s / 12.0
        assert lane.heading_at(s) == pytest.approx(normalize_heading(phi + math.pi / 2))


def test_arc_lateral_sign_left_positive():
    # CCW arc: left of travel points toward the center
    lane = ArcLane(center=(0.0, 0.0), radius=10.0, start_angle=0.0, sweep=math.pi / 2)
    x, y = lane.position(0.0, 2.0)
    assert math.hypot(x, y) == pytest.approx(8.0)
    # CW arc: left of travel points away from the center
    lane_cw = ArcLane(center=(0.0, 0.0), radius=10.0, start_angle=math.pi / 2,
                      sweep=-math.pi / 2)
    x, y = lane_cw.position(0.0, 2.0)
    assert math.hypot(x, y) == pytest.approx(12.0)


def test_arc_requires_positive_radius():
    with pytest.raises(ValueError):
        ArcLane(center=(0.0, 0.0), radius=0.0, start_angle=0.0, sweep=1.0)


# ---------------------------------------------------------------------------
# trajectory prediction
# ---------------------------------------------------------------------------

def _single_lane_network(lane, lane_id="a"):
    net = RoadNetwork()
    net.add_lane(lane_id, lane)
    return net


def test_predict_straight_constant_speed():
    lane = StraightLane((0.0, 0.0), heading=0.0, length=100.0)
    net = _single_lane_network(lane)
    state = VehicleState(pose=Pose(0.0, 0.0, 0.0), speed=10.0, lane_id="a",
                         longitudinal=0.0)
    pred = predict_positions(state, net, horizon=3.0, dt=1.0)
    assert pred.on_network
    assert [p.x for p in pred.poses] == pytest.approx([10.0, 20.0, 30.0])
    assert all(p.y == 0.0 and p.heading == 0.0 for p in pred.poses)


def test_predict_zero_speed_holds_position():
    lane = StraightLane((0.0, 0.0), heading=0.3, length=50.0)
    net = _single_lane_network(lane)
    state = VehicleState(pose=Pose(*lane.position(20.0), 0.3), speed=0.0,
                         lane_id="a", longitudinal=20.0)
    pred = predict_positions(state, net, horizon=3.0, dt=0.5)
    assert len(pred.poses) == 6
    x0, y0 = lane.position(20.0)
    for p in pred.poses:
        assert (p.x, p.y) == pytest.approx((x0, y0))


def test_predict_arc_matches_analytic_circle():
    radius, speed = 20.0, 10.0
    lane = ArcLane(center=(0.0, 0.0), radius=radius, start_angle=-math.pi / 2,
                   sweep=math.radians(170.0))
    net = _single_lane_network(lane)
    state = VehicleState(pose=Pose(*lane.position(0.0), lane.heading_at(0.0)),
                         speed=speed, lane_id="a", longitudinal=0.0)
    pred = predict_positions(state, net, horizon=3.0, dt=0.5)
    for k, pose in enumerate(pred.poses, start=1):
        s = speed * 0.5 * k
        phi = -math.pi / 2 + s / radius
        assert pose.x == pytest.approx(radius * math.cos(phi), abs=1e-9)
        assert pose.y == pytest.approx(radius * math.sin(phi), abs=1e-9)
        assert pose.heading == pytest.approx(normalize_heading(phi + math.pi / 2),
                                             abs=1e-9)


def test_predict_crosses_lane_boundary_and_extrapolates():
    a = StraightLane((0.0, 0.0), heading=0.0, length=15.0)
    b = StraightLane((15.0, 0.0), heading=0.0, length=10.0)
    net = RoadNetwork()
    net.add_lane("a", a)
    net.add_lane("b", b)
    net.link("a", "b")
    state = VehicleState(pose=Pose(0.0, 0.0, 0.0), speed=10.0, lane_id="a",
                         longitudinal=0.0)
    pred = predict_positions(state, net, horizon=4.0, dt=1.0)
    # 10, 20 (on b), 30 (5 m past b's end, extrapolated), 40
    assert [p.x for p in pred.poses] == pytest.approx([10.0, 20.0, 30.0, 40.0])


def test_predict_off_network_flagged():
    net = _single_lane_network(StraightLane((0.0, 0.0), 0.0, 10.0))
    state = VehicleState(pose=Pose(0.0, 0.0, 0.0), speed=5.0, lane_id=None)
    pred = predict_positions(state, net, horizon=3.0, dt=1.0)
    assert pred.poses == () and not pred.on_network


def test_predict_spacing_invariant_on_straight():
    lane = StraightLane((0.0, 0.0), heading=0.0, length=500.0)
    net = _single_lane_network(lane)
    state = VehicleState(pose=Pose(1.0, 0.0, 0.0), speed=7.3, lane_id="a",
                         longitudinal=1.0)
    pred = predict_positions(state, net, horizon=3.0, dt=1.0 / 15.0)
    xs = [1.0] + [p.x for p in pred.poses]
    # spec invariant: arc-length spacing equals speed*dt within 1e-9
    for i in range(1, len(xs)):
        assert abs((xs[i] - xs[i - 1]) - 7.3 / 15.0) < 1e-9


def test_predict_rejects_bad_horizon():
    net = _single_lane_network(StraightLane((0.0, 0.0), 0.0, 10.0))
    state = VehicleState(pose=Pose(0.0, 0.0, 0.0), speed=5.0, lane_id="a")
    with pytest.raises(ContractError):
        predict_positions(state, net, horizon=0.0, dt=1.0)
    with pytest.raises(ContractError):
        predict_positions(state, net, horizon=3.0, dt=0.7)
