from .pose import Pose, normalize_heading
from .lanes import ArcLane, Lane, LaneCoords, RoadNetwork, StraightLane, lane_frame
from .kinematics import (
    ACCEL_MAX,
    ACCEL_MIN,
    STEERING_MAX,
    VEHICLE_LENGTH,
    VEHICLE_WIDTH,
    WHEELBASE,
    BicycleCommand,
    TrajectoryPrediction,
    VehicleState,
    predict_positions,
    step_bicycle,
)
from .collision import (
    convex_hull,
    convex_polygons_collide,
    footprint_corners,
    footprints_collide,
    swept_rectangles_collide,
    vehicle_corners,
)

__all__ = [
    "Pose", "normalize_heading",
    "ArcLane", "Lane", "LaneCoords", "RoadNetwork", "StraightLane", "lane_frame",
    "BicycleCommand", "TrajectoryPrediction", "VehicleState",
    "predict_positions", "step_bicycle",
    "ACCEL_MAX", "ACCEL_MIN", "STEERING_MAX",
    "VEHICLE_LENGTH", "VEHICLE_WIDTH", "WHEELBASE",
    "convex_hull", "convex_polygons_collide", "footprint_corners",
    "footprints_collide", "swept_rectangles_collide", "vehicle_corners",
]
