from .config import (
    INTERSECTION,
    KINDS,
    PHYSICS_RATE,
    ROUNDABOUT,
    ScenarioConfig,
    load_scenario_config,
    parse_kv_file,
    scenario_config_from_entries,
)
from .core import EnvState, JunctionEnv, Outcome, StepResult, Vehicle
from .observation import FEATURE_COUNT, FEATURES, POSITION_RANGE, SPEED_RANGE, build_observation, rank_others

__all__ = [
    "INTERSECTION", "ROUNDABOUT", "KINDS", "PHYSICS_RATE",
    "ScenarioConfig", "load_scenario_config", "parse_kv_file",
    "scenario_config_from_entries",
    "EnvState", "JunctionEnv", "Outcome", "StepResult", "Vehicle",
    "FEATURES", "FEATURE_COUNT", "POSITION_RANGE", "SPEED_RANGE",
    "build_observation", "rank_others",
]
