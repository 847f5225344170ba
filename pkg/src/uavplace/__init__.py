"""UAV base-station 3D placement and downlink evaluation."""
from .channel import EnvironmentParams, RadioConfig
from .evaluation import ConstraintReport, check_constraints, sumrate
from .geometry import Circle, Point2, min_covering_circle
from .placement import (
    Association,
    FleetExhaustedError,
    PlacementResult,
    UavPlacement,
    gbs_only,
    place,
)
from .results import load_result, save_result
from .scenario import CrowdSpec, Hotspot, Scenario, generate, load_scenario, make_scenario, flash_crowd

__version__ = "0.1.0"
