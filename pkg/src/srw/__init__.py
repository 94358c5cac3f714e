"""Sedentary random waypoint mobility: simulation, detection, percolation.

Walkers alternate random-waypoint excursions with alarm-clock returns to a
fixed home. The package simulates the model (and its classical and
interpolation relatives) event by event, measures detection and coverage
times against exponential tail bounds, estimates stationary densities, and
runs the home-thinning percolation experiment. Hot geometric kernels have
a compiled backend with a pure-Python fallback; see srw.kernels.BACKEND.
"""

__version__ = "0.1.0"

from .config import (MobilityConfig, ParseError, ValidationError,
                     config_hash, emit_config, parse_config, with_overrides)
from .detection import (BoundConstants, DegenerateBound, EpsNotLessThanR,
                        SurvivalCurve, TargetOutsideErodedDomain,
                        compute_bound_constants, coverage_time,
                        detect_mobile, detect_static, estimate_survival,
                        survival_from_times, wilson_interval)
from .geometry import EmptyErosion, Point2, RectDomain, distance, erode
from .kernels import BACKEND
from .mobility import (FLAG_HOME, FLAG_WAYPOINT, HorizonExceeded,
                       MobilityModel, ModelVariant, WalkerState,
                       WalkerTrajectory, advance_to, homecoming_times,
                       init_walker, next_leg, position_at, waypoint_count)
from .percolation import (ClusterReport, GilbertGraph, PhaseResult,
                          RadiusUnderflow, border_center_densities,
                          build_graph, clusters, displaced_homogeneity_check,
                          estimate_lambda_c, near_home_thinning,
                          phase_experiment, thinned_connect_radius)
from .replication import resolve_workers, run_indexed
from .rng import RngStream
from .sampling import (AlarmMeasure, AnnulusUniform, BallUniform,
                       CenteredPowerTail, DeterministicAlarm,
                       ExponentialAlarm, Hotspot, HotspotMixture,
                       SupportOutsideDomain, TabulatedVelocity,
                       UniformAlarm, UniformDomain, UniformVelocity,
                       VelocityMeasure, WaypointMeasure,
                       measure_mass_on_ball, sample_ppp, thin)
from .stationary import (SpatialHistogram, density_distance,
                         mean_leg_duration, palm_ratio_estimate, rwp_density,
                         stationary_positions, time_average_occupation)
from .traces import export_trace, import_trace

__all__ = [
    "__version__", "BACKEND",
    # geometry / rng
    "Point2", "RectDomain", "distance", "erode", "EmptyErosion", "RngStream",
    # measures
    "WaypointMeasure", "UniformDomain", "BallUniform", "AnnulusUniform",
    "CenteredPowerTail", "Hotspot", "HotspotMixture", "VelocityMeasure",
    "UniformVelocity", "TabulatedVelocity", "AlarmMeasure",
    "DeterministicAlarm", "ExponentialAlarm", "UniformAlarm",
    "SupportOutsideDomain", "measure_mass_on_ball", "sample_ppp", "thin",
    # mobility
    "ModelVariant", "MobilityModel", "WalkerState", "WalkerTrajectory",
    "FLAG_HOME", "FLAG_WAYPOINT", "HorizonExceeded", "init_walker",
    "next_leg", "advance_to", "position_at", "waypoint_count",
    "homecoming_times",
    # detection & bounds
    "detect_static", "detect_mobile", "coverage_time", "estimate_survival",
    "survival_from_times", "wilson_interval", "SurvivalCurve",
    "BoundConstants", "compute_bound_constants", "DegenerateBound",
    "EpsNotLessThanR", "TargetOutsideErodedDomain",
    # stationary
    "stationary_positions", "palm_ratio_estimate", "time_average_occupation",
    "mean_leg_duration", "rwp_density", "density_distance",
    "SpatialHistogram",
    # percolation
    "GilbertGraph", "ClusterReport", "build_graph", "clusters",
    "estimate_lambda_c", "near_home_thinning", "phase_experiment",
    "PhaseResult", "RadiusUnderflow", "border_center_densities",
    "displaced_homogeneity_check", "thinned_connect_radius",
    # config / orchestration
    "MobilityConfig", "parse_config", "emit_config", "config_hash",
    "with_overrides", "ParseError", "ValidationError", "run_indexed",
    "resolve_workers", "export_trace", "import_trace",
]
