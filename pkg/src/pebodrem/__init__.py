"""Adaptive state observer for affine-in-the-states systems with delayed output.

Parameter-estimation-based observer filters feed a dynamic regressor
extension and mixing stage, whose scalar regressions drive a gradient
estimator with fixed-time reconstruction of the unknown initial conditions.
"""
from .drem import (DremState, FctState, clip, drem_step, gradient_step, ie_threshold, mix,
                   reconstruct, theta_fct)
from .errors import (ConfigError, DimensionError, NumericalFailure, ObserverError, OrderingError,
                     OutOfRangeError)
from .history import DelayFunction, SignalHistory, delayed_time
from .linalg import adjugate, determinant, rk4_step
from .pebo import PeboState, Regression, observer_step, regressor, true_theta
from .plant import PlantState, SystemModel, eta_of, measure, plant_step
from .scenario import (EstimateRecord, Metrics, ObserverInit, ScenarioConfig, ScenarioRun,
                       convergence_metrics, load_config, paper_example, run_scenario, write_csv)

__version__ = "0.1.0"
