"""gatesim: event-camera drone simulation with energy-aware intercept planning.

Subpackages by pipeline stage: ``scene`` (world and event generation),
``tracker`` (spiking gate tracking), ``motor`` (actuation energy model),
``fitting`` (energy profiles to training data), ``pgnn`` (velocity
predictor), ``planner`` (intercept and trajectories), ``harness``
(closed-loop episodes and benchmarks).
"""

from . import errors, fitting, harness, motor, pgnn, planner, scene, tracker

__all__ = [
    "errors",
    "fitting",
    "harness",
    "motor",
    "pgnn",
    "planner",
    "scene",
    "tracker",
]

__version__ = "0.1.0"
