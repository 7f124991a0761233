"""Numerical toolkit for the relaxation oscillation of the Brusselator.

Submodules
----------
frames
    Coordinate frames, vector fields, coordinate and clock changes.
geometry
    Critical manifolds, the singular cycle, slow-manifold expansions and
    Hausdorff distances.
flow
    Adaptive integrator with event location and time ledgers.
poincare
    Sections, return map, limit cycle and dwell times.
blowup
    Blow-up chart geometry and the exit-chart bounds.
sweep
    Epsilon sweeps, power-law fits and the scaling report.
cli
    Command-line entry point ``brusselator-gsp``.
"""
from __future__ import annotations

from .flow import IntegratorConfig, TimeLedger, integrate, integrate_to_event
from .frames import Clock, Frame, FrameState, Params, eval_vector_field, transform_state
from .geometry import CurvePolyline, singular_cycle
from .poincare import LimitCycle, fixed_point, return_map
from .sweep import fit_power_law, run_sweep, scaling_report

__version__ = "0.1.0"

__all__ = [
    "Clock",
    "CurvePolyline",
    "Frame",
    "FrameState",
    "IntegratorConfig",
    "LimitCycle",
    "Params",
    "TimeLedger",
    "eval_vector_field",
    "fit_power_law",
    "fixed_point",
    "integrate",
    "integrate_to_event",
    "return_map",
    "run_sweep",
    "scaling_report",
    "singular_cycle",
    "transform_state",
]
