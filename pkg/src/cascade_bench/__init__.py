"""Trace-driven evaluation of big/little inference cascades for pose regression."""

from cascade_bench.domain import (
    ConfigError,
    DomainError,
    FrameRecord,
    GridSpec,
    PoseVector,
    ScalerParams,
    Trace,
    head_cell,
    predicted_cell,
)
from cascade_bench.metrics import MaeBreakdown, abs_error, mae, scale
from cascade_bench.costs import CostReport, CostTable, ModelCost, cost_aux, cost_op, memory_footprint
from cascade_bench.errormap import ErrorMap, build_error_map, lookup
from cascade_bench.policies import Decision, PolicyConfig, run_policy
from cascade_bench.sweep import OperatingPoint, compare_policies, pareto_front, sweep
from cascade_bench.synth import SynthConfig, generate

__all__ = [
    "ConfigError",
    "CostReport",
    "CostTable",
    "Decision",
    "DomainError",
    "ErrorMap",
    "FrameRecord",
    "GridSpec",
    "MaeBreakdown",
    "ModelCost",
    "OperatingPoint",
    "PolicyConfig",
    "PoseVector",
    "ScalerParams",
    "SynthConfig",
    "Trace",
    "abs_error",
    "build_error_map",
    "compare_policies",
    "cost_aux",
    "cost_op",
    "generate",
    "head_cell",
    "lookup",
    "mae",
    "memory_footprint",
    "pareto_front",
    "predicted_cell",
    "run_policy",
    "scale",
    "sweep",
]
