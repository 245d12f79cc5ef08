"""Threshold sweeps, Pareto fronts and multi-policy comparison."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from cascade_bench.costs import CostReport, CostTable, report, report_from_fraction
from cascade_bench.domain import ConfigError, DomainError, Trace
from cascade_bench.errormap import ErrorMap
from cascade_bench.metrics import MaeBreakdown, mae_array
from cascade_bench.policies import (
    THRESHOLD_KINDS,
    PolicyConfig,
    big_mask,
    mask_outputs,
    outputs_array,
    policy_scores,
    random_draws,
    run_policy,
)

DEFAULT_RANDOM_GRID = tuple(i / 20 for i in range(21))
ADAPTIVE_KINDS = ("random", "op", "aux_sm", "aux_hlc")


@dataclass(frozen=True)
class OperatingPoint:
    policy_kind: str
    threshold: float
    mae: MaeBreakdown
    big_fraction: float
    cost: CostReport
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label or self.policy_kind


def candidate_thresholds(
    trace: Trace, policy_kind: str, emap: Optional[ErrorMap] = None, use_abs: bool = True
) -> list[float]:
    """Every distinct score the policy sees on this trace, bracketed by two sentinels.

    For ``random`` the "threshold" is the big-model probability and a fixed grid is
    returned; static and oracle policies have a single, threshold-free point.
    """
    if policy_kind == "random":
        return list(DEFAULT_RANDOM_GRID)
    if policy_kind not in THRESHOLD_KINDS:
        return [math.nan]
    if policy_kind == "aux_hlc":
        if emap is None:
            raise ConfigError("aux_hlc requires an error map")
        values = emap.distinct_values()
    else:
        scores = policy_scores(trace, policy_kind, emap, use_abs)
        if policy_kind == "op" and len(scores) > 1:
            scores = scores[1:]  # frame 0 invokes big regardless
        values = sorted(set(scores.tolist()))
    return [values[0] - 1.0, *values, values[-1] + 1.0]


def _point(trace: Trace, kind: str, threshold: float, outputs: np.ndarray, n_big: int,
           costs: CostTable) -> OperatingPoint:
    f = n_big / len(trace)
    return OperatingPoint(kind, threshold, mae_array(outputs, trace.gt_array), f,
                          report_from_fraction(f, costs, kind))


def run_point(trace: Trace, cfg: PolicyConfig, costs: CostTable, label: Optional[str] = None) -> OperatingPoint:
    """Operating point of a single full policy run."""
    decisions = run_policy(trace, cfg)
    cost = report(decisions, costs, cfg.kind)
    threshold = cfg.big_probability if cfg.kind == "random" else cfg.threshold
    return OperatingPoint(cfg.kind, threshold, mae_array(outputs_array(decisions), trace.gt_array),
                          cost.big_fraction, cost, label)


def sweep(
    trace: Trace,
    policy_kind: str,
    costs: CostTable,
    emap: Optional[ErrorMap] = None,
    *,
    use_abs: bool = True,
    seed: int = 0,
    thresholds: Optional[Sequence[float]] = None,
) -> list[OperatingPoint]:
    """One operating point per candidate threshold, in threshold order."""
    if thresholds is None:
        thresholds = candidate_thresholds(trace, policy_kind, emap, use_abs)
    if policy_kind in THRESHOLD_KINDS:
        scores = policy_scores(trace, policy_kind, emap, use_abs)
        points = []
        for th in thresholds:
            mask = big_mask(scores, policy_kind, th)
            points.append(_point(trace, policy_kind, th, mask_outputs(trace, policy_kind, mask),
                                 int(mask.sum()), costs))
        return points
    if policy_kind == "random":
        points = []
        for p in thresholds:
            mask = np.array(random_draws(len(trace), p, seed), dtype=bool)
            points.append(_point(trace, "random", p, mask_outputs(trace, "random", mask),
                                 int(mask.sum()), costs))
        return points
    return [run_point(trace, PolicyConfig(policy_kind), costs)]


def _sort_key(p: OperatingPoint, cost_dimension: str):
    th = p.threshold if not math.isnan(p.threshold) else math.inf
    return (p.cost.get(cost_dimension), p.mae.mae_sum, th)


def pareto_front(points: Sequence[OperatingPoint], cost_dimension: str = "cycles") -> list[OperatingPoint]:
    """Non-dominated points in the (cost, mae_sum) plane, cheapest first.

    Exact duplicates collapse onto the one with the lowest threshold.
    """
    if not points:
        raise DomainError("pareto front of an empty point set")
    front = []
    best = math.inf
    for p in sorted(points, key=lambda p: _sort_key(p, cost_dimension)):
        if p.mae.mae_sum < best:
            front.append(p)
            best = p.mae.mae_sum
    return front


@dataclass
class Comparison:
    cost_dimension: str
    points: dict[str, list[OperatingPoint]] = field(default_factory=dict)
    fronts: dict[str, list[OperatingPoint]] = field(default_factory=dict)
    baselines: dict[str, OperatingPoint] = field(default_factory=dict)

    def rows(self) -> list[OperatingPoint]:
        """Front points per policy, then baselines; the order emitters use."""
        out = []
        for kind in self.fronts:
            out.extend(self.fronts[kind])
        out.extend(self.baselines.values())
        return out

    def iso_mae(self, target: float, tol: float) -> Optional[OperatingPoint]:
        """Cheapest adaptive front point with ``mae_sum <= target + tol``."""
        eligible = [p for front in self.fronts.values() for p in front if p.mae.mae_sum <= target + tol]
        if not eligible:
            return None
        return min(eligible, key=lambda p: _sort_key(p, self.cost_dimension))


def compare_policies(
    trace: Trace,
    costs: CostTable,
    maps: Optional[Mapping[str, ErrorMap] | ErrorMap] = None,
    policies: Sequence[str] = ADAPTIVE_KINDS,
    cost_dimension: str = "cycles",
    *,
    seed: int = 0,
    jobs: int = 1,
) -> Comparison:
    """Sweep every policy, extract fronts and attach static and oracle baselines.

    Two oracle baselines are reported: ``oracle`` picks small or big per frame,
    ``oracle_avg`` picks small or the small/big average, matching OP's candidates.
    """
    emap = maps.get("aux_hlc") if isinstance(maps, Mapping) else maps
    for kind in policies:
        if kind not in ADAPTIVE_KINDS:
            raise ConfigError(f"{kind!r} is not an adaptive policy")
    if "aux_hlc" in policies and emap is None:
        raise ConfigError("aux_hlc requires an error map")

    def run(kind):
        return sweep(trace, kind, costs, emap if kind == "aux_hlc" else None, seed=seed)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, policies))
    else:
        results = [run(kind) for kind in policies]

    cmp = Comparison(cost_dimension)
    for kind, pts in zip(policies, results):
        cmp.points[kind] = pts
        cmp.fronts[kind] = pareto_front(pts, cost_dimension)
    cmp.baselines["static_small"] = run_point(trace, PolicyConfig("static_small"), costs)
    cmp.baselines["static_big"] = run_point(trace, PolicyConfig("static_big"), costs)
    cmp.baselines["oracle"] = run_point(trace, PolicyConfig("oracle"), costs)
    cmp.baselines["oracle_avg"] = run_point(trace, PolicyConfig("oracle", ensemble_average=True), costs,
                                            label="oracle_avg")
    return cmp


def mixture_mae(small: MaeBreakdown, big: MaeBreakdown, p_big: float) -> MaeBreakdown:
    """Expected MAE when each frame independently uses big with probability ``p_big``."""
    return MaeBreakdown.from_components(
        (1.0 - p_big) * s + p_big * b for s, b in zip(small.as_tuple()[:4], big.as_tuple()[:4])
    )


def expected_random_mae(trace: Trace, p_big: float) -> float:
    """Exact expectation of the random policy's mae_sum over its draws."""
    small = mae_array(trace.small_array, trace.gt_array)
    big = mae_array(trace.big_array, trace.gt_array)
    return mixture_mae(small, big, p_big).mae_sum
