"""Per-frame big/small selection policies run over a recorded trace.

Each ``run_*`` function walks the trace frame by frame and returns one
:class:`Decision` per frame. :func:`big_mask` computes the same selection for a
whole trace at once and is what threshold sweeps use.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cascade_bench.costs import POLICY_KINDS
from cascade_bench.domain import ConfigError, DomainError, PoseVector, ScalerParams, Trace, predicted_cell
from cascade_bench.errormap import ErrorMap, lookup
from cascade_bench.metrics import scale, scale_array

THRESHOLD_KINDS = ("op", "aux_sm", "aux_hlc")


@dataclass(frozen=True)
class Decision:
    frame_t: int
    invoked_big: bool
    invoked_small: bool
    invoked_aux: bool
    output: PoseVector
    score: float = 0.0

    def __post_init__(self):
        if not (self.invoked_small or self.invoked_big):
            raise DomainError(f"frame {self.frame_t}: a decision must invoke at least one model")


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    threshold: float = math.nan
    big_probability: float = 0.5
    seed: int = 0
    op_uses_absolute_score: bool = True
    error_map: Optional[ErrorMap] = None
    ensemble_average: bool = False  # oracle only: compare small against the OP-style average

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.kind in THRESHOLD_KINDS and math.isnan(self.threshold):
            raise ConfigError(f"policy {self.kind} requires a threshold")
        if self.kind == "random" and not 0.0 <= self.big_probability <= 1.0:
            raise ConfigError(f"big_probability must lie in [0, 1], got {self.big_probability}")
        if self.kind == "aux_hlc" and self.error_map is None:
            raise ConfigError("aux_hlc requires an error map")


def scaled_sum(p: PoseVector, s: ScalerParams) -> float:
    q = scale(p, s)
    return q.x + q.y + q.z + q.phi


def op_score(current: PoseVector, previous: PoseVector, s: ScalerParams, use_abs: bool = True) -> float:
    diff = scaled_sum(current, s) - scaled_sum(previous, s)
    return abs(diff) if use_abs else diff


def score_margin(aux_probs) -> float:
    if len(aux_probs) < 2:
        raise DomainError("score margin needs at least two probabilities")
    first, second = sorted(aux_probs, reverse=True)[:2]
    return first - second


def _average(a: PoseVector, b: PoseVector) -> PoseVector:
    return PoseVector((a.x + b.x) / 2, (a.y + b.y) / 2, (a.z + b.z) / 2, (a.phi + b.phi) / 2)


def run_static(trace: Trace, big: bool) -> list[Decision]:
    return [
        Decision(f.t, big, not big, False, f.big_pred if big else f.small_pred)
        for f in trace.frames
    ]


def run_op_policy(trace: Trace, th_op: float, use_abs: bool = True) -> list[Decision]:
    """Always run small; add big when the scaled output sum jumps, and average the two.

    The first frame has no predecessor and always invokes big.
    """
    out = []
    prev = None
    for f in trace.frames:
        if prev is None:
            score, big = 0.0, True
        else:
            score = op_score(f.small_pred, prev, trace.scaler, use_abs)
            big = score > th_op
        output = _average(f.small_pred, f.big_pred) if big else f.small_pred
        out.append(Decision(f.t, big, True, False, output, score))
        prev = f.small_pred
    return out


def run_aux_sm_policy(trace: Trace, th_sm: float) -> list[Decision]:
    out = []
    for f in trace.frames:
        sm = score_margin(f.aux_probs)
        big = sm <= th_sm
        out.append(Decision(f.t, big, not big, True, f.big_pred if big else f.small_pred, sm))
    return out


def _check_map_grid(trace: Trace, emap: ErrorMap) -> None:
    if emap.grid.cols != trace.grid.cols or emap.grid.rows != trace.grid.rows:
        raise ConfigError(
            f"error map grid {emap.grid.cols}x{emap.grid.rows} does not match "
            f"trace grid {trace.grid.cols}x{trace.grid.rows}"
        )


def run_aux_hlc_policy(trace: Trace, th_hlc: float, emap: ErrorMap) -> list[Decision]:
    _check_map_grid(trace, emap)
    out = []
    for f in trace.frames:
        e = lookup(emap, predicted_cell(f.aux_probs, trace.grid))
        big = e > th_hlc
        out.append(Decision(f.t, big, not big, True, f.big_pred if big else f.small_pred, e))
    return out


def random_draws(n: int, p_big: float, seed: int) -> list[bool]:
    rng = random.Random(seed)
    return [rng.random() < p_big for _ in range(n)]


def run_random_policy(trace: Trace, p_big: float, seed: int) -> list[Decision]:
    if not 0.0 <= p_big <= 1.0:
        raise DomainError(f"p_big must lie in [0, 1], got {p_big}")
    draws = random_draws(len(trace), p_big, seed)
    return [
        Decision(f.t, big, not big, False, f.big_pred if big else f.small_pred)
        for f, big in zip(trace.frames, draws)
    ]


def _err_sum(pred: PoseVector, gt: PoseVector) -> float:
    return abs(pred.x - gt.x) + abs(pred.y - gt.y) + abs(pred.z - gt.z) + abs(pred.phi - gt.phi)


def run_oracle_policy(trace: Trace, ensemble_average: bool = False) -> list[Decision]:
    """Pick whichever candidate has the lower summed absolute error; ties go to small."""
    out = []
    for f in trace.frames:
        candidate = _average(f.small_pred, f.big_pred) if ensemble_average else f.big_pred
        big = _err_sum(candidate, f.gt) < _err_sum(f.small_pred, f.gt)
        # with averaging the small model ran too, as under OP
        small = ensemble_average or not big
        out.append(Decision(f.t, big, small, False, candidate if big else f.small_pred))
    return out


def run_policy(trace: Trace, cfg: PolicyConfig) -> list[Decision]:
    if cfg.kind == "static_small":
        return run_static(trace, big=False)
    if cfg.kind == "static_big":
        return run_static(trace, big=True)
    if cfg.kind == "random":
        return run_random_policy(trace, cfg.big_probability, cfg.seed)
    if cfg.kind == "op":
        return run_op_policy(trace, cfg.threshold, cfg.op_uses_absolute_score)
    if cfg.kind == "aux_sm":
        return run_aux_sm_policy(trace, cfg.threshold)
    if cfg.kind == "aux_hlc":
        return run_aux_hlc_policy(trace, cfg.threshold, cfg.error_map)
    return run_oracle_policy(trace, cfg.ensemble_average)


def outputs_array(decisions: list[Decision]) -> np.ndarray:
    return np.array([d.output.as_tuple() for d in decisions], dtype=float)


# Vectorized scores and selections used by sweeps.


def op_scores(trace: Trace, use_abs: bool = True) -> np.ndarray:
    """Per-frame OP scores; frame 0 gets 0."""
    q = scale_array(trace.small_array, trace.scaler)
    # same left-to-right association as scaled_sum, so scores match bit for bit
    sums = q[:, 0] + q[:, 1] + q[:, 2] + q[:, 3]
    scores = np.zeros(len(trace))
    scores[1:] = sums[1:] - sums[:-1]
    return np.abs(scores) if use_abs else scores


def sm_scores(trace: Trace) -> np.ndarray:
    top2 = -np.sort(-trace.aux_array, axis=1)[:, :2]
    return top2[:, 0] - top2[:, 1]


def hlc_scores(trace: Trace, emap: ErrorMap) -> np.ndarray:
    _check_map_grid(trace, emap)
    cells = trace.predicted_cells
    return emap.as_array()[cells[:, 1], cells[:, 0]]


def policy_scores(trace: Trace, kind: str, emap: Optional[ErrorMap] = None, use_abs: bool = True) -> np.ndarray:
    if kind == "op":
        return op_scores(trace, use_abs)
    if kind == "aux_sm":
        return sm_scores(trace)
    if kind == "aux_hlc":
        if emap is None:
            raise ConfigError("aux_hlc requires an error map")
        return hlc_scores(trace, emap)
    raise ConfigError(f"policy {kind!r} has no threshold score")


def big_mask(scores: np.ndarray, kind: str, threshold: float) -> np.ndarray:
    if kind == "aux_sm":
        return scores <= threshold
    mask = scores > threshold
    if kind == "op":
        mask[0] = True
    return mask


def mask_outputs(trace: Trace, kind: str, mask: np.ndarray) -> np.ndarray:
    """Output stream of a policy given its per-frame big-model selection."""
    small, big = trace.small_array, trace.big_array
    chosen = (small + big) / 2 if kind == "op" else big
    return np.where(mask[:, None], chosen, small)
