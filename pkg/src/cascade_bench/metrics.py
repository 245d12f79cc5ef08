"""Min-max scaling and mean-absolute-error metrics.

Errors are always measured in physical units; scaling only feeds the OP score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from cascade_bench.domain import DomainError, PoseVector, ScalerParams


@dataclass(frozen=True)
class MaeBreakdown:
    mae_x: float
    mae_y: float
    mae_z: float
    mae_phi: float
    mae_sum: float

    @classmethod
    def from_components(cls, per_var: Sequence[float]) -> "MaeBreakdown":
        x, y, z, phi = (float(v) for v in per_var)
        return cls(x, y, z, phi, x + y + z + phi)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.mae_x, self.mae_y, self.mae_z, self.mae_phi, self.mae_sum)


def scale(p: PoseVector, s: ScalerParams) -> PoseVector:
    """Map each component to ``(v - min) / (max - min)``; no clamping."""
    return PoseVector(
        (p.x - s.x[0]) / (s.x[1] - s.x[0]),
        (p.y - s.y[0]) / (s.y[1] - s.y[0]),
        (p.z - s.z[0]) / (s.z[1] - s.z[0]),
        (p.phi - s.phi[0]) / (s.phi[1] - s.phi[0]),
    )


def scale_array(values: np.ndarray, s: ScalerParams) -> np.ndarray:
    return (values - s.mins) / (s.maxs - s.mins)


def abs_error(pred: PoseVector, gt: PoseVector) -> PoseVector:
    return PoseVector(abs(pred.x - gt.x), abs(pred.y - gt.y), abs(pred.z - gt.z), abs(pred.phi - gt.phi))


def mae_array(pred: np.ndarray, gt: np.ndarray) -> MaeBreakdown:
    """MAE of two ``(N, 4)`` arrays."""
    if pred.shape != gt.shape:
        raise DomainError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    if len(pred) == 0:
        raise DomainError("MAE of an empty sequence is undefined")
    return MaeBreakdown.from_components(np.mean(np.abs(pred - gt), axis=0))


def mae(decided_outputs: Sequence[PoseVector], gts: Sequence[PoseVector]) -> MaeBreakdown:
    if len(decided_outputs) != len(gts):
        raise DomainError(f"length mismatch: {len(decided_outputs)} outputs vs {len(gts)} ground truths")
    if not decided_outputs:
        raise DomainError("MAE of an empty sequence is undefined")
    pred = np.array([p.as_tuple() for p in decided_outputs], dtype=float)
    gt = np.array([g.as_tuple() for g in gts], dtype=float)
    return mae_array(pred, gt)
