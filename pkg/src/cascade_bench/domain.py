"""Core value types shared by every module: poses, scalers, grids, frames, traces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

VARIABLES = ("x", "y", "z", "phi")
SPLITS = ("train", "validation", "test")

# |sum(p) - 1| above this is renormalized on load, above PROB_REJECT_TOL rejected
PROB_SUM_TOL = 1e-6
PROB_REJECT_TOL = 1e-3


class DomainError(ValueError):
    """A value violates a domain invariant."""


class ConfigError(ValueError):
    """Inconsistent configuration, e.g. a grid mismatch between trace and map."""


@dataclass(frozen=True)
class PoseVector:
    x: float
    y: float
    z: float
    phi: float

    def __post_init__(self):
        for name in VARIABLES:
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"pose component {name} is not finite: {getattr(self, name)!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.phi)

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "PoseVector":
        x, y, z, phi = (float(v) for v in values)
        return cls(x, y, z, phi)


@dataclass(frozen=True)
class ScalerParams:
    """Per-variable (min, max) ranges used for min-max scaling."""

    x: tuple[float, float]
    y: tuple[float, float]
    z: tuple[float, float]
    phi: tuple[float, float]

    def __post_init__(self):
        for name in VARIABLES:
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo:
                raise DomainError(f"scaler range for {name} must satisfy max > min, got ({lo}, {hi})")

    @property
    def mins(self) -> np.ndarray:
        return np.array([getattr(self, n)[0] for n in VARIABLES], dtype=float)

    @property
    def maxs(self) -> np.ndarray:
        return np.array([getattr(self, n)[1] for n in VARIABLES], dtype=float)


@dataclass(frozen=True)
class GridSpec:
    cols: int
    rows: int
    image_width: int
    image_height: int

    def __post_init__(self):
        for name in ("cols", "rows", "image_width", "image_height"):
            if getattr(self, name) < 1:
                raise DomainError(f"grid {name} must be >= 1, got {getattr(self, name)}")

    @property
    def n_cells(self) -> int:
        return self.cols * self.rows


def head_cell(head_u: float, head_v: float, grid: GridSpec, frame_t: int | None = None) -> tuple[int, int]:
    """Grid cell ``(col, row)`` containing the pixel ``(head_u, head_v)``."""
    if not (0 <= head_u < grid.image_width and 0 <= head_v < grid.image_height):
        where = f" at frame {frame_t}" if frame_t is not None else ""
        raise DomainError(
            f"head pixel ({head_u}, {head_v}){where} outside {grid.image_width}x{grid.image_height} image"
        )
    col = math.floor(head_u * grid.cols / grid.image_width)
    row = math.floor(head_v * grid.rows / grid.image_height)
    return min(col, grid.cols - 1), min(row, grid.rows - 1)


def predicted_cell(aux_probs: Sequence[float], grid: GridSpec) -> tuple[int, int]:
    """Argmax cell of the auxiliary classifier, row-major flattening, ties to the lowest index."""
    if len(aux_probs) != grid.n_cells:
        raise DomainError(f"expected {grid.n_cells} aux probabilities, got {len(aux_probs)}")
    # max() keeps the first maximal element
    k = max(range(len(aux_probs)), key=aux_probs.__getitem__)
    return k % grid.cols, k // grid.cols


@dataclass(frozen=True)
class FrameRecord:
    t: int
    gt: PoseVector
    small_pred: PoseVector
    big_pred: PoseVector
    head_u: float
    head_v: float
    aux_probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.aux_probs)
        object.__setattr__(self, "aux_probs", probs)
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise DomainError(f"frame {self.t}: aux probabilities must lie in [0, 1]")
        if probs and abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"frame {self.t}: aux probabilities sum to {math.fsum(probs)!r}, not 1")


def normalize_probs(probs: Sequence[float], frame_t: int) -> tuple[float, ...]:
    """Renormalize a near-stochastic vector; leaves already-valid vectors untouched."""
    total = math.fsum(probs)
    err = abs(total - 1.0)
    if err <= PROB_SUM_TOL:
        return tuple(probs)
    if err <= PROB_REJECT_TOL:
        return tuple(p / total for p in probs)
    raise DomainError(f"frame {frame_t}: aux probabilities sum to {total!r}")


@dataclass(frozen=True)
class Trace:
    grid: GridSpec
    scaler: ScalerParams
    frames: tuple[FrameRecord, ...]
    split_tag: str = "test"

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise DomainError("trace must contain at least one frame")
        if self.split_tag not in SPLITS:
            raise DomainError(f"split tag must be one of {SPLITS}, got {self.split_tag!r}")
        prev = None
        for f in self.frames:
            if prev is not None and f.t <= prev:
                raise DomainError(f"frame indices must be strictly increasing ({prev} then {f.t})")
            prev = f.t
            if len(f.aux_probs) != self.grid.n_cells:
                raise DomainError(
                    f"frame {f.t}: {len(f.aux_probs)} aux probabilities for a "
                    f"{self.grid.cols}x{self.grid.rows} grid"
                )
            head_cell(f.head_u, f.head_v, self.grid, frame_t=f.t)

    def __len__(self) -> int:
        return len(self.frames)

    # Column views for vectorized evaluation; not part of equality.
    @cached_property
    def gt_array(self) -> np.ndarray:
        return np.array([f.gt.as_tuple() for f in self.frames], dtype=float)

    @cached_property
    def small_array(self) -> np.ndarray:
        return np.array([f.small_pred.as_tuple() for f in self.frames], dtype=float)

    @cached_property
    def big_array(self) -> np.ndarray:
        return np.array([f.big_pred.as_tuple() for f in self.frames], dtype=float)

    @cached_property
    def aux_array(self) -> np.ndarray:
        return np.array([f.aux_probs for f in self.frames], dtype=float)

    @cached_property
    def head_cells(self) -> np.ndarray:
        """(N, 2) array of ground-truth head cells as (col, row)."""
        return np.array([head_cell(f.head_u, f.head_v, self.grid, f.t) for f in self.frames], dtype=int)

    @cached_property
    def predicted_cells(self) -> np.ndarray:
        """(N, 2) array of aux-predicted cells as (col, row)."""
        k = np.argmax(self.aux_array, axis=1)  # first max on ties, same rule as predicted_cell
        return np.stack([k % self.grid.cols, k // self.grid.cols], axis=1)
