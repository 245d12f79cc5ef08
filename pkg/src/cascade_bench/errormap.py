"""Per-cell small-vs-big error map driving the Aux-HLC policy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cascade_bench.domain import DomainError, GridSpec, Trace


@dataclass(frozen=True)
class ErrorMap:
    """``values[row][col]`` is the mean small-minus-big error for that cell.

    Cells without validation samples (``support == 0``) hold ``fallback``.
    """

    grid: GridSpec
    values: tuple[tuple[float, ...], ...]
    support: tuple[tuple[int, ...], ...]
    fallback: float

    def __post_init__(self):
        shape = (self.grid.rows, self.grid.cols)
        if np.shape(self.values) != shape or np.shape(self.support) != shape:
            raise DomainError(f"error map tables must be {shape[0]} rows x {shape[1]} cols")

    def distinct_values(self) -> list[float]:
        return sorted({v for row in self.values for v in row})

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def lookup(emap: ErrorMap, cell: tuple[int, int]) -> float:
    col, row = cell
    if not (0 <= col < emap.grid.cols and 0 <= row < emap.grid.rows):
        raise DomainError(f"cell {cell} outside {emap.grid.cols}x{emap.grid.rows} grid")
    return emap.values[row][col]


def build_error_map(validation: Trace) -> ErrorMap:
    """Bucket validation frames by ground-truth head cell and average the error gap.

    The per-frame error of a model is the sum of its four absolute errors.
    """
    grid = validation.grid
    gt = validation.gt_array
    small_err = np.abs(validation.small_array - gt).sum(axis=1)
    big_err = np.abs(validation.big_array - gt).sum(axis=1)
    cells = validation.head_cells
    flat = cells[:, 1] * grid.cols + cells[:, 0]

    support = np.bincount(flat, minlength=grid.n_cells)
    small_sum = np.bincount(flat, weights=small_err, minlength=grid.n_cells)
    big_sum = np.bincount(flat, weights=big_err, minlength=grid.n_cells)
    populated = support > 0

    values = np.empty(grid.n_cells)
    values[populated] = small_sum[populated] / support[populated] - big_sum[populated] / support[populated]
    fallback = float(np.sum(values[populated] * support[populated]) / support.sum())
    values[~populated] = fallback

    return ErrorMap(
        grid=grid,
        values=tuple(tuple(float(v) for v in row) for row in values.reshape(grid.rows, grid.cols)),
        support=tuple(tuple(int(s) for s in row) for row in support.reshape(grid.rows, grid.cols)),
        fallback=fallback,
    )
