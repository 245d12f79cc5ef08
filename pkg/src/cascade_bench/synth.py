"""Seeded synthetic traces with the error structure each policy keys on.

Ground truth follows a reflected random walk inside the scaler box and the head
pixel a reflected walk inside the image. The small model's noise grows with

* border position: ``border_penalty`` per image border the head cell touches
  (so corner cells pay it twice),
* blur: a random ``blur_rate`` of frames get ``blur_penalty`` and a less
  confident aux classifier,
* motion: ``1 + motion_gain * |step|`` with the step in units of ``motion``.

The big model sees none of these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cascade_bench.domain import DomainError, FrameRecord, GridSpec, PoseVector, ScalerParams, Trace

SPLIT_FRACTIONS = (0.7, 0.2, 0.1)


def _default_scaler() -> ScalerParams:
    return ScalerParams(x=(0.5, 3.0), y=(-1.5, 1.5), z=(-1.0, 1.0), phi=(-math.pi / 2, math.pi / 2))


@dataclass(frozen=True)
class SynthConfig:
    n_frames: int = 10_000
    seed: int = 0
    grid: GridSpec = field(default_factory=lambda: GridSpec(8, 6, 320, 240))
    scaler: ScalerParams = field(default_factory=_default_scaler)
    motion: tuple[float, ...] = (0.05, 0.05, 0.03, 0.08)
    head_step: float = 0.06  # fraction of image size per frame
    small_noise_sigma: tuple[float, ...] = (0.30, 0.30, 0.32, 0.60)
    big_noise_sigma: tuple[float, ...] = (0.24, 0.18, 0.29, 0.58)
    border_penalty: float = 1.5
    aux_accuracy: float = 0.8
    aux_confidence: float = 0.8
    confidence_jitter: float = 0.3
    blur_rate: float = 0.1
    blur_penalty: float = 2.0
    motion_gain: float = 0.25

    def __post_init__(self):
        if self.n_frames < 10:
            raise DomainError("n_frames must be >= 10 so every split is non-empty")
        for name in ("motion", "small_noise_sigma", "big_noise_sigma"):
            if len(getattr(self, name)) != 4 or any(v < 0 for v in getattr(self, name)):
                raise DomainError(f"{name} must be four non-negative values")
        if any(b > s for b, s in zip(self.big_noise_sigma, self.small_noise_sigma)):
            raise DomainError("big_noise_sigma must not exceed small_noise_sigma")
        if not 0.0 <= self.aux_accuracy <= 1.0:
            raise DomainError("aux_accuracy must lie in [0, 1]")
        if not 0.0 < self.aux_confidence <= 1.0:
            raise DomainError("aux_confidence must lie in (0, 1]")
        if not 0.0 <= self.confidence_jitter < 1.0 or not 0.0 <= self.blur_rate <= 1.0:
            raise DomainError("confidence_jitter must lie in [0, 1) and blur_rate in [0, 1]")
        if self.border_penalty < 1 or self.blur_penalty < 1 or self.motion_gain < 0 or self.head_step < 0:
            raise DomainError("penalties must be >= 1 and motion_gain, head_step >= 0")


def hard_borders_config(n_frames: int = 10_000, seed: int = 0) -> SynthConfig:
    """Perfect aux classifier, small model only bad near the borders."""
    return SynthConfig(
        n_frames=n_frames,
        seed=seed,
        small_noise_sigma=(0.20, 0.15, 0.25, 0.50),
        big_noise_sigma=(0.19, 0.14, 0.23, 0.48),
        border_penalty=3.0,
        aux_accuracy=1.0,
        aux_confidence=0.9,
        blur_rate=0.0,
        motion_gain=0.0,
    )


def _reflect(v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    width = hi - lo
    r = np.mod(v - lo, 2 * width)
    return lo + np.where(r > width, 2 * width - r, r)


def border_touches(cols: np.ndarray, rows: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Number of image borders (0, 1 or 2) a cell touches."""
    on_col = (cols == 0) | (cols == grid.cols - 1)
    on_row = (rows == 0) | (rows == grid.rows - 1)
    return on_col.astype(int) + on_row.astype(int)


def _simulate(cfg: SynthConfig):
    rng = np.random.default_rng(cfg.seed)
    n, grid = cfg.n_frames, cfg.grid
    k = grid.n_cells
    lo, hi = cfg.scaler.mins, cfg.scaler.maxs
    motion = np.asarray(cfg.motion, dtype=float)

    steps = rng.normal(size=(n, 4)) * motion
    gt = np.empty((n, 4))
    gt[0] = (lo + hi) / 2
    for t in range(1, n):
        gt[t] = _reflect(gt[t - 1] + steps[t], lo, hi)
    speed = np.zeros(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        std_steps = np.where(motion > 0, steps / motion, 0.0)
    speed[1:] = np.linalg.norm(std_steps[1:], axis=1) / 2

    size = np.array([grid.image_width, grid.image_height], dtype=float)
    head_steps = rng.normal(size=(n, 2)) * cfg.head_step * size
    head = np.empty((n, 2))
    head[0] = size / 2
    top = np.nextafter(size, 0)
    for t in range(1, n):
        head[t] = np.minimum(_reflect(head[t - 1] + head_steps[t], np.zeros(2), size), top)
    cols = np.minimum(np.floor(head[:, 0] * grid.cols / grid.image_width).astype(int), grid.cols - 1)
    rows = np.minimum(np.floor(head[:, 1] * grid.rows / grid.image_height).astype(int), grid.rows - 1)

    blurry = rng.random(n) < cfg.blur_rate
    inflation = (
        cfg.border_penalty ** border_touches(cols, rows, grid)
        * np.where(blurry, cfg.blur_penalty, 1.0)
        * (1.0 + cfg.motion_gain * speed)
    )
    small = gt + rng.normal(size=(n, 4)) * np.asarray(cfg.small_noise_sigma) * inflation[:, None]
    big = gt + rng.normal(size=(n, 4)) * np.asarray(cfg.big_noise_sigma)

    true_flat = rows * grid.cols + cols
    correct = rng.random(n) < cfg.aux_accuracy
    offset = rng.integers(1, max(k, 2), size=n)  # uniform over the k-1 wrong cells
    chosen = np.where(correct | (k == 1), true_flat, (true_flat + offset) % k)
    mass = cfg.aux_confidence * (1.0 - cfg.confidence_jitter * rng.random(n))
    mass = np.where(blurry, mass / 2, mass)
    if k == 1:
        probs = np.ones((n, 1))
    else:
        probs = np.repeat(((1.0 - mass) / (k - 1))[:, None], k, axis=1)
        probs[np.arange(n), chosen] = mass
    return gt, small, big, head, probs


def _to_trace(cfg: SynthConfig, idx: range, split: str, gt, small, big, head, probs) -> Trace:
    frames = [
        FrameRecord(
            t=t,
            gt=PoseVector.from_seq(gt[t]),
            small_pred=PoseVector.from_seq(small[t]),
            big_pred=PoseVector.from_seq(big[t]),
            head_u=float(head[t, 0]),
            head_v=float(head[t, 1]),
            aux_probs=tuple(probs[t].tolist()),
        )
        for t in idx
    ]
    return Trace(cfg.grid, cfg.scaler, tuple(frames), split)


def generate(cfg: SynthConfig) -> tuple[Trace, Trace, Trace]:
    """Train, validation and test traces split 70/20/10 by frame count."""
    arrays = _simulate(cfg)
    n_train = round(cfg.n_frames * SPLIT_FRACTIONS[0])
    n_val = round(cfg.n_frames * SPLIT_FRACTIONS[1])
    bounds = (0, n_train, n_train + n_val, cfg.n_frames)
    return tuple(
        _to_trace(cfg, range(bounds[i], bounds[i + 1]), split, *arrays)
        for i, split in enumerate(("train", "validation", "test"))
    )
