import math

import numpy as np
import pytest

from cascade_bench.domain import FrameRecord, GridSpec, PoseVector, ScalerParams, Trace
from cascade_bench.synth import SynthConfig, generate, hard_borders_config

UNIT_SCALER = ScalerParams(x=(0.0, 1.0), y=(0.0, 1.0), z=(0.0, 1.0), phi=(0.0, 1.0))
GRID_2X2 = GridSpec(2, 2, 100, 100)


def one_hot(k, n):
    return tuple(1.0 if i == k else 0.0 for i in range(n))


def make_trace(small, big=None, gt=None, heads=None, probs=None, grid=GRID_2X2, scaler=UNIT_SCALER):
    """Build a trace from per-frame 4-tuples; unspecified streams default to zeros/center."""
    n = len(small)
    big = big if big is not None else small
    gt = gt if gt is not None else [(0.0, 0.0, 0.0, 0.0)] * n
    heads = heads if heads is not None else [(grid.image_width / 2, grid.image_height / 2)] * n
    probs = probs if probs is not None else [one_hot(0, grid.n_cells)] * n
    frames = [
        FrameRecord(t, PoseVector.from_seq(gt[t]), PoseVector.from_seq(small[t]), PoseVector.from_seq(big[t]),
                    heads[t][0], heads[t][1], probs[t])
        for t in range(n)
    ]
    return Trace(grid, scaler, tuple(frames), "test")


def brute_mae_sum(outputs, trace):
    """Single-pass mean of per-variable absolute errors, summed."""
    totals = [0.0, 0.0, 0.0, 0.0]
    for out, f in zip(outputs, trace.frames):
        for i, (a, b) in enumerate(zip(out, f.gt.as_tuple())):
            totals[i] += abs(a - b)
    return [v / len(trace) for v in totals]


@pytest.fixture(scope="session")
def synth_splits():
    return generate(SynthConfig(n_frames=2000, seed=7))


@pytest.fixture(scope="session")
def hard_splits():
    return generate(hard_borders_config(n_frames=10_000, seed=0))


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in test_acceptance.RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]")
