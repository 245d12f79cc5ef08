from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascade_bench.domain import DomainError
from cascade_bench.errormap import build_error_map, lookup
from cascade_bench.synth import SynthConfig, border_touches, generate

from conftest import make_trace


def two_pass_map(trace):
    """Independent bucketing: collect frames per cell, then average each bucket."""
    buckets = {}
    for f in trace.frames:
        col = int(f.head_u * trace.grid.cols // trace.grid.image_width)
        row = int(f.head_v * trace.grid.rows // trace.grid.image_height)
        buckets.setdefault((col, row), []).append(f)
    values = {}
    for cell, frames in buckets.items():
        s = [sum(abs(a - b) for a, b in zip(f.small_pred.as_tuple(), f.gt.as_tuple())) for f in frames]
        b = [sum(abs(a - b) for a, b in zip(f.big_pred.as_tuple(), f.gt.as_tuple())) for f in frames]
        values[cell] = (sum(s) / len(s) - sum(b) / len(b), len(frames))
    return values


def test_single_cell_example():
    n = 10
    tr = make_trace([(0.5, 0, 0, 0)] * n, big=[(0.1, 0.1, 0.1, 0)] * n, heads=[(10, 10)] * n)
    m = build_error_map(tr)
    assert lookup(m, (0, 0)) == pytest.approx(0.2)
    assert m.fallback == pytest.approx(0.2)
    for cell in [(1, 0), (0, 1), (1, 1)]:
        assert lookup(m, cell) == m.fallback
    assert m.support == ((n, 0), (0, 0))


def test_identical_models_give_zero_map(synth_splits):
    val = synth_splits[1]
    tr = make_trace(val.small_array.tolist(), val.small_array.tolist(), val.gt_array.tolist(),
                    [(f.head_u, f.head_v) for f in val.frames], [f.aux_probs for f in val.frames],
                    grid=val.grid, scaler=val.scaler)
    m = build_error_map(tr)
    assert np.all(m.as_array() == 0.0)


def test_matches_two_pass_oracle():
    tr = generate(SynthConfig(n_frames=500, seed=11))[1]
    assert len(tr) == 100
    m = build_error_map(tr)
    oracle = two_pass_map(tr)
    for r in range(tr.grid.rows):
        for c in range(tr.grid.cols):
            if (c, r) in oracle:
                assert m.values[r][c] == pytest.approx(oracle[(c, r)][0], abs=1e-9)
                assert m.support[r][c] == oracle[(c, r)][1]
            else:
                assert m.support[r][c] == 0 and m.values[r][c] == m.fallback


def test_invariants(synth_splits):
    val = synth_splits[1]
    m = build_error_map(val)
    sup = np.array(m.support)
    assert sup.sum() == len(val)
    vals = m.as_array()
    assert np.sum(vals[sup > 0] * sup[sup > 0]) / sup.sum() == pytest.approx(m.fallback, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.randoms(use_true_random=False))
def test_permutation_invariant(synth_splits, rnd):
    val = synth_splits[1]
    frames = list(val.frames)
    rnd.shuffle(frames)
    # re-index so t stays increasing
    frames = [replace(f, t=i) for i, f in enumerate(frames)]
    shuffled = type(val)(val.grid, val.scaler, tuple(frames), "validation")
    assert build_error_map(shuffled).as_array() == pytest.approx(build_error_map(val).as_array(), abs=1e-12)


def test_common_error_scaling(synth_splits):
    val = synth_splits[1]
    k = 2.5
    gt = val.gt_array
    scaled = make_trace((gt + k * (val.small_array - gt)).tolist(), (gt + k * (val.big_array - gt)).tolist(),
                        gt.tolist(), [(f.head_u, f.head_v) for f in val.frames],
                        [f.aux_probs for f in val.frames], grid=val.grid, scaler=val.scaler)
    a, b = build_error_map(val), build_error_map(scaled)
    sup = np.array(a.support) > 0
    assert b.as_array()[sup] == pytest.approx(k * a.as_array()[sup], rel=1e-9, abs=1e-9)


def test_lookup_errors():
    m = build_error_map(make_trace([(0, 0, 0, 0)]))
    with pytest.raises(DomainError):
        lookup(m, (2, 0))
    with pytest.raises(DomainError):
        lookup(m, (0, -1))


def test_corners_carry_largest_gap(hard_splits):
    m = build_error_map(hard_splits[1])
    vals = m.as_array()
    rows, cols = np.indices(vals.shape)
    touches = border_touches(cols, rows, m.grid)
    corner_min = vals[touches == 2].min()
    assert corner_min > vals[touches < 2].max()
