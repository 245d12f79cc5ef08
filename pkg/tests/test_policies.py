import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascade_bench.domain import ConfigError, DomainError, GridSpec, PoseVector, head_cell
from cascade_bench.errormap import ErrorMap
from cascade_bench.metrics import mae
from cascade_bench.policies import (
    PolicyConfig,
    big_mask,
    mask_outputs,
    op_score,
    outputs_array,
    policy_scores,
    run_aux_hlc_policy,
    run_aux_sm_policy,
    run_op_policy,
    run_oracle_policy,
    run_policy,
    run_random_policy,
    run_static,
    scaled_sum,
    score_margin,
)
from cascade_bench.synth import border_touches

from conftest import GRID_2X2, UNIT_SCALER, make_trace, one_hot


def flags(decisions):
    return [d.invoked_big for d in decisions]


def test_scaled_sum_examples():
    assert scaled_sum(PoseVector(0, 0, 0, 0), UNIT_SCALER) == 0
    assert scaled_sum(PoseVector(1, 1, 1, 1), UNIT_SCALER) == 4
    assert scaled_sum(PoseVector(0.2, 0.3, 0.4, 0.5), UNIT_SCALER) == pytest.approx(1.4)


def test_op_score_examples():
    a = PoseVector(0.2, 0.3, 0.4, 0.5)  # 1.4
    b = PoseVector(0.2, 0.3, 0.4, 0.7)  # 1.6
    assert op_score(a, a, UNIT_SCALER) == 0
    assert op_score(b, a, UNIT_SCALER) == pytest.approx(0.2)
    assert op_score(a, b, UNIT_SCALER, use_abs=True) == pytest.approx(0.2)
    assert op_score(a, b, UNIT_SCALER, use_abs=False) == pytest.approx(-0.2)


def _walk_trace(n=30, seed=3):
    rng = np.random.default_rng(seed)
    small = np.cumsum(rng.normal(0, 0.05, size=(n, 4)), axis=0)
    big = small + rng.normal(0, 0.1, size=(n, 4))
    gt = small + rng.normal(0, 0.1, size=(n, 4))
    return make_trace(small.tolist(), big.tolist(), gt.tolist())


def test_op_threshold_extremes():
    tr = _walk_trace()
    ds = run_op_policy(tr, math.inf)
    assert flags(ds) == [True] + [False] * (len(tr) - 1)
    assert all(d.output == f.small_pred for d, f in zip(ds[1:], tr.frames[1:]))
    ds = run_op_policy(tr, -1.0, use_abs=True)
    assert all(flags(ds)) and all(d.invoked_small for d in ds)
    for d, f in zip(ds, tr.frames):
        avg = [(a + b) / 2 for a, b in zip(f.small_pred.as_tuple(), f.big_pred.as_tuple())]
        assert d.output.as_tuple() == tuple(avg)


def test_op_three_frame_pattern():
    small = [(0.1, 0, 0, 0), (0.2, 0, 0, 0), (0.5, 0, 0, 0)]
    tr = make_trace(small, big=[(1, 1, 1, 1)] * 3)
    # hand simulation: scores 0.1 then 0.3 against th 0.2, bootstrap always big
    scores = [op_score(tr.frames[t].small_pred, tr.frames[t - 1].small_pred, UNIT_SCALER) for t in (1, 2)]
    assert scores == pytest.approx([0.1, 0.3])
    ds = run_op_policy(tr, 0.2)
    assert flags(ds) == [True, False, True]
    assert [d.score for d in ds] == pytest.approx([0.0, 0.1, 0.3])


def test_score_margin_examples():
    assert score_margin(one_hot(2, 4)) == 1.0
    assert score_margin([0.25] * 4) == 0.0
    assert score_margin([0.5, 0.3, 0.2]) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        score_margin([1.0])


def _sm_trace():
    probs = [(0.95, 0.05, 0.0, 0.0), (0.4, 0.3, 0.2, 0.1), (0.7, 0.2, 0.1, 0.0)]
    return make_trace([(0, 0, 0, 0)] * 3, big=[(1, 1, 1, 1)] * 3, probs=probs)


def test_aux_sm_examples():
    tr = _sm_trace()
    assert flags(run_aux_sm_policy(tr, 1.0)) == [True] * 3
    assert flags(run_aux_sm_policy(tr, -0.01)) == [False] * 3
    ds = run_aux_sm_policy(tr, 0.5)
    expected = [sorted(f.aux_probs)[-1] - sorted(f.aux_probs)[-2] <= 0.5 for f in tr.frames]
    assert flags(ds) == expected == [False, True, True]
    for d, f in zip(ds, tr.frames):
        assert d.invoked_aux and d.invoked_big != d.invoked_small
        assert d.output == (f.big_pred if d.invoked_big else f.small_pred)


GRID_4X4 = GridSpec(4, 4, 40, 40)


def _border_map(grid, border=0.3, center=0.0):
    vals = tuple(
        tuple(border if border_touches(np.array(c), np.array(r), grid) > 0 else center for c in range(grid.cols))
        for r in range(grid.rows)
    )
    return ErrorMap(grid, vals, tuple(tuple(1 for _ in range(grid.cols)) for _ in range(grid.rows)), 0.15)


def test_aux_hlc_border_map_with_perfect_aux():
    rng = np.random.default_rng(0)
    n = 60
    heads = rng.uniform(0, 40, size=(n, 2)).tolist()
    probs = []
    for u, v in heads:
        c, r = head_cell(u, v, GRID_4X4)
        probs.append(one_hot(r * 4 + c, 16))
    tr = make_trace([(0, 0, 0, 0)] * n, big=[(1, 1, 1, 1)] * n, heads=heads, probs=probs, grid=GRID_4X4)
    emap = _border_map(GRID_4X4)
    ds = run_aux_hlc_policy(tr, 0.1, emap)
    oracle = []
    for u, v in heads:
        c, r = head_cell(u, v, GRID_4X4)
        oracle.append(c in (0, 3) or r in (0, 3))
    assert flags(ds) == oracle
    assert flags(run_aux_hlc_policy(tr, math.inf, emap)) == [False] * n
    assert flags(run_aux_hlc_policy(tr, -math.inf, emap)) == [True] * n


def test_aux_hlc_single_cell_is_static():
    g = GridSpec(1, 1, 10, 10)
    tr = make_trace([(0, 0, 0, 0)] * 5, heads=[(5, 5)] * 5, probs=[(1.0,)] * 5, grid=g)
    emap = ErrorMap(g, ((0.4,),), ((5,),), 0.4)
    assert flags(run_aux_hlc_policy(tr, 0.3, emap)) == [True] * 5
    assert flags(run_aux_hlc_policy(tr, 0.4, emap)) == [False] * 5


def test_aux_hlc_grid_mismatch():
    tr = make_trace([(0, 0, 0, 0)])
    with pytest.raises(ConfigError):
        run_aux_hlc_policy(tr, 0.0, _border_map(GRID_4X4))


def test_random_policy_extremes_and_determinism():
    tr = _walk_trace(200)
    assert run_random_policy(tr, 0.0, 1) == run_static(tr, big=False)
    assert run_random_policy(tr, 1.0, 1) == run_static(tr, big=True)
    a = run_random_policy(tr, 0.5, 42)
    assert a == run_random_policy(tr, 0.5, 42)
    assert flags(a) != flags(run_random_policy(tr, 0.5, 43))
    assert 0.35 < np.mean(flags(a)) < 0.65
    with pytest.raises(DomainError):
        run_random_policy(tr, 1.5, 0)


def test_oracle_examples():
    # small error 0.1, big error 0.3
    tr = make_trace([(0.1, 0, 0, 0)], big=[(0.3, 0, 0, 0)])
    assert flags(run_oracle_policy(tr)) == [False]
    tr = make_trace([(0.2, 0, 0, 0)])
    assert flags(run_oracle_policy(tr)) == [False]
    assert flags(run_oracle_policy(tr, ensemble_average=True)) == [False]


def test_oracle_dominates_statics(synth_splits):
    tr = synth_splits[2]
    gts = [f.gt for f in tr.frames]
    oracle = mae([d.output for d in run_oracle_policy(tr)], gts).mae_sum
    small = mae([f.small_pred for f in tr.frames], gts).mae_sum
    big = mae([f.big_pred for f in tr.frames], gts).mae_sum
    assert oracle <= min(small, big)
    # exhaustive per-frame choice gives the same minimum
    per_frame = [min(sum(abs(a - b) for a, b in zip(f.small_pred.as_tuple(), f.gt.as_tuple())),
                     sum(abs(a - b) for a, b in zip(f.big_pred.as_tuple(), f.gt.as_tuple())))
                 for f in tr.frames]
    assert oracle == pytest.approx(sum(per_frame) / len(tr), abs=1e-12)


def test_policy_config_validation(synth_splits):
    with pytest.raises(ConfigError):
        PolicyConfig("early_exit")
    with pytest.raises(ConfigError):
        PolicyConfig("op")
    with pytest.raises(ConfigError):
        PolicyConfig("aux_hlc", threshold=0.1)
    with pytest.raises(ConfigError):
        PolicyConfig("random", big_probability=2.0)


@pytest.mark.parametrize("kind, th", [("static_small", math.nan), ("static_big", math.nan), ("op", 0.05),
                                      ("aux_sm", 0.3), ("random", math.nan), ("oracle", math.nan)])
def test_decision_structure(synth_splits, kind, th):
    tr = synth_splits[2]
    ds = run_policy(tr, PolicyConfig(kind, threshold=th, big_probability=0.3, seed=5))
    assert len(ds) == len(tr)
    for d, f in zip(ds, tr.frames):
        assert d.frame_t == f.t
        if not d.invoked_big:
            assert d.output == f.small_pred
        elif kind == "op":
            assert d.invoked_small
            assert d.output.as_tuple() == tuple((a + b) / 2 for a, b in zip(f.small_pred.as_tuple(),
                                                                             f.big_pred.as_tuple()))
        else:
            assert d.output == f.big_pred and not d.invoked_small
    assert run_policy(tr, PolicyConfig(kind, threshold=th, big_probability=0.3, seed=5)) == ds


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.2, 1.2), st.floats(-0.2, 1.2))
def test_threshold_monotonicity(synth_splits, a, b):
    tr = synth_splits[1]
    lo, hi = sorted((a, b))
    emap_vals = tuple(tuple((r * 8 + c) / 48 for c in range(8)) for r in range(6))
    emap = ErrorMap(tr.grid, emap_vals, tuple(tuple(1 for _ in range(8)) for _ in range(6)), 0.5)
    for kind, m in (("op", None), ("aux_sm", None), ("aux_hlc", emap)):
        scores = policy_scores(tr, kind, m)
        low, high = big_mask(scores, kind, lo), big_mask(scores, kind, hi)
        if kind == "aux_sm":
            assert np.all(low <= high)
        else:
            assert np.all(high <= low)


@pytest.mark.parametrize("kind", ["op", "aux_sm", "aux_hlc"])
def test_vectorized_selection_matches_frame_loop(synth_splits, kind):
    from cascade_bench.errormap import build_error_map
    from cascade_bench.sweep import candidate_thresholds

    val, test = synth_splits[1], synth_splits[2]
    emap = build_error_map(val) if kind == "aux_hlc" else None
    scores = policy_scores(test, kind, emap)
    ths = candidate_thresholds(test, kind, emap)
    for th in ths[:: max(1, len(ths) // 25)] + ths[-1:]:
        ds = run_policy(test, PolicyConfig(kind, threshold=th, error_map=emap))
        mask = big_mask(scores, kind, th)
        assert flags(ds) == mask.tolist()
        assert np.array_equal(outputs_array(ds), mask_outputs(test, kind, mask))
