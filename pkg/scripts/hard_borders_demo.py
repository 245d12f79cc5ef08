"""Synthetic hard-borders benchmark: fronts of every policy plus the iso-MAE pick.

    python3 scripts/hard_borders_demo.py --frames 20000 --seed 0 --out runs/hard_borders

Writes compare.csv / compare.svg and prints the cheapest adaptive point whose
MAE is within --tol of the big model alone.
"""

import argparse

import numpy as np

from cascade_bench.costs import d1_costs
from cascade_bench.errormap import build_error_map
from cascade_bench.io import emit_report, format_csv, write_error_map
from cascade_bench.sweep import compare_policies
from cascade_bench.synth import border_touches, generate, hard_borders_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=0.005)
    ap.add_argument("--out", default="runs/hard_borders")
    args = ap.parse_args()

    _, val, test = generate(hard_borders_config(n_frames=args.frames, seed=args.seed))
    emap = build_error_map(val)

    vals = emap.as_array()
    rows, cols = np.indices(vals.shape)
    touches = border_touches(cols, rows, emap.grid)
    print("mean small-minus-big error by cell type:")
    for name, k in (("corner", 2), ("edge", 1), ("interior", 0)):
        print(f"  {name:8} {vals[touches == k].mean():7.3f}")

    cmp = compare_policies(test, d1_costs(), emap, cost_dimension="latency")
    paths = emit_report(cmp, args.out, formats=("csv", "svg"), stem="compare")
    write_error_map(emap, f"{args.out}/error_map.csv")

    big = cmp.baselines["static_big"]
    best = cmp.iso_mae(big.mae.mae_sum, args.tol)
    print(f"\nstatic big: mae_sum={big.mae.mae_sum:.4f} latency={big.cost.latency_ms:.2f} ms")
    if best is None:
        print("no adaptive point within tolerance")
    else:
        print(f"iso-MAE pick ({best.name}):")
        print(format_csv([best]), end="")
        print(f"latency saving {1 - best.cost.latency_ms / big.cost.latency_ms:.1%}")
    print("wrote", ", ".join(str(p) for p in paths))


if __name__ == "__main__":
    main()
