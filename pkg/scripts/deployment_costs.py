"""Print the cost model at the published operating points of both deployments.

    python3 scripts/deployment_costs.py
"""

from cascade_bench.costs import cost_aux, cost_op, d1_costs, d2_costs, memory_footprint, deployed_models

# (deployment, policy kind, big fraction, reported latency ms)
POINTS = [
    ("d1", "random", 0.5, 14.41),
    ("d1", "aux_hlc", 0.391, 13.24),
    ("d2", "op", 0.314, 15.66),
]


def main():
    tables = {"d1": d1_costs(), "d2": d2_costs()}
    print(f"{'dep':4} {'policy':8} {'f_big':>6} {'lat ms':>8} {'ref':>7} {'mJ':>7} {'Mcycles':>8} {'kB':>5}")
    for dep, kind, f, ref in POINTS:
        costs = tables[dep]
        if kind == "op":
            fn, table = cost_op, costs
        elif kind == "random":
            fn, table = cost_aux, costs.without_aux()
        else:
            fn, table = cost_aux, costs
        kb = memory_footprint(deployed_models(kind), costs) / 1000
        print(f"{dep:4} {kind:8} {f:6.3f} {fn(f, table, 'latency'):8.3f} {ref:7.2f} "
              f"{fn(f, table, 'energy'):7.3f} {fn(f, table, 'cycles') / 1e6:8.3f} {kb:5.0f}")
    print("\nmemory footprints (kB):")
    for dep, costs in tables.items():
        for kind in ("static_small", "op", "aux_hlc"):
            print(f"  {dep} {kind:12} {memory_footprint(deployed_models(kind), costs) / 1000:5.0f}")


if __name__ == "__main__":
    main()
