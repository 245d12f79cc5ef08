"""Command-line entry point: ``cascade-bench <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from cascade_bench.domain import ConfigError, DomainError
from cascade_bench.errormap import build_error_map
from cascade_bench.io import (
    RunConfig,
    emit_report,
    format_csv,
    load_costs,
    load_synth_config,
    parse_error_map,
    parse_trace,
    write_error_map,
    write_trace,
)
from cascade_bench.policies import PolicyConfig
from cascade_bench.sweep import compare_policies, pareto_front, run_point, sweep
from cascade_bench.synth import SynthConfig, generate, hard_borders_config

log = logging.getLogger("cascade_bench")

_BOOL = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def parse_policy(spec: str) -> tuple[str, dict]:
    """``kind`` or ``kind:key=value,...`` with keys th, p, seed, abs, avg."""
    kind, _, rest = spec.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"bad policy option {item!r} in {spec!r}")
        key = key.strip()
        if key == "th":
            opts["threshold"] = float(value)
        elif key == "p":
            opts["big_probability"] = float(value)
        elif key == "seed":
            opts["seed"] = int(value)
        elif key in ("abs", "avg"):
            if value.lower() not in _BOOL:
                raise ConfigError(f"{key} expects a boolean, got {value!r}")
            opts["op_uses_absolute_score" if key == "abs" else "ensemble_average"] = _BOOL[value.lower()]
        else:
            raise ConfigError(f"unknown policy option {key!r}")
    return kind.strip(), opts


def _load_map(args, kind):
    if kind != "aux_hlc":
        return None
    if not args.map:
        raise ConfigError("policy aux_hlc needs --map")
    return parse_error_map(args.map)


def cmd_synth(args) -> None:
    if args.config:
        cfg = load_synth_config(args.config)
    elif args.preset == "hard_borders":
        cfg = hard_borders_config()
    else:
        cfg = SynthConfig()
    if args.seed is not None or args.frames is not None:
        fields = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
        if args.seed is not None:
            fields["seed"] = args.seed
        if args.frames is not None:
            fields["n_frames"] = args.frames
        cfg = SynthConfig(**fields)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for trace in generate(cfg):
        path = out / f"{trace.split_tag}.csv"
        write_trace(trace, path)
        log.info("wrote %s (%d frames)", path, len(trace))


def cmd_errormap(args) -> None:
    emap = build_error_map(parse_trace(args.validation))
    write_error_map(emap, args.out)
    log.info("wrote %s", args.out)


def cmd_eval(args) -> None:
    trace = parse_trace(args.trace)
    kind, opts = parse_policy(args.policy)
    cfg = PolicyConfig(kind, error_map=_load_map(args, kind), **opts)
    point = run_point(trace, cfg, load_costs(args.costs))
    sys.stdout.write(format_csv([point]))


def cmd_sweep(args) -> None:
    trace = parse_trace(args.trace)
    kind, opts = parse_policy(args.policy)
    points = sweep(trace, kind, load_costs(args.costs), _load_map(args, kind),
                   use_abs=opts.get("op_uses_absolute_score", True), seed=opts.get("seed", 0))
    if args.front_only:
        points = pareto_front(points, args.dimension)
    if args.out is None:
        sys.stdout.write(format_csv(points))
        return
    out = Path(args.out)
    formats = ("csv", "svg") if args.svg else ("csv",)
    emit_report(points, out.parent, formats, stem=out.stem, cost_dimension=args.dimension)


def cmd_compare(args) -> None:
    rc = RunConfig(args.config)
    test = parse_trace(rc.test)
    emap = None
    if "aux_hlc" in rc.policies:
        emap = parse_error_map(rc.error_map) if rc.error_map else build_error_map(parse_trace(rc.validation))
    cmp = compare_policies(test, rc.costs, emap, rc.policies, rc.cost_dimension, seed=rc.seed, jobs=args.jobs)
    emit_report(cmp, rc.output_dir, ("csv", "svg"), stem="compare")
    if args.iso_mae is not None:
        best = cmp.iso_mae(args.iso_mae, args.tol)
        if best is None:
            print(f"no front point with mae_sum <= {args.iso_mae} + {args.tol}")
        else:
            sys.stdout.write(format_csv([best]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascade-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate train/validation/test traces")
    p.add_argument("--config", help="INI file with a [synth] section")
    p.add_argument("--preset", choices=("default", "hard_borders"), default="default")
    p.add_argument("--seed", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("errormap", help="build an Aux-HLC error map from a validation trace")
    p.add_argument("--validation", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_errormap)

    p = sub.add_parser("eval", help="single policy run, printed as one CSV row")
    p.add_argument("--trace", required=True)
    p.add_argument("--policy", required=True, help="e.g. op:th=0.2, aux_sm:th=0.3, random:p=0.5,seed=1")
    p.add_argument("--map")
    p.add_argument("--costs", default="d1", help="cost INI file or preset d1/d2")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="threshold sweep of one policy")
    p.add_argument("--trace", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--map")
    p.add_argument("--costs", default="d1")
    p.add_argument("--dimension", choices=("latency", "energy", "cycles"), default="cycles")
    p.add_argument("--front-only", action="store_true")
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--svg", action="store_true", help="also write an SVG next to --out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="Pareto fronts of several policies")
    p.add_argument("--config", required=True)
    p.add_argument("--iso-mae", type=float)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except (DomainError, ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
