"""Text file formats: traces, error maps, cost tables, configs and reports."""

from __future__ import annotations

import configparser
import math
import os
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from cascade_bench.costs import PRESETS, CostTable, ModelCost
from cascade_bench.domain import (
    DomainError,
    FrameRecord,
    GridSpec,
    PoseVector,
    ScalerParams,
    Trace,
    VARIABLES,
    head_cell,
    normalize_probs,
)
from cascade_bench.errormap import ErrorMap
from cascade_bench.sweep import Comparison, OperatingPoint
from cascade_bench.synth import SynthConfig, hard_borders_config


class ParseError(DomainError):
    def __init__(self, path, lineno: Optional[int], message: str):
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.lineno = lineno


# ---------------------------------------------------------------- traces

def trace_columns(n_cells: int) -> list[str]:
    return (
        ["t"]
        + [f"gt_{v}" for v in VARIABLES]
        + ["head_u", "head_v"]
        + [f"small_{v}" for v in VARIABLES]
        + [f"big_{v}" for v in VARIABLES]
        + [f"aux_p_{k}" for k in range(n_cells)]
    )


def _num(v: float) -> str:
    return repr(float(v))


def format_trace(trace: Trace) -> str:
    g, s = trace.grid, trace.scaler
    lines = [
        f"#grid_cols={g.cols}",
        f"#grid_rows={g.rows}",
        f"#image_width={g.image_width}",
        f"#image_height={g.image_height}",
    ]
    for v in VARIABLES:
        lo, hi = getattr(s, v)
        lines += [f"#scaler_{v}_min={_num(lo)}", f"#scaler_{v}_max={_num(hi)}"]
    lines.append(f"#split={trace.split_tag}")
    lines.append(",".join(trace_columns(g.n_cells)))
    for f in trace.frames:
        row = [str(f.t), *map(_num, f.gt.as_tuple()), _num(f.head_u), _num(f.head_v),
               *map(_num, f.small_pred.as_tuple()), *map(_num, f.big_pred.as_tuple()),
               *map(_num, f.aux_probs)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_trace(trace: Trace, path) -> None:
    Path(path).write_text(format_trace(trace))


def _float(text: str, path, lineno: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(path, lineno, f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, lineno, f"non-finite value {text!r}")
    return v


def parse_trace(path) -> Trace:
    meta: dict[str, str] = {}
    header = None
    frames = []
    prev_t = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is not None:
                    raise ParseError(path, lineno, "comment after the header line")
                key, sep, value = line[1:].partition("=")
                if not sep:
                    raise ParseError(path, lineno, f"expected #key=value, got {line!r}")
                meta[key.strip()] = value.strip()
                continue
            if header is None:
                grid, scaler, split = _trace_meta(meta, path, lineno)
                header = line.split(",")
                expected = trace_columns(grid.n_cells)
                if header != expected:
                    raise ParseError(path, lineno, f"malformed header; expected {','.join(expected)}")
                continue
            fields = line.split(",")
            if len(fields) != len(header):
                raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(fields)}")
            try:
                t = int(fields[0])
            except ValueError:
                raise ParseError(path, lineno, f"frame index is not an integer: {fields[0]!r}") from None
            if prev_t is not None and t <= prev_t:
                raise ParseError(path, lineno, f"frame index {t} does not increase (previous {prev_t})")
            prev_t = t
            vals = [_float(x, path, lineno) for x in fields[1:]]
            try:
                head_cell(vals[4], vals[5], grid, t)
                probs = normalize_probs(vals[14:], t)
                frames.append(FrameRecord(
                    t=t,
                    gt=PoseVector.from_seq(vals[0:4]),
                    head_u=vals[4],
                    head_v=vals[5],
                    small_pred=PoseVector.from_seq(vals[6:10]),
                    big_pred=PoseVector.from_seq(vals[10:14]),
                    aux_probs=probs,
                ))
            except DomainError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    if header is None:
        raise ParseError(path, None, "no header line")
    if not frames:
        raise ParseError(path, None, "trace has no frames")
    try:
        return Trace(grid, scaler, tuple(frames), split)
    except DomainError as exc:
        raise ParseError(path, None, str(exc)) from None


def _trace_meta(meta: Mapping[str, str], path, lineno: int):
    try:
        grid = GridSpec(int(meta["grid_cols"]), int(meta["grid_rows"]),
                        int(meta["image_width"]), int(meta["image_height"]))
        scaler = ScalerParams(**{
            v: (float(meta[f"scaler_{v}_min"]), float(meta[f"scaler_{v}_max"])) for v in VARIABLES
        })
        split = meta.get("split", "test")
    except KeyError as exc:
        raise ParseError(path, lineno, f"missing header key {exc.args[0]!r}") from None
    except (ValueError, DomainError) as exc:
        raise ParseError(path, lineno, f"bad header value: {exc}") from None
    return grid, scaler, split


# ---------------------------------------------------------------- error maps


def write_error_map(emap: ErrorMap, path) -> None:
    g = emap.grid
    lines = [
        f"#cols={g.cols}",
        f"#rows={g.rows}",
        f"#image_width={g.image_width}",
        f"#image_height={g.image_height}",
        f"#fallback={_num(emap.fallback)}",
        "row,col,value,support",
    ]
    for r in range(g.rows):
        for c in range(g.cols):
            lines.append(f"{r},{c},{_num(emap.values[r][c])},{emap.support[r][c]}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_error_map(path) -> ErrorMap:
    meta = {}
    cells = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line == "row,col,value,support":
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key] = value
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(path, lineno, "expected row,col,value,support")
            try:
                cells[(int(parts[0]), int(parts[1]))] = (_float(parts[2], path, lineno), int(parts[3]))
            except ValueError:
                raise ParseError(path, lineno, "bad cell entry") from None
    try:
        grid = GridSpec(int(meta["cols"]), int(meta["rows"]), int(meta["image_width"]), int(meta["image_height"]))
        fallback = float(meta["fallback"])
    except (KeyError, ValueError) as exc:
        raise ParseError(path, None, f"bad or missing header: {exc}") from None
    missing = [(r, c) for r in range(grid.rows) for c in range(grid.cols) if (r, c) not in cells]
    if missing or len(cells) != grid.n_cells:
        raise ParseError(path, None, f"error map must list each of the {grid.n_cells} cells exactly once")
    return ErrorMap(
        grid=grid,
        values=tuple(tuple(cells[(r, c)][0] for c in range(grid.cols)) for r in range(grid.rows)),
        support=tuple(tuple(cells[(r, c)][1] for c in range(grid.cols)) for r in range(grid.rows)),
        fallback=fallback,
    )


# ---------------------------------------------------------------- cost tables

COST_FIELDS = ("latency_ms", "energy_mj", "cycles", "weight_bytes", "activation_bytes")


def write_costs(costs: CostTable, path) -> None:
    cp = configparser.ConfigParser()
    for name in ("small", "big", "aux"):
        m = costs.model(name)
        cp[name] = {f: repr(getattr(m, f)) for f in COST_FIELDS}
    with open(path, "w") as fh:
        cp.write(fh)


def load_costs(spec: str | os.PathLike) -> CostTable:
    """A preset name (``d1``, ``d2``) or the path of an INI cost file."""
    if str(spec).lower() in PRESETS:
        return PRESETS[str(spec).lower()]()
    cp = configparser.ConfigParser()
    if not cp.read(spec):
        raise ParseError(spec, None, "cost file not readable")
    models = {}
    for name in ("small", "big", "aux"):
        if name not in cp:
            if name == "aux":
                models[name] = ModelCost()
                continue
            raise ParseError(spec, None, f"missing [{name}] section")
        sec = cp[name]
        try:
            models[name] = ModelCost(
                latency_ms=sec.getfloat("latency_ms", 0.0),
                energy_mj=sec.getfloat("energy_mj", 0.0),
                cycles=sec.getfloat("cycles", 0.0),
                weight_bytes=sec.getint("weight_bytes", 0),
                activation_bytes=sec.getint("activation_bytes", 0),
            )
        except ValueError as exc:
            raise ParseError(spec, None, f"[{name}]: {exc}") from None
    return CostTable(**models)


# ---------------------------------------------------------------- configs


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(" ", "").split(","))


def load_synth_config(path) -> SynthConfig:
    """INI file with a ``[synth]`` section; ``preset = hard_borders`` sets the base."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ParseError(path, None, "config not readable")
    if "synth" not in cp:
        raise ParseError(path, None, "missing [synth] section")
    sec = cp["synth"]
    base = hard_borders_config() if sec.get("preset", "") == "hard_borders" else SynthConfig()
    kw = {}
    try:
        for key in ("n_frames", "seed"):
            if key in sec:
                kw[key] = sec.getint(key)
        for key in ("head_step", "border_penalty", "aux_accuracy", "aux_confidence",
                    "confidence_jitter", "blur_rate", "blur_penalty", "motion_gain"):
            if key in sec:
                kw[key] = sec.getfloat(key)
        for key in ("motion", "small_noise_sigma", "big_noise_sigma"):
            if key in sec:
                kw[key] = _floats(sec[key])
        if any(k in sec for k in ("grid_cols", "grid_rows", "image_width", "image_height")):
            g = base.grid
            kw["grid"] = GridSpec(sec.getint("grid_cols", g.cols), sec.getint("grid_rows", g.rows),
                                  sec.getint("image_width", g.image_width),
                                  sec.getint("image_height", g.image_height))
        if any(f"scaler_{v}" in sec for v in VARIABLES):
            kw["scaler"] = ScalerParams(**{
                v: _floats(sec[f"scaler_{v}"]) if f"scaler_{v}" in sec else getattr(base.scaler, v)
                for v in VARIABLES
            })
        fields = {f: getattr(base, f) for f in base.__dataclass_fields__}
        fields.update(kw)
        return SynthConfig(**fields)
    except (ValueError, DomainError) as exc:
        raise ParseError(path, None, str(exc)) from None


class RunConfig:
    """Parsed ``[run]`` section of a comparison config.

    Relative paths are resolved against the config file's directory.
    """

    def __init__(self, path):
        cp = configparser.ConfigParser()
        if not cp.read(path):
            raise ParseError(path, None, "config not readable")
        if "run" not in cp:
            raise ParseError(path, None, "missing [run] section")
        sec = cp["run"]
        base = Path(path).resolve().parent

        def resolve(key):
            value = sec.get(key)
            if not value:
                return None
            p = Path(value)
            return p if p.is_absolute() else base / p

        self.train = resolve("train")
        self.validation = resolve("validation")
        self.test = resolve("test")
        if self.test is None:
            raise ParseError(path, None, "[run] needs a test trace")
        costs = sec.get("costs", "d1")
        self.costs = load_costs(costs if costs.lower() in PRESETS else resolve("costs"))
        self.policies = [p.strip() for p in sec.get("policies", "random,op,aux_sm,aux_hlc").split(",") if p.strip()]
        self.cost_dimension = sec.get("cost_dimension", "cycles")
        self.output_dir = resolve("output_dir") or base / "out"
        self.seed = sec.getint("seed", 0)
        self.error_map = resolve("error_map")
        if "aux_hlc" in self.policies and self.validation is None and self.error_map is None:
            raise ParseError(path, None, "aux_hlc needs a validation trace or an error_map")
        for p in (self.train, self.validation, self.test, self.error_map):
            if p is not None and not p.exists():
                raise ParseError(path, None, f"referenced file does not exist: {p}")


# ---------------------------------------------------------------- reports

REPORT_COLUMNS = (
    "policy", "threshold", "big_fraction", "mae_x", "mae_y", "mae_z", "mae_phi", "mae_sum",
    "latency_ms", "energy_mj", "cycles", "memory_bytes",
)


def _fixed(v: float) -> str:
    return "" if math.isnan(v) else f"{v:.6f}"


def report_row(p: OperatingPoint) -> str:
    c = p.cost
    fields = [p.name, _fixed(p.threshold), _fixed(p.big_fraction), *map(_fixed, p.mae.as_tuple()),
              _fixed(c.latency_ms), _fixed(c.energy_mj), _fixed(c.cycles), str(c.memory_bytes)]
    return ",".join(fields)


def format_csv(points: Iterable[OperatingPoint]) -> str:
    return "\n".join([",".join(REPORT_COLUMNS), *map(report_row, points)]) + "\n"


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
MARKERS = {"static_small": "#555555", "static_big": "#000000", "oracle": "#bcbd22", "oracle_avg": "#7f7f00"}


def format_svg(series: Mapping[str, Sequence[OperatingPoint]], markers: Mapping[str, OperatingPoint],
               cost_dimension: str, width: int = 640, height: int = 480) -> str:
    """Scatter of mae_sum against cost, one polyline per series, baselines as squares."""
    pts = [p for s in series.values() for p in s] + list(markers.values())
    if not pts:
        raise DomainError("nothing to plot")
    xs = [p.cost.get(cost_dimension) for p in pts]
    ys = [p.mae.mae_sum for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    left, right, top, bottom = 70, 150, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return f"{left + (v - x0) / (x1 - x0) * pw:.2f}"

    def sy(v):
        return f"{top + ph - (v - y0) / (y1 - y0) * ph:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
        f'<text x="{left}" y="{height - 30}">{x0:.6g}</text>',
        f'<text x="{left + pw}" y="{height - 30}" text-anchor="end">{x1:.6g}</text>',
        f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{cost_dimension}</text>',
        f'<text x="{left - 5}" y="{top + ph}" text-anchor="end">{y0:.4f}</text>',
        f'<text x="{left - 5}" y="{top + 10}" text-anchor="end">{y1:.4f}</text>',
        f'<text x="15" y="{top + ph / 2:.2f}" transform="rotate(-90 15 {top + ph / 2:.2f})" '
        f'text-anchor="middle">mae_sum</text>',
    ]
    legend_y = top + 10
    for i, (name, s) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        ordered = sorted(s, key=lambda p: p.cost.get(cost_dimension))
        coords = " ".join(f"{sx(p.cost.get(cost_dimension))},{sy(p.mae.mae_sum)}" for p in ordered)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
        for p in ordered:
            out.append(f'<circle cx="{sx(p.cost.get(cost_dimension))}" cy="{sy(p.mae.mae_sum)}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="{width - right + 10}" y="{legend_y}" fill="{color}">{name}</text>')
        legend_y += 15
    for name, p in markers.items():
        color = MARKERS.get(name, "#000000")
        out.append(f'<rect x="{float(sx(p.cost.get(cost_dimension))) - 4:.2f}" '
                   f'y="{float(sy(p.mae.mae_sum)) - 4:.2f}" width="8" height="8" fill="{color}"/>')
        out.append(f'<text x="{width - right + 10}" y="{legend_y}" fill="{color}">{name}</text>')
        legend_y += 15
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(report: Comparison | Sequence[OperatingPoint], out_dir, formats=("csv",),
                stem: str = "report", cost_dimension: Optional[str] = None) -> list[Path]:
    """Write the report as ``<stem>.csv`` and/or ``<stem>.svg``; returns the written paths."""
    if isinstance(report, Comparison):
        rows = report.rows()
        series = report.fronts
        markers = report.baselines
        cost_dimension = cost_dimension or report.cost_dimension
    else:
        rows = list(report)
        series = {}
        for p in rows:
            series.setdefault(p.name, []).append(p)
        markers = {}
    if not rows:
        raise DomainError("empty report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = out_dir / f"{stem}.{fmt}"
        if fmt == "csv":
            text = format_csv(rows)
        elif fmt == "svg":
            text = format_svg(series, markers, cost_dimension or "cycles")
        else:
            raise DomainError(f"unknown report format {fmt!r}")
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    return written
