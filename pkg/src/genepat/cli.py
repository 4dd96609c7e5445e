"""Command-line front end.

Every subcommand reads and writes plain CSV so stages compose through files
or pipes.  Failures print one line ``error,<exit code>,<kind>,<message>`` on
stderr and exit 2 (bad parameters) or 3 (unreadable or malformed input).
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__
from .classifier import ClassifierConfig, classify_windows, mix_of
from .config import build, read_kv, unknown_keys
from .errors import ParameterError, TraceFormatError
from .memsim import HierarchyConfig, SimCounters, simulate
from .metrics import MetricSet, derive_metrics
from .patterns import LABELS, PatternLabel, PatternMix
from .plotting import RenderSpec, render_pattern_figure, render_ptmap
from .policy import Advice, recommend
from .profiler import parse_profile, select_hotspots
from .ptmap import (
    PtMapConfig,
    PtMapPoint,
    energy_level,
    indifference_curve_points,
    order_suites,
    suite_centers,
)
from .synthgen import GenSpec, generate, generate_mix
from .trace import Trace
from .traceio import format_text, read_trace, to_binary

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_FORMAT = 3

# config keys that belong to no dataclass
EXTRA_KEYS = {"records", "mix", "suite", "demand_only", "curve_points"}
CONFIG_CLASSES = (GenSpec, ClassifierConfig, HierarchyConfig, PtMapConfig)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # one-line errors instead of usage dumps
        raise ParameterError(message)


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(rows: Iterable[Sequence[Any]]) -> str:
    return "".join(",".join(_fmt(x) for x in row) + "\n" for row in rows)


def _write(args, text: str | bytes) -> None:
    if args.out in (None, "-"):
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(text)
    else:
        path = Path(args.out)
        if isinstance(text, bytes):
            path.write_bytes(text)
        else:
            path.write_text(text)


def _config(args) -> dict[str, str]:
    if not args.config:
        return {}
    values = read_kv(args.config)
    bad = [k for k in unknown_keys(values, *CONFIG_CLASSES) if k not in EXTRA_KEYS]
    if bad:
        raise ParameterError(f"{args.config}: unknown config keys {', '.join(bad)}")
    return values


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise TraceFormatError(f"{path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise TraceFormatError(f"{path}: not a text file") from None


def _load_trace(path: str) -> Trace:
    if path == "-":
        return read_trace(io.BytesIO(sys.stdin.buffer.read()))
    return read_trace(path)


# gen


def _parse_mix_arg(text: str) -> list[tuple[PatternLabel, float]]:
    parts = []
    for item in text.split(","):
        if not item.strip():
            continue
        if ":" not in item:
            raise ParameterError(f"mix entry {item!r} must look like P2:0.25")
        lab, frac = item.split(":", 1)
        try:
            parts.append((PatternLabel.parse(lab), float(frac)))
        except ValueError:
            raise ParameterError(f"mix entry {item!r}: bad fraction") from None
    if not parts:
        raise ParameterError("empty mix")
    return parts


def _gen_overrides(args) -> dict[str, Any]:
    return {
        "stride": args.stride,
        "period": args.period,
        "n_outer": args.n_outer,
        "footprint": args.footprint,
        "elem_count": args.elem_count,
        "size": args.size,
        "op_mix": args.op_mix,
        "seed": args.seed,
    }


def _records(args, values: dict[str, str]) -> int | None:
    if args.records is not None:
        return args.records
    if "records" in values:
        try:
            return int(values["records"], 0)
        except ValueError:
            raise ParameterError(f"records: cannot read {values['records']!r} as int") from None
    return None


def _generate(args, values: dict[str, str]) -> Trace:
    n = _records(args, values)
    mix_text = args.mix or values.get("mix")
    overrides = _gen_overrides(args)
    if mix_text:
        parts = [
            (build(GenSpec, values, **{**overrides, "pattern": lab}), frac)
            for lab, frac in _parse_mix_arg(mix_text)
        ]
        return generate_mix(parts, n)
    pattern = args.pattern or values.get("pattern")
    if not pattern:
        raise ParameterError("gen needs --pattern or --mix (or a pattern/mix config key)")
    spec = build(GenSpec, values, **{**overrides, "pattern": PatternLabel.parse(pattern)})
    return generate(spec, n)


def cmd_gen(args) -> int:
    t = _generate(args, _config(args))
    _write(args, to_binary(t) if args.format == "binary" else format_text(t))
    return EXIT_OK


# classify


def _classifier_config(args, values: dict[str, str]) -> ClassifierConfig:
    return build(ClassifierConfig, values, window_len=getattr(args, "window_len", None))


def classify_rows(t: Trace, cfg: ClassifierConfig) -> tuple[list[list[Any]], PatternMix]:
    results = classify_windows(t, cfg)
    rows: list[list[Any]] = [["window_start", "window_len", "label", "slope", "period_class"]]
    for r in results:
        rows.append([r.start, r.length, r.label.value, float(r.features.slope_k), r.features.periodic.value])
    mix = mix_of(results)
    rows.append(["MIX:"] + [f"{lab.value}={mix[lab]!r}" for lab in LABELS])
    return rows, mix


def cmd_classify(args) -> int:
    values = _config(args)
    rows, _ = classify_rows(_load_trace(args.trace), _classifier_config(args, values))
    _write(args, _csv(rows))
    return EXIT_OK


# simulate / metrics


def _hierarchy(args, values: dict[str, str]) -> HierarchyConfig:
    over: dict[str, Any] = {}
    if getattr(args, "no_prefetch", False):
        over["prefetch_enabled"] = False
    if getattr(args, "fully_associative", False):
        over["fully_associative"] = True
    return build(HierarchyConfig, values, **over)


def counters_csv(s: SimCounters) -> str:
    return _csv([["counter", "value"], *s.rows()])


def parse_counters(text: str, origin: str = "<counters>") -> SimCounters:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line == "counter,value":
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceFormatError(f"{origin}:{lineno}: expected counter,value")
        values[parts[0].strip()] = parts[1].strip()
    try:
        return SimCounters.from_rows(values)
    except ParameterError as exc:
        raise TraceFormatError(f"{origin}: {exc}") from None


def metrics_csv(m: MetricSet) -> str:
    rows: list[Sequence[Any]] = [["metric", "value"], *m.rows()]
    if m.flags:
        rows.append(["flags", *m.flags])
    return _csv(rows)


def cmd_simulate(args) -> int:
    values = _config(args)
    s = simulate(_load_trace(args.trace), _hierarchy(args, values))
    _write(args, counters_csv(s))
    return EXIT_OK


def _demand_only(args, values: dict[str, str]) -> bool:
    if args.demand_only:
        return True
    return values.get("demand_only", "false").strip().lower() in {"1", "true", "yes", "on"}


def cmd_metrics(args) -> int:
    values = _config(args)
    if (args.trace is None) == (args.counters is None):
        raise ParameterError("metrics needs exactly one of a trace file or --counters")
    if args.counters is not None:
        s = parse_counters(_read_text(args.counters), args.counters)
    else:
        s = simulate(_load_trace(args.trace), _hierarchy(args, values))
    _write(args, metrics_csv(derive_metrics(s, _demand_only(args, values))))
    return EXIT_OK


# ptmap


def parse_points(text: str, origin: str = "<points>", epsilon: float = 1e-6) -> list[PtMapPoint]:
    points = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("label,"):
            continue
        parts = [x.strip() for x in line.split(",")]
        if len(parts) != 4:
            raise TraceFormatError(f"{origin}:{lineno}: expected label,suite,l3_apc,ral")
        try:
            apc, ral = float(parts[2]), float(parts[3])
        except ValueError:
            raise TraceFormatError(f"{origin}:{lineno}: l3_apc and ral must be numbers") from None
        points.append(PtMapPoint(parts[0], apc, ral, parts[1], epsilon=epsilon))
    if not points:
        raise TraceFormatError(f"{origin}: no points")
    return points


def ptmap_outputs(
    points: list[PtMapPoint], cfg: PtMapConfig, n_curve: int = 64, spec: RenderSpec | None = None
) -> dict[str, str]:
    """Centers, ordering, level curves and the rendered map for a set of points."""
    centers = suite_centers(points)
    order = order_suites(centers, cfg)
    apcs = [p.l3_apc for p in points] + [c.l3_apc for c in centers.values()]
    apc_range = (min(apcs) / 10.0, max(apcs) * 10.0)
    curves = [(s, indifference_curve_points(energy_level(centers[s], cfg), apc_range, n_curve, cfg)) for s in order]

    center_rows: list[list[Any]] = [["suite", "l3_apc", "ral", "energy"]]
    for s in order:
        c = centers[s]
        center_rows.append([s, c.l3_apc, c.ral, energy_level(c, cfg).value])
    curve_rows: list[list[Any]] = [["suite", "l3_apc", "ral"]]
    for s, pts in curves:
        curve_rows.extend([s, a, r] for a, r in pts)
    point_rows: list[list[Any]] = [["label", "suite", "l3_apc", "ral", "energy", "flags"]]
    for p in points:
        point_rows.append([p.label, p.suite, p.l3_apc, p.ral, energy_level(p, cfg).value, "|".join(p.flags)])
    return {
        "centers.csv": _csv(center_rows),
        "order.txt": "".join(s + "\n" for s in order),
        "curves.csv": _csv(curve_rows),
        "points.csv": _csv(point_rows),
        "ptmap.svg": render_ptmap(points, centers, curves, spec or RenderSpec(log_axes=(True, True))),
    }


def _ptmap_config(args, values: dict[str, str]) -> PtMapConfig:
    return build(PtMapConfig, values, beta=getattr(args, "beta", None))


def _curve_points(args, values: dict[str, str]) -> int:
    if getattr(args, "curve_points", None) is not None:
        return args.curve_points
    try:
        return int(values.get("curve_points", "64"))
    except ValueError:
        raise ParameterError("curve_points must be an integer") from None


def _write_dir(out: str, files: dict[str, str]) -> None:
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (d / name).write_text(content)


def cmd_ptmap(args) -> int:
    values = _config(args)
    cfg = _ptmap_config(args, values)
    points = parse_points(_read_text(args.points), args.points, cfg.epsilon)
    files = ptmap_outputs(points, cfg, _curve_points(args, values))
    if args.out in (None, "-"):
        order = files["order.txt"].split()
        sys.stdout.write(files["centers.csv"] + _csv([["ORDER:", *order]]))
    else:
        _write_dir(args.out, files)
    return EXIT_OK


# advise


def parse_mix(text: str, origin: str = "<mix>") -> PatternMix:
    """Read ``label,weight`` rows, or the ``MIX:`` line of classify output."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    for ln in lines:
        if ln.startswith("MIX:"):
            pairs = []
            for item in ln.split(",")[1:]:
                if "=" not in item:
                    raise TraceFormatError(f"{origin}: bad MIX entry {item!r}")
                k, v = item.split("=", 1)
                pairs.append((k, v))
            break
    else:
        pairs = []
        for ln in lines:
            parts = [x.strip() for x in ln.split(",")]
            if parts[0].lower() == "label":
                continue
            if len(parts) != 2:
                raise TraceFormatError(f"{origin}: expected label,weight rows, got {ln!r}")
            pairs.append((parts[0], parts[1]))
    if not pairs:
        raise TraceFormatError(f"{origin}: no mix weights")
    try:
        weights = {PatternLabel.parse(k): float(v) for k, v in pairs}
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise TraceFormatError(f"{origin}: {exc}") from None
        raise TraceFormatError(f"{origin}: non-numeric weight") from None
    return PatternMix(weights)


def advice_csv(mix: PatternMix, advice: Advice) -> str:
    rows: list[list[Any]] = [
        ["label", "weight", "page_policy", "fetch_granularity", "cache_levels", "prefetch_mode", "dominant"]
    ]
    for lab in LABELS:
        r = advice.per_label[lab]
        rows.append(
            [lab.value, mix[lab], r.page_policy, r.fetch_granularity, r.levels_text(), r.prefetch_mode,
             lab is advice.dominant_label]
        )
    rows.append(["AMBIGUOUS:", advice.ambiguous, advice.margin])
    return _csv(rows)


def advice_text(mix: PatternMix, advice: Advice) -> str:
    d = advice.dominant
    lines = [
        f"dominant pattern: {advice.dominant_label.value} (weight {mix[advice.dominant_label]:.3f}, "
        f"margin {advice.margin:.3f}{', ambiguous' if advice.ambiguous else ''})",
        f"  page policy: {d.page_policy}; fetch: {d.fetch_granularity}; cache levels: {d.levels_text()}; "
        f"prefetch: {d.prefetch_mode}",
    ]
    lines += [f"  {r}" for r in d.rationale]
    for lab, w in mix.ranked():
        if w > 0 and lab is not advice.dominant_label:
            r = advice.per_label[lab]
            lines.append(
                f"also {lab.value} (weight {w:.3f}): {r.page_policy} page, {r.fetch_granularity} fetch, "
                f"{r.levels_text()}, prefetch {r.prefetch_mode}"
            )
            lines += [f"  {x}" for x in r.rationale]
    return "\n".join(lines) + "\n"


def cmd_advise(args) -> int:
    _config(args)
    mix = parse_mix(_read_text(args.mix), args.mix)
    advice = recommend(mix)
    _write(args, advice_text(mix, advice) if args.text else advice_csv(mix, advice))
    return EXIT_OK


# hotspots


def cmd_hotspots(args) -> int:
    _config(args)
    profile = parse_profile(_read_text(args.profile))
    try:
        hot = select_hotspots(profile)
    except ZeroDivisionError:
        raise ParameterError("importance undefined: t_s + n*t_p is zero") from None
    _write(args, _csv([["segment_id", "importance"], *hot]))
    return EXIT_OK


# report


def _report_one(t: Trace, out_dir: Path, values: dict[str, str], hier: HierarchyConfig, demand_only: bool) -> tuple[float, float]:
    rows, mix = classify_rows(t, build(ClassifierConfig, values))
    s = simulate(t, hier)
    m = derive_metrics(s, demand_only)
    advice = recommend(mix)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "windows.csv": _csv(rows),
        "mix.csv": _csv([["label", "weight"], *[(lab.value, mix[lab]) for lab in LABELS]]),
        "counters.csv": counters_csv(s),
        "metrics.csv": metrics_csv(m),
        "advice.csv": advice_csv(mix, advice),
        "advice.txt": advice_text(mix, advice),
        "pattern.svg": render_pattern_figure(t, RenderSpec(title=t.origin or "access pattern")),
    }
    for name, content in files.items():
        (out_dir / name).write_text(content)
    return m.l3_apc, m.ral


def _report_path(job: tuple[str, str, dict[str, str], HierarchyConfig, bool]) -> tuple[float, float]:
    path, out_dir, values, hier, demand_only = job
    return _report_one(read_trace(path), Path(out_dir), values, hier, demand_only)


def cmd_report(args) -> int:
    values = _config(args)
    if args.out in (None, "-"):
        raise ParameterError("report needs --out <directory>")
    out = Path(args.out)
    hier = _hierarchy(args, values)
    demand_only = _demand_only(args, values)
    suite = args.suite or values.get("suite", "trace")
    ptcfg = _ptmap_config(args, values)
    build(ClassifierConfig, values)  # fail fast on bad classifier keys
    if args.jobs < 1:
        raise ParameterError("--jobs must be >= 1")

    if not args.traces:
        t = _generate(args, values)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.csv").write_text(format_text(t))
        results = [("trace", _report_one(t, out, values, hier, demand_only))]
    else:
        names = [Path(p).stem for p in args.traces]
        if len(set(names)) != len(names):
            raise ParameterError("report inputs must have distinct file names")
        single = len(args.traces) == 1
        jobs = [(p, str(out if single else out / n), values, hier, demand_only) for p, n in zip(args.traces, names)]
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                coords = list(pool.map(_report_path, jobs))
        else:
            coords = [_report_path(j) for j in jobs]
        results = list(zip(names, coords))

    points = [PtMapPoint(name, apc, ral, suite, epsilon=ptcfg.epsilon) for name, (apc, ral) in results]
    _write_dir(str(out), ptmap_outputs(points, ptcfg, _curve_points(args, values)))
    return EXIT_OK


# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--config", metavar="FILE", help="key=value configuration file")
    g.add_argument("--seed", type=_u64, help="random seed for generated traces (unsigned 64-bit)")
    g.add_argument("--format", choices=("text", "binary"), default="text", help="trace output format")
    g.add_argument("--out", metavar="PATH", help="output file (directory for ptmap/report); default stdout")


def _add_gen_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("generator options")
    g.add_argument("--pattern", help="base pattern P1..P6")
    g.add_argument("--mix", help="comma-separated label:fraction pairs, e.g. P2:0.25,P4:0.75")
    g.add_argument("--records", type=int, help="exact number of records")
    g.add_argument("--stride", type=int)
    g.add_argument("--period", type=int)
    g.add_argument("--n-outer", type=int)
    g.add_argument("--footprint", type=int)
    g.add_argument("--elem-count", type=int)
    g.add_argument("--size", type=int)
    g.add_argument("--op-mix", choices=("read", "write", "rmw"))


def _add_sim_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("simulator options")
    g.add_argument("--no-prefetch", action="store_true", help="disable the L2 stream prefetcher")
    g.add_argument("--fully-associative", action="store_true")
    g.add_argument("--demand-only", action="store_true", help="prefetch ratio over demand requests only")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="genepat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"genepat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic trace")
    _add_gen_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("classify", help="label each window of a trace")
    p.add_argument("trace", help="trace file ('-' for stdin)")
    p.add_argument("--window-len", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="run a trace through the cache model")
    p.add_argument("trace")
    _add_sim_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="derive locality metrics")
    p.add_argument("trace", nargs="?", help="trace to simulate inline")
    p.add_argument("--counters", metavar="FILE", help="counters CSV from 'simulate'")
    _add_sim_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("ptmap", help="suite centers, energy order and level curves")
    p.add_argument("points", help="CSV of label,suite,l3_apc,ral")
    p.add_argument("--beta", type=float)
    p.add_argument("--curve-points", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_ptmap)

    p = sub.add_parser("advise", help="policy recommendations for a pattern mix")
    p.add_argument("mix", help="label,weight CSV or classify output")
    p.add_argument("--text", action="store_true", help="human-readable output")
    _add_common(p)
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("hotspots", help="select hotspots from a timing profile")
    p.add_argument("profile")
    _add_common(p)
    p.set_defaults(func=cmd_hotspots)

    p = sub.add_parser("report", help="full pipeline with CSV and SVG output")
    p.add_argument("traces", nargs="*", help="trace files; none means generate from options")
    p.add_argument("--suite", help="suite id for the map points")
    p.add_argument("--jobs", type=int, default=1, help="process traces in parallel")
    p.add_argument("--beta", type=float)
    p.add_argument("--curve-points", type=int)
    _add_gen_options(p)
    _add_sim_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return parser


def _fail(code: int, kind: str, exc: BaseException) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error,{code},{kind},{msg}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ParameterError as exc:
        return _fail(EXIT_PARAMETER, "parameter", exc)
    except TraceFormatError as exc:
        return _fail(EXIT_FORMAT, "format", exc)
    except OSError as exc:
        return _fail(EXIT_FORMAT, "io", exc)


if __name__ == "__main__":
    sys.exit(main())
