"""Command-line entry point ``strel-miner``.

Exit codes: 0 success, 2 configuration or formula error, 3 data error,
4 evaluation or projection error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import pipeline, spatial, traces
from .errors import ConfigError, DataError, EvaluationError, ProjectionError, StrelMinerError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_EVAL = 0, 2, 3, 4


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    if isinstance(exc, (EvaluationError, ProjectionError)):
        return EXIT_EVAL
    return EXIT_CONFIG


def _cmd_run(args) -> int:
    cfg = pipeline.PipelineConfig.from_json(args.config)
    report = pipeline.run(cfg)
    print(f"wrote artifacts to {cfg.output}")
    print(f"locations: {report['n_locations']}  edges: {report['n_edges']}  "
          f"clusters: {report['numC']}  wall time: {report['wall_time_s']:.2f} s")
    if report["unprojectable_locations"]:
        print(f"unprojectable: {', '.join(report['unprojectable_locations'])}")
    return EXIT_OK


def _load_model(path: str) -> spatial.SpatialModel:
    if path.endswith((".geojson", ".json")):
        return spatial.read_geojson(path)
    raise ConfigError("--model expects a GeoJSON file as written by 'strel-miner run'")


def _fmt(x: float) -> str:
    return ("+inf" if x > 0 else "-inf") if math.isinf(x) else f"{x:.6g}"


def _cmd_monitor(args) -> int:
    model = _load_model(args.model)
    trace = traces.load_traces(args.trace, model, args.time_unit)
    if args.clean is not None:
        trace, _ = traces.clean(trace, args.clean)
    locs = None if args.loc is None else args.loc
    rows = pipeline.monitor(model, trace, args.formula, locs, args.time)
    if args.json:
        print(json.dumps(rows, indent=1))
        return EXIT_OK
    print("location_id,time,robustness,satisfied")
    for r in rows:
        print(f"{r['location_id']},{r['time']:g},{_fmt(r['robustness'])},{str(r['satisfied']).lower()}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    cfg = traces.FoodCourtConfig.from_json(args.config) if args.config else traces.FoodCourtConfig()
    locs, trace = traces.generate_food_court(cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spatial.write_locations_csv(out / "locations.csv", locs)
    traces.write_traces_csv(out / "traces.csv", trace)
    print(f"wrote {len(locs)} locations and {trace.n_times} samples to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strel-miner",
                                description="Monitor STREL formulas and mine them from traces.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the full mining pipeline from a JSON config")
    r.add_argument("config")
    r.set_defaults(func=_cmd_run)

    m = sub.add_parser("monitor", help="evaluate one formula on a model and trace")
    m.add_argument("--model", required=True, help="spatial model GeoJSON")
    m.add_argument("--trace", required=True, help="long-format trace CSV")
    m.add_argument("--formula", required=True)
    m.add_argument("--loc", action="append", help="location id (repeatable; default all)")
    m.add_argument("--time", type=float, help="timestamp on the trace grid (default first)")
    m.add_argument("--time-unit", default="min")
    m.add_argument("--clean", type=float, metavar="FRAC",
                   help="drop locations above this missing fraction and fill the rest")
    m.add_argument("--json", action="store_true", help="print JSON instead of CSV")
    m.set_defaults(func=_cmd_monitor)

    g = sub.add_parser("gen-foodcourt", help="write a synthetic food-court dataset")
    g.add_argument("--config", help="generator JSON (defaults used when absent)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StrelMinerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
