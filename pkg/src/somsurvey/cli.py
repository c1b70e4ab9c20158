"""Command-line front end.

Subcommands mirror the pipeline stages (synth, ingest, impute, train,
map, plot, correlate) plus `run` for the whole chain driven by a JSON
config. Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, matrixio, pipeline, synth, viz
from .errors import DataError, NumericError, SomSurveyError, UsageError
from .impute import ImputeConfig, knn_impute
from .ingest import ColumnSchema, default_scheme, encode, parse_survey, summarize
from .som import (
    PhaseSchedule,
    TrainingConfig,
    assign_bmus,
    load_assignment,
    load_codebook,
    save_assignment,
    save_codebook,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _comma_list(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(s for s in (part.strip() for part in text.split(",")) if s)


def _schema_from_args(args) -> ColumnSchema:
    if args.schema:
        doc = json.loads(Path(args.schema).read_text(encoding="utf-8"))
        return ColumnSchema.from_dict(doc)
    if not args.id_col:
        raise UsageError("either --schema or --id-col is required")
    return ColumnSchema(
        id_column=args.id_col,
        factors=_comma_list(args.factor_cols),
        numeric=_comma_list(args.numeric_cols),
        demographic=_comma_list(args.demographic_cols),
        ignore=_comma_list(args.ignore_cols),
    )


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise UsageError(f"grid must look like 30x30, got {text!r}")


def _parse_phase(text: str | None) -> PhaseSchedule | None:
    """iters:mu_start:mu_end:radius_start:radius_end"""
    if not text:
        return None
    parts = text.split(":")
    if len(parts) != 5:
        raise UsageError(
            f"phase schedule must be iters:mu_start:mu_end:radius_start:radius_end, got {text!r}"
        )
    return PhaseSchedule(
        iterations=int(parts[0]),
        mu_start=float(parts[1]),
        mu_end=float(parts[2]),
        radius_start=float(parts[3]),
        radius_end=float(parts[4]),
    )


def cmd_synth(args) -> int:
    if args.spec:
        spec = synth.spec_from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
    else:
        spec = synth.demo_spec(
            records=args.records,
            n_factors=args.factors,
            seed=args.seed,
            missingness=args.missingness,
            correlated_pair_rho=args.pair_rho,
        )
    out, truth = synth.generate_synthetic(spec, args.out, args.truth)
    print(f"wrote {out} and {truth}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    schema = _schema_from_args(args)
    table = parse_survey(args.input, schema)
    matrix = encode(table, default_scheme())
    matrixio.save_matrix(matrix, args.out)
    print(f"encoded {len(table)} records x {len(matrix.col_names)} variables -> {args.out}")
    if args.summary:
        report = summarize(table)
        text = report.render_csv() if args.summary_format == "csv" else report.render_text()
        Path(args.summary).write_text(text, encoding="utf-8")
        print(f"summary -> {args.summary}")
    return EXIT_OK


def cmd_impute(args) -> int:
    matrix = matrixio.load_matrix(args.input)
    cfg = ImputeConfig(k=args.k, axis=args.axis, aggregation=args.aggregation)
    filled = knn_impute(matrix, cfg)
    matrixio.save_matrix(filled, args.out)
    print(f"imputed {int(matrix.missing.sum())} cells -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    matrix = matrixio.load_matrix(args.input)
    cfg = TrainingConfig(
        grid=_parse_grid(args.grid),
        topology=args.topology,
        neighborhood=args.neighborhood,
        ordering=_parse_phase(args.ordering),
        convergence=_parse_phase(args.convergence),
        init=args.init,
        seed=args.seed,
        stop=args.stop,
        epsilon=args.epsilon,
    )
    codebook, log = train(matrix, cfg)
    final = log.sweeps[-1]
    save_codebook(codebook, args.codebook, config=cfg,
                  metrics={"quantization_error": final.quantization_error,
                           "sweeps": final.sweep})
    if args.log:
        Path(args.log).write_text(log.to_csv(), encoding="utf-8")
    print(f"trained {codebook.width}x{codebook.height} map, "
          f"{final.sweep} sweeps, quantization error {final.quantization_error:.4f}")
    return EXIT_OK


def cmd_map(args) -> int:
    codebook = load_codebook(args.codebook)
    matrix = matrixio.load_matrix(args.input)
    assignment = assign_bmus(matrix, codebook)
    if args.assign:
        save_assignment(assignment, args.assign)
        print(f"assignments -> {args.assign}")
    if args.hits:
        analysis.hit_map(assignment, codebook).save(args.hits)
        print(f"hit map -> {args.hits}")
    if args.groups:
        groups = analysis.similar_groups(assignment, codebook, args.radius)
        with Path(args.groups).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["group", "record_id"])
            for gi, group in enumerate(groups):
                for rid in group:
                    writer.writerow([gi, rid])
        print(f"{len(groups)} groups at radius {args.radius} -> {args.groups}")
    if not (args.assign or args.hits or args.groups):
        raise UsageError("map: nothing to do; pass --assign, --hits or --groups")
    return EXIT_OK


def cmd_plot(args) -> int:
    if bool(args.gridmap) == bool(args.codebook):
        raise UsageError("plot: pass exactly one of --gridmap or --codebook")
    if args.gridmap:
        grid_map = analysis.GridMap.load(args.gridmap)
        title = args.title or Path(args.gridmap).stem
    else:
        if not args.variable:
            raise UsageError("plot: --codebook requires --variable")
        codebook = load_codebook(args.codebook)
        grid_map = analysis.component_plane(codebook, args.variable)
        if args.assign:
            assignment = load_assignment(args.assign)
            grid_map.labels = analysis.hit_map(assignment, codebook).labels
        title = args.title or args.variable

    scale = viz.default_likert_scale(args.interp)
    values = grid_map.values
    lo, hi = float(values.min()), float(values.max())
    if lo < scale.stops[0].value or hi > scale.stops[-1].value:
        scale = scale.rescaled(lo, hi)
    opts = viz.RenderOptions(
        title=title,
        cell_size=args.cell_size,
        labels=args.labels == "on",
        shape=args.shape,
    )
    result = viz.render(grid_map, scale, opts)
    Path(args.out).write_text(result.svg, encoding="utf-8")
    note = f" ({result.clamped} values clamped)" if result.clamped else ""
    print(f"svg -> {args.out}{note}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    if args.raw:
        if not args.input:
            raise UsageError("correlate --raw needs --input with the data matrix")
        report = analysis.raw_correlation_report(matrixio.load_matrix(args.input))
    else:
        report = analysis.correlation_report(load_codebook(args.codebook))
    report.save(args.out)
    print(f"{len(report.names)}x{len(report.names)} correlation matrix -> {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    if bool(args.config) == bool(args.from_manifest):
        raise UsageError("run: pass exactly one of --config or --from-manifest")
    if args.from_manifest:
        cfg = pipeline.config_from_manifest(args.from_manifest, output_dir=args.outdir)
    else:
        cfg = pipeline.load_config(args.config, output_dir=args.outdir)

    training = cfg.training
    if args.seed is not None:
        training = replace(training, seed=args.seed)
    if args.grid is not None:
        training = replace(training, grid=_parse_grid(args.grid))
    cfg.training = training

    result = pipeline.run_pipeline(cfg)
    m = result.manifest["metrics"]
    print(f"pipeline complete: {m['records']} records, "
          f"quantization error {m['quantization_error']:.4f}, "
          f"manifest -> {result.manifest_path}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="somsurvey", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic survey CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None, help="ground-truth sidecar path")
    p.add_argument("--spec", default=None, help="JSON generator spec (overrides other flags)")
    p.add_argument("--records", type=int, default=611)
    p.add_argument("--factors", type=int, default=15)
    p.add_argument("--missingness", type=float, default=0.05)
    p.add_argument("--pair-rho", type=float, default=0.8,
                   help="correlation planted between the demo factor pair (0 disables)")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse and encode a survey CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="encoded matrix CSV")
    p.add_argument("--schema", default=None, help="JSON column-role declaration")
    p.add_argument("--id-col", default=None)
    p.add_argument("--factor-cols", default=None, help="comma-separated factor columns")
    p.add_argument("--numeric-cols", default=None)
    p.add_argument("--demographic-cols", default=None)
    p.add_argument("--ignore-cols", default=None)
    p.add_argument("--summary", default=None, help="write a descriptive-statistics report")
    p.add_argument("--summary-format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("impute", help="fill missing matrix entries")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--axis", choices=("rows", "columns"), default="rows")
    p.add_argument("--aggregation", choices=("nearest", "mean", "median"), default=None)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("train", help="train a self-organizing map")
    p.add_argument("--input", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--log", default=None, help="training log CSV")
    p.add_argument("--grid", default="30x30")
    p.add_argument("--topology", choices=("rectangular", "hexagonal"), default="rectangular")
    p.add_argument("--neighborhood", choices=("bubble", "gaussian"), default="bubble")
    p.add_argument("--init", choices=("random-uniform", "linear"), default="random-uniform")
    p.add_argument("--ordering", default=None,
                   help="iters:mu_start:mu_end:radius_start:radius_end")
    p.add_argument("--convergence", default=None,
                   help="iters:mu_start:mu_end:radius_start:radius_end")
    p.add_argument("--stop", choices=("fixed-iterations", "weight-delta"),
                   default="fixed-iterations")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("map", help="assign records to cells; hit map and groups")
    p.add_argument("--codebook", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--assign", default=None, help="assignment CSV output")
    p.add_argument("--hits", default=None, help="hit-map JSON output")
    p.add_argument("--groups", default=None, help="record groups CSV output")
    p.add_argument("--radius", type=float, default=0.0)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("plot", help="render a grid map as SVG")
    p.add_argument("--gridmap", default=None, help="GridMap JSON input")
    p.add_argument("--codebook", default=None, help="codebook JSON input")
    p.add_argument("--variable", default=None, help="component plane variable")
    p.add_argument("--assign", default=None, help="assignment CSV for cell labels")
    p.add_argument("--out", required=True)
    p.add_argument("--labels", choices=("on", "off"), default="on")
    p.add_argument("--interp", choices=("discrete", "linear"), default="discrete")
    p.add_argument("--title", default=None)
    p.add_argument("--cell-size", type=int, default=20)
    p.add_argument("--shape", choices=("rect", "hex"), default="rect")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("correlate", help="pairwise factor correlations")
    p.add_argument("--codebook", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true",
                   help="data-space correlations from a matrix instead of planes")
    p.add_argument("--input", default=None, help="matrix CSV (with --raw)")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("run", help="run the full pipeline")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--from-manifest", default=None, help="reproduce a previous run")
    p.add_argument("--outdir", default=None, help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid", default=None)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "correlate" and not args.raw and not args.codebook:
            raise UsageError("correlate needs --codebook (or --raw with --input)")
        return args.func(args)
    except UsageError as exc:
        print(f"somsurvey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"somsurvey: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"somsurvey: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SomSurveyError as exc:
        print(f"somsurvey: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
