"""End-to-end pipeline: parse, encode, impute, train, map, render, report.

Every run writes its artifacts under one output directory plus a manifest
(config echo, metrics, artifact paths with content hashes). Paths in the
manifest are relative to the output directory and the echoed config omits
the directory itself, so a rerun with the same input and seed reproduces
every byte regardless of where it lands.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import analysis, matrixio, viz
from .errors import SomSurveyError, UsageError
from .impute import ImputeConfig, knn_impute
from .ingest import ColumnSchema, EncodingScheme, default_scheme, encode, parse_survey, summarize
from .som import TrainingConfig, assign_bmus, save_assignment, save_codebook, topographic_error, train

MANIFEST_NAME = "manifest.json"


@dataclass
class PipelineConfig:
    input: str
    schema: ColumnSchema
    encoding: EncodingScheme = field(default_factory=default_scheme)
    impute: ImputeConfig = field(default_factory=ImputeConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    output_dir: str = "out"
    summary_format: str = "text"

    def __post_init__(self):
        if self.summary_format not in ("text", "csv"):
            raise UsageError("summary_format must be 'text' or 'csv'")

    def echo(self) -> dict:
        """Config echo embedded in the manifest; deliberately omits
        output_dir so reruns into other directories match byte-for-byte."""
        return {
            "input": self.input,
            "schema": self.schema.to_dict(),
            "encoding": self.encoding.to_dict(),
            "impute": self.impute.to_dict(),
            "training": self.training.to_dict(),
            "summary_format": self.summary_format,
        }

    @staticmethod
    def from_dict(d: dict, output_dir: str | None = None) -> "PipelineConfig":
        if "input" not in d or "schema" not in d:
            raise UsageError("pipeline config needs 'input' and 'schema' entries")
        return PipelineConfig(
            input=d["input"],
            schema=ColumnSchema.from_dict(d["schema"]),
            encoding=EncodingScheme.from_dict(d["encoding"]) if d.get("encoding") else default_scheme(),
            impute=ImputeConfig.from_dict(d.get("impute", {})),
            training=TrainingConfig.from_dict(d.get("training", {})),
            output_dir=output_dir or d.get("output_dir", "out"),
            summary_format=d.get("summary_format", "text"),
        )


@dataclass
class RunResult:
    manifest_path: Path
    manifest: dict


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _safe_name(name: str, idx: int) -> str:
    """Filesystem-safe variable name; the column index disambiguates names
    that sanitize to the same string."""
    safe = "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in name)
    return safe if safe == name else f"{safe}_{idx}"


class _Stage:
    """Prefixes any toolkit error with the failing stage's name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, SomSurveyError):
            exc.args = (f"stage {self.name}: {exc}",)
        return False


def run_pipeline(cfg: PipelineConfig) -> RunResult:
    """Execute every stage and write the artifact manifest.

    Any stage failure aborts the run with the stage named in the error;
    nothing is reported as complete without appearing in the manifest.
    """
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "planes").mkdir(exist_ok=True)
    artifacts: list[str] = []

    def emit(rel: str, text: str) -> None:
        (outdir / rel).write_text(text, encoding="utf-8")
        artifacts.append(rel)

    with _Stage("parse"):
        table = parse_survey(cfg.input, cfg.schema)

    with _Stage("encode"):
        encoded = encode(table, cfg.encoding)
        matrixio.save_matrix(encoded, outdir / "encoded.csv")
        artifacts.append("encoded.csv")

    with _Stage("summarize"):
        report = summarize(table)
        if cfg.summary_format == "csv":
            emit("summary.csv", report.render_csv())
        else:
            emit("summary.txt", report.render_text())

    with _Stage("impute"):
        imputed = knn_impute(encoded, cfg.impute)
        matrixio.save_matrix(imputed, outdir / "imputed.csv")
        artifacts.append("imputed.csv")

    with _Stage("train"):
        codebook, log = train(imputed, cfg.training)
        emit("training_log.csv", log.to_csv())

    with _Stage("assign"):
        assignment = assign_bmus(imputed, codebook)
        save_assignment(assignment, outdir / "assignments.csv")
        artifacts.append("assignments.csv")

    with _Stage("analyze"):
        hits = analysis.hit_map(assignment, codebook)
        umat = analysis.u_matrix(codebook)
        corr = analysis.correlation_report(codebook)
        emit("hitmap.json", hits.to_json())
        emit("umatrix.json", umat.to_json())
        emit("correlations.csv", corr.to_csv())
        topo = topographic_error(imputed, codebook)

    with _Stage("render"):
        likert = viz.default_likert_scale()
        for idx, name in enumerate(codebook.col_names):
            plane = analysis.component_plane(codebook, name)
            plane.labels = hits.labels  # annotate record groupings per cell
            result = viz.render(plane, likert, viz.RenderOptions(title=name))
            emit(f"planes/{_safe_name(name, idx)}.svg", result.svg)
        u_scale = viz.default_likert_scale("linear").rescaled(
            float(umat.values.min()), float(umat.values.max()))
        emit("umatrix.svg", viz.render(umat, u_scale, viz.RenderOptions(title="U-matrix")).svg)
        h_scale = viz.default_likert_scale("linear").rescaled(0.0, float(hits.values.max()))
        emit("hitmap.svg", viz.render(hits, h_scale, viz.RenderOptions(title="Hits")).svg)

    with _Stage("manifest"):
        n_sweeps = log.sweeps[-1].sweep
        metrics = {
            "records": len(imputed.row_ids),
            "variables": len(imputed.col_names),
            "missing_cells": int(encoded.missing.sum()),
            "sweeps": n_sweeps,
            "initial_quantization_error": log.sweeps[0].quantization_error,
            "quantization_error": log.sweeps[-1].quantization_error,
            "topographic_error": topo,
        }
        save_codebook(codebook, outdir / "codebook.json", config=cfg.training, metrics=metrics)
        artifacts.append("codebook.json")
        manifest = {
            "tool": "somsurvey",
            "config": cfg.echo(),
            "seed": cfg.training.seed,
            "metrics": metrics,
            "artifacts": [
                {"path": rel, "sha256": _sha256(outdir / rel)}
                for rel in sorted(artifacts)
            ],
        }
        manifest_path = outdir / MANIFEST_NAME
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return RunResult(manifest_path=manifest_path, manifest=manifest)


def load_config(path: str | Path, output_dir: str | None = None) -> PipelineConfig:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return PipelineConfig.from_dict(doc, output_dir=output_dir)


def config_from_manifest(path: str | Path, output_dir: str) -> PipelineConfig:
    """Rebuild the run configuration recorded in a manifest."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "config" not in doc:
        raise UsageError(f"{path}: not a pipeline manifest (no config echo)")
    return PipelineConfig.from_dict(doc["config"], output_dir=output_dir)
