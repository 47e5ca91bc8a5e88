"""Command-line interface: generate scenarios, ingest telemetry, run reports, serve."""
from __future__ import annotations

import json
import sys
from datetime import date
from pathlib import Path
from typing import Optional

import click

from . import reports, simgen
from .breakdown import SORT_KEYS, GroupBy
from .config import ServiceConfig, load_config, load_toml
from .core import ArtifactKind
from .store import QuerySpec, TelemetryStore, spec_violations

JSON_SEPARATORS = (",", ":")


def _fail(message: str) -> None:
    raise click.ClickException(message)


def _load_store(config_path: Optional[str], data_dir: Optional[str]) -> "tuple[TelemetryStore, ServiceConfig]":
    try:
        config = load_config(config_path)
    except FileNotFoundError:
        _fail(f"config file not found: {config_path}")
    if data_dir:
        config.data_dir = Path(data_dir)
    if not config.engines:
        config.engines = simgen.standard_engines()
    return TelemetryStore(config.data_dir, config.engines, config.label_policy), config


def _build_spec(
    time_from: str, time_to: str, model_type: str,
    models: tuple[str, ...], vendors: tuple[str, ...],
    threshold: Optional[float], coverage: int, scored_only: bool,
    feeds: tuple[str, ...], file_types: tuple[str, ...],
) -> QuerySpec:
    try:
        spec = QuerySpec(
            time_from=date.fromisoformat(time_from),
            time_to=date.fromisoformat(time_to),
            model_type=ArtifactKind(model_type),
            source_feeds=frozenset(feeds),
            model_versions=frozenset(models),
            vendor_ids=frozenset(vendors),
            threshold=threshold,
            file_types_include=frozenset(file_types),
            scored_by_model_only=scored_only,
            min_coverage_pct=coverage,
        )
    except ValueError as exc:
        _fail(str(exc))
    violations = spec_violations(spec)
    if violations:
        _fail("; ".join(violations))
    return spec


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(payload, separators=JSON_SEPARATORS, allow_nan=False))
    elif fmt == "csv":
        _emit_csv(payload)
    else:
        _emit_table(payload)


def _emit_csv(payload: dict) -> None:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    if "engines" in payload:
        writer.writerow(["engine_id", "tp", "fp", "tn", "fn", "unscanned", "tpr", "fpr",
                         "sample_malicious", "sample_benign", "sample_unlabeled", "warning"])
        for e in payload["engines"]:
            sr = e["sample_ratio"]
            writer.writerow([e["engine_id"], e["tp"], e["fp"], e["tn"], e["fn"],
                             e["unscanned"], e["tpr"], e["fpr"], sr["malicious"],
                             sr["benign"], sr["unlabeled"], e["low_coverage_warning"]])
    elif "rows" in payload:
        writer.writerow(["group_key", "vendors", "detection_ratio", "detected", "missed",
                         "total_samples", "endpoints"])
        for r in payload["rows"]:
            writer.writerow([r["group_key"], ";".join(r["vendors"]), r["detection_ratio"],
                             r["detected"], r["missed"], r["total_samples"], r["endpoints"]])
    click.echo(buf.getvalue(), nl=False)


def _fmt(value, digits: int = 4) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def _emit_table(payload: dict) -> None:
    if payload.get("empty"):
        click.echo("(empty result: no rows matched the query)")
    if "engines" in payload:
        header = f"{'engine':<20} {'tpr':>8} {'fpr':>8} {'tp':>6} {'fp':>6} {'fn':>6} {'tn':>6} {'unsc':>6}  warn"
        click.echo(header)
        for e in payload["engines"]:
            click.echo(
                f"{e['engine_id']:<20} {_fmt(e['tpr']):>8} {_fmt(e['fpr']):>8} "
                f"{e['tp']:>6} {e['fp']:>6} {e['fn']:>6} {e['tn']:>6} {e['unscanned']:>6}  "
                f"{'RED' if e['low_coverage_warning'] else '-'}")
    elif "rows" in payload and payload.get("schema", "").startswith("aitotal.breakdown"):
        click.echo(f"{'group':<30} {'ratio':>8} {'detected':>9} {'missed':>7} {'total':>7} {'endpoints':>10}")
        for r in payload["rows"]:
            click.echo(
                f"{r['group_key']:<30} {_fmt(r['detection_ratio']):>8} {r['detected']:>9} "
                f"{r['missed']:>7} {r['total_samples']:>7} {r['endpoints']:>10}")
    elif "issue_series" in payload:
        click.echo(f"{'day':<12} {'miss_src%':>10} {'unlabeled%':>11} {'miss_type%':>11}")
        for d in payload["issue_series"]:
            click.echo(f"{d['day']:<12} {_fmt(d['pct_missing_source'], 2):>10} "
                       f"{_fmt(d['pct_unlabeled'], 2):>11} {_fmt(d['pct_missing_filetype'], 2):>11}")
        if payload["anomalies"]:
            click.echo("anomalies:")
            for a in payload["anomalies"]:
                click.echo(f"  {a['day']}  {a['direction']:<10} {a['series']} "
                           f"(z={_fmt(a['robust_z'], 2)})")


query_options = [
    click.option("--from", "time_from", required=True, help="Start day (YYYY-MM-DD), inclusive."),
    click.option("--to", "time_to", required=True, help="End day (YYYY-MM-DD), inclusive."),
    click.option("--model-type", default="PE", show_default=True,
                 help="Artifact kind: PE, Office, PDF, URL, Email, Other."),
    click.option("--models", multiple=True, help="Internal model engine id (repeatable)."),
    click.option("--vendors", multiple=True, help="Vendor engine id (repeatable)."),
    click.option("--threshold", type=float, default=None,
                 help="Model score threshold; omit for per-model defaults."),
    click.option("--coverage", type=int, default=0, show_default=True,
                 help="Keep rows scanned by at least this %% of selected engines."),
    click.option("--scored-only", is_flag=True, help="Keep only rows scanned by a selected model."),
    click.option("--feeds", multiple=True, help="Source feed filter (repeatable)."),
    click.option("--file-types", multiple=True, help="File type filter (repeatable)."),
    click.option("--config", "config_path", default=None, help="Service config TOML."),
    click.option("--data", "data_dir", default=None, help="Data directory (overrides config)."),
]


def with_query_options(fn):
    for option in reversed(query_options):
        fn = option(fn)
    return fn


@click.group()
def main() -> None:
    """Monitoring stack for deployed security ML models."""


@main.command()
@click.option("--scenario", required=True,
              help=f"Built-in name ({', '.join(simgen.BUILTIN_SCENARIOS)}) or a TOML file path.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
def gen(scenario: str, seed: Optional[int], out_dir: str) -> None:
    """Generate synthetic telemetry plus its ground-truth manifest."""
    if Path(scenario).is_file():
        spec = simgen.scenario_from_wire(load_toml(scenario))
        name = Path(scenario).stem
    else:
        try:
            spec = simgen.builtin_scenario(scenario)
        except KeyError as exc:
            _fail(str(exc.args[0]))
        name = scenario
    if seed is not None:
        spec.seed = seed
    lines, manifest = simgen.generate(spec, scenario_name=name)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    telemetry = out / "telemetry.jsonl"
    telemetry.write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest.to_wire(), separators=JSON_SEPARATORS) + "\n", encoding="utf-8")
    click.echo(f"wrote {len(lines)} records to {telemetry} (manifest: {manifest_path})")


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--data", "data_dir", required=True, help="Data directory.")
def ingest(files: tuple[str, ...], data_dir: str) -> None:
    """Ingest JSONL telemetry files into the store."""
    store = TelemetryStore(data_dir)
    total = {"accepted": 0, "rejected": 0}
    for path in files:
        with open(path, "r", encoding="utf-8") as fh:
            summary = store.ingest(fh)
        total["accepted"] += summary.accepted
        total["rejected"] += summary.rejected
        for err in summary.errors[:10]:
            click.echo(f"{path}:{err['line']}: {'; '.join(err['errors'])}", err=True)
        if len(summary.errors) > 10:
            click.echo(f"{path}: ... {len(summary.errors) - 10} more rejected lines", err=True)
    click.echo(json.dumps({"schema": "aitotal.ingest.v1", **total}, separators=JSON_SEPARATORS))
    if total["rejected"] and not total["accepted"]:
        sys.exit(1)


@main.command()
@with_query_options
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "table"]),
              default="table", show_default=True)
def report(time_from, time_to, model_type, models, vendors, threshold, coverage,
           scored_only, feeds, file_types, config_path, data_dir, fmt) -> None:
    """Model Metrics report: TPR/FPR, sample ratios, series, ROC."""
    store, config = _load_store(config_path, data_dir)
    spec = _build_spec(time_from, time_to, model_type, models, vendors,
                       threshold, coverage, scored_only, feeds, file_types)
    try:
        payload = reports.metrics_payload(store, spec, config.warn_pct)
    except ValueError as exc:
        _fail(str(exc))
    _emit(payload, fmt)


@main.command()
@with_query_options
@click.option("--format", "fmt", type=click.Choice(["json", "table"]),
              default="table", show_default=True)
def quality(time_from, time_to, model_type, models, vendors, threshold, coverage,
            scored_only, feeds, file_types, config_path, data_dir, fmt) -> None:
    """Data Quality report: issue percentages, volumes, anomaly flags."""
    store, config = _load_store(config_path, data_dir)
    spec = _build_spec(time_from, time_to, model_type, models, vendors,
                       threshold, coverage, scored_only, feeds, file_types)
    try:
        payload = reports.quality_payload(
            store, spec, config.expected_sources,
            config.anomaly_window, config.anomaly_z_max)
    except ValueError as exc:
        _fail(str(exc))
    _emit(payload, fmt)


@main.command()
@with_query_options
@click.option("--group-by", type=click.Choice(["family", "filetype"]),
              default="family", show_default=True)
@click.option("--contains", default=None, help="Case-insensitive group name filter.")
@click.option("--sort", "sort_key", type=click.Choice(SORT_KEYS),
              default="group_key", show_default=True)
@click.option("--descending", is_flag=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "table"]),
              default="table", show_default=True)
def breakdown(time_from, time_to, model_type, models, vendors, threshold, coverage,
              scored_only, feeds, file_types, config_path, data_dir,
              group_by, contains, sort_key, descending, fmt) -> None:
    """Prediction Breakdown tables by malware family or file type."""
    store, config = _load_store(config_path, data_dir)
    spec = _build_spec(time_from, time_to, model_type, models, vendors,
                       threshold, coverage, scored_only, feeds, file_types)
    try:
        payload = reports.breakdown_payload(
            store, spec, GroupBy(group_by), contains, sort_key, descending)
    except ValueError as exc:
        _fail(str(exc))
    _emit(payload, fmt)


@main.command()
@click.option("--config", "config_path", default=None, help="Service config TOML.")
def serve(config_path: Optional[str]) -> None:
    """Run the HTTP service (and dashboard, when static assets are configured)."""
    from . import service

    try:
        config = load_config(config_path)
    except FileNotFoundError:
        _fail(f"config file not found: {config_path}")
    if not config.engines:
        config.engines = simgen.standard_engines()
    service.run(config)


if __name__ == "__main__":
    main()
