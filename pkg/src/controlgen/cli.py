"""``controls`` command line: validation, generation, scoring, reports, serving.

Exit codes: 0 success, 1 domain error (message on stderr as ErrorName: detail),
2 usage error. ``--json`` switches machine-readable output on stdout.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import gherkin, pipeline, rubric, service
from .applicability import heuristic_applicability, resolve_applicability
from .catalog import ControlTypeId, catalog_as_dicts, get_control_type, list_control_types
from .errors import DomainError
from .prompts import build_prompt
from .providers import HttpProvider, LlmProvider, ReplayProvider
from .resources import load_catalog
from .retrieval import (
    build_index,
    load_exemplars,
    load_snippets,
    retrieve_exemplars,
    retrieve_snippets,
    tokenize,
)
from .store import RecordStore


def domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            click.echo(f"{type(exc).__name__}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _emit(data, as_json: bool, human: str) -> None:
    if as_json:
        click.echo(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        click.echo(human)


def _build_index_from(exemplars_path: str, snippets_path: str):
    return build_index(load_exemplars(exemplars_path), load_snippets(snippets_path))


def _provider_from_options(provider_kind: str, replay_dir: str | None) -> LlmProvider:
    if provider_kind == "replay":
        if not replay_dir:
            raise click.UsageError("--replay-dir is required with --provider replay")
        return ReplayProvider(replay_dir)
    return HttpProvider.from_env()


@click.group()
def cli() -> None:
    """Generate, validate, review, and report on security-control Gherkins."""


@cli.group()
def catalog() -> None:
    """Resource schema catalog operations."""


@catalog.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def catalog_validate(path: str, as_json: bool) -> None:
    cat = load_catalog(path)
    data = {
        "version": cat.version,
        "schemas": [f"{s.service}/{s.resource}" for s in cat.schemas],
    }
    _emit(data, as_json, f"OK: version {cat.version}, {len(cat.schemas)} schemas")


@cli.group()
def index() -> None:
    """Retrieval index operations."""


@index.command("build")
@click.option("--exemplars", "exemplars_path", required=True, type=click.Path(exists=True))
@click.option("--snippets", "snippets_path", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def index_build(exemplars_path: str, snippets_path: str, as_json: bool) -> None:
    idx = _build_index_from(exemplars_path, snippets_path)
    data = {"exemplars": idx.exemplar_count, "snippets": idx.snippet_count}
    _emit(
        data,
        as_json,
        f"indexed {idx.exemplar_count} exemplars, {idx.snippet_count} snippets",
    )


@cli.command("export-types")
def export_types() -> None:
    click.echo(json.dumps({"control_types": catalog_as_dicts()}, indent=2, ensure_ascii=False))


@cli.command("applicable")
@click.argument("service_name")
@click.argument("resource_name")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--agent", is_flag=True, help="Consult the agent for undecided types.")
@click.option("--replay-dir", type=click.Path(), default=None)
@click.option("--provider", "provider_kind", type=click.Choice(["replay", "http"]), default="replay")
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def applicable(
    service_name: str,
    resource_name: str,
    catalog_path: str,
    agent: bool,
    replay_dir: str | None,
    provider_kind: str,
    as_json: bool,
) -> None:
    cat = load_catalog(catalog_path)
    schema = cat.get(service_name, resource_name)
    if schema is None:
        raise pipeline.UnknownResource(service_name, resource_name)
    if agent:
        provider = _provider_from_options(provider_kind, replay_dir)
        rows = [
            {
                "control_type": a.control_type.value,
                "applicable": a.applicable,
                "source": a.source.value,
                "rationale": a.rationale,
            }
            for a in resolve_applicability(schema, provider)
        ]
    else:
        decided = heuristic_applicability(schema)
        rows = []
        for ct in list_control_types():
            if ct.id in decided:
                rows.append(
                    {
                        "control_type": ct.id.value,
                        "applicable": decided[ct.id],
                        "source": "Heuristic",
                        "rationale": "capability subset check",
                    }
                )
            else:
                rows.append(
                    {
                        "control_type": ct.id.value,
                        "applicable": None,
                        "source": "Undecided",
                        "rationale": "pass --agent to consult the agent",
                    }
                )
    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    width = max(len(r["control_type"]) for r in rows)
    for r in rows:
        mark = {True: "yes", False: "no", None: "?"}[r["applicable"]]
        click.echo(f"{r['control_type']:<{width}}  {mark:<3}  {r['source']:<9}  {r['rationale']}")


@cli.group()
def prompt() -> None:
    """Prompt assembly operations."""


@prompt.command("render")
@click.argument("service_name")
@click.argument("resource_name")
@click.argument("control_type")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--exemplars", "exemplars_path", required=True, type=click.Path(exists=True))
@click.option("--snippets", "snippets_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def prompt_render(
    service_name: str,
    resource_name: str,
    control_type: str,
    catalog_path: str,
    exemplars_path: str,
    snippets_path: str,
    out_path: str | None,
    as_json: bool,
) -> None:
    cat = load_catalog(catalog_path)
    schema = cat.get(service_name, resource_name)
    if schema is None:
        raise pipeline.UnknownResource(service_name, resource_name)
    type_id = ControlTypeId.from_text(control_type)
    idx = _build_index_from(exemplars_path, snippets_path)
    query = tokenize(f"{service_name} {resource_name}")
    exemplar_hits = retrieve_exemplars(idx, type_id, query, pipeline.DEFAULT_EXEMPLAR_K)
    snippet_hits = retrieve_snippets(idx, service_name, resource_name, pipeline.DEFAULT_SNIPPET_M)
    bundle = build_prompt(
        get_control_type(type_id),
        schema,
        [idx.get_exemplar(h.id) for h in exemplar_hits],
        [idx.get_snippet(h.id) for h in snippet_hits],
    )
    if out_path:
        Path(out_path).write_text(bundle.rendered, encoding="utf-8")
    data = {"prompt_hash": bundle.prompt_hash, "chars": len(bundle.rendered), "out": out_path}
    _emit(data, as_json, f"prompt_hash {bundle.prompt_hash} ({len(bundle.rendered)} chars)")
    if not out_path and not as_json:
        click.echo(bundle.rendered)


@cli.command("generate")
@click.argument("service_name")
@click.argument("resource_name")
@click.argument("control_type")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--exemplars", "exemplars_path", required=True, type=click.Path(exists=True))
@click.option("--snippets", "snippets_path", required=True, type=click.Path(exists=True))
@click.option("--store", "store_dir", required=True, envvar="CONTROLS_STORE", type=click.Path())
@click.option("--provider", "provider_kind", type=click.Choice(["replay", "http"]), default="replay")
@click.option("--replay-dir", type=click.Path(), default=None)
@click.option("--force", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def generate_cmd(
    service_name: str,
    resource_name: str,
    control_type: str,
    catalog_path: str,
    exemplars_path: str,
    snippets_path: str,
    store_dir: str,
    provider_kind: str,
    replay_dir: str | None,
    force: bool,
    as_json: bool,
) -> None:
    cat = load_catalog(catalog_path)
    idx = _build_index_from(exemplars_path, snippets_path)
    provider = _provider_from_options(provider_kind, replay_dir)
    record_store = RecordStore(store_dir)
    record = pipeline.generate(
        cat,
        idx,
        provider,
        record_store,
        service_name,
        resource_name,
        ControlTypeId.from_text(control_type),
        force=force,
    )
    data = service.record_detail(record)
    _emit(
        data,
        as_json,
        f"{record.id} {record.status.value} prompt_hash={record.prompt_hash} "
        f"findings={len(record.findings)}",
    )


@cli.command("generate-batch")
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--exemplars", "exemplars_path", required=True, type=click.Path(exists=True))
@click.option("--snippets", "snippets_path", required=True, type=click.Path(exists=True))
@click.option("--store", "store_dir", required=True, envvar="CONTROLS_STORE", type=click.Path())
@click.option("--provider", "provider_kind", type=click.Choice(["replay", "http"]), default="replay")
@click.option("--replay-dir", type=click.Path(), default=None)
@click.option("--pair", "pair_args", multiple=True, help="service/resource; repeatable. Default: whole catalog.")
@click.option("--types", "types_arg", default=None, help="Comma-separated control type ids; default all applicable.")
@click.option("--all-applicable", "all_applicable", is_flag=True)
@click.option("--jobs", default=pipeline.DEFAULT_BATCH_JOBS, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def generate_batch_cmd(
    catalog_path: str,
    exemplars_path: str,
    snippets_path: str,
    store_dir: str,
    provider_kind: str,
    replay_dir: str | None,
    pair_args: tuple[str, ...],
    types_arg: str | None,
    all_applicable: bool,
    jobs: int,
    as_json: bool,
) -> None:
    if not all_applicable and not types_arg:
        raise click.UsageError("pass --all-applicable or --types")
    cat = load_catalog(catalog_path)
    idx = _build_index_from(exemplars_path, snippets_path)
    provider = _provider_from_options(provider_kind, replay_dir)
    record_store = RecordStore(store_dir)
    if pair_args:
        pairs = []
        for arg in pair_args:
            service_name, _, resource_name = arg.partition("/")
            if not resource_name:
                raise click.UsageError(f"--pair must be service/resource, got {arg!r}")
            pairs.append((service_name, resource_name))
    else:
        pairs = [(s.service, s.resource) for s in cat.schemas]
    control_types = (
        pipeline.ALL_APPLICABLE
        if all_applicable
        else [ControlTypeId.from_text(t.strip()) for t in (types_arg or "").split(",")]
    )
    records = pipeline.generate_batch(
        cat, idx, provider, record_store, pairs, control_types, jobs=jobs
    )
    data = [service.record_summary(r) for r in records]
    lines = [
        f"{r.id} {r.service}/{r.resource} {r.control_type.value} {r.status.value}"
        for r in records
    ]
    _emit(data, as_json, "\n".join(lines) if lines else "no records generated")


@cli.command("validate")
@click.argument("feature_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), default=None)
@click.option("--service", "service_name", default=None)
@click.option("--resource", "resource_name", default=None)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def validate_cmd(
    feature_file: str,
    catalog_path: str | None,
    service_name: str | None,
    resource_name: str | None,
    as_json: bool,
) -> None:
    """Parse a feature file; optionally prescreen it against a schema."""
    control = gherkin.parse(Path(feature_file).read_text(encoding="utf-8"))
    data: dict = {
        "rule_identifier": control.rule_identifier,
        "rule_name": control.rule_name,
        "trigger": control.trigger.value,
        "scenarios": len(control.scenarios),
    }
    human = (
        f"OK: {control.rule_identifier} ({len(control.scenarios)} scenarios, "
        f"trigger {control.trigger.value})"
    )
    if catalog_path and service_name and resource_name:
        cat = load_catalog(catalog_path)
        schema = cat.get(service_name, resource_name)
        if schema is None:
            raise pipeline.UnknownResource(service_name, resource_name)
        screen = rubric.machine_prescreen(control, schema)
        data["prescreen"] = {n: screen.get(n).value for n in ("s1", "s2", "s3", "s4")}
        human += " prescreen " + " ".join(
            f"{n}={screen.get(n).value}" for n in ("s1", "s2", "s3", "s4")
        )
    _emit(data, as_json, human)


@cli.command("score")
@click.argument("review_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def score_cmd(review_file: str, as_json: bool) -> None:
    """Final score of a complete review file ({"s1": 1, ..., "r2": 0})."""
    payload = json.loads(Path(review_file).read_text(encoding="utf-8"))
    applied = rubric.apply_human_review(rubric.RubricScore.all_unset(), payload)
    fs = rubric.final_score(applied)
    _emit({"score": fs.value, "accepted": fs.accepted}, as_json, str(fs.value))


@cli.group()
def report() -> None:
    """Aggregated review reports."""


@report.command("summary")
@click.option("--store", "store_dir", required=True, envvar="CONTROLS_STORE", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def report_summary(store_dir: str, as_json: bool) -> None:
    rows = service.summary_rows(RecordStore(store_dir))
    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    if not rows:
        click.echo("no completed reviews")
        return
    width = max(len(r["control_type"]) for r in rows)
    header = (
        f"{'Control Type':<{width}}  {'Records':>7}  {'Scenario Score':>14}  "
        f"{'Rule Score':>10}  {'Final Score':>11}  {'Mean Item Score':>15}"
    )
    click.echo(header)
    for r in rows:
        click.echo(
            f"{r['control_type']:<{width}}  {r['count']:>7}  "
            f"{r['mean_scenario_sum']:>14.2f}  {r['mean_rule_avg']:>10.2f}  "
            f"{r['table_final']:>11.2f}  {r['mean_item_final']:>15.2f}"
        )


@report.command("histogram")
@click.option("--store", "store_dir", required=True, envvar="CONTROLS_STORE", type=click.Path())
@click.option("--bin-width", default=0.5, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def report_histogram(store_dir: str, bin_width: float, as_json: bool) -> None:
    scores = service.completed_scores(RecordStore(store_dir))
    bins = rubric.histogram(scores, bin_width)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "bin_width": bin_width,
                    "bins": [{"start": s, "count": c} for s, c in bins],
                    "total": len(scores),
                }
            )
        )
        return
    for start, count in bins:
        bar = "#" * count
        click.echo(f"[{start:4.2f}, {start + bin_width:4.2f})  {count:>4}  {bar}")


@cli.command("serve")
@click.option("--store", "store_dir", required=True, envvar="CONTROLS_STORE", type=click.Path())
@click.option("--catalog", "catalog_path", required=True, type=click.Path(exists=True))
@click.option("--token", required=True, envvar="CONTROLS_API_TOKEN")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--exemplars", "exemplars_path", type=click.Path(exists=True), default=None)
@click.option("--snippets", "snippets_path", type=click.Path(exists=True), default=None)
@click.option("--provider", "provider_kind", type=click.Choice(["replay", "http"]), default="replay")
@click.option("--replay-dir", type=click.Path(), default=None)
@click.option("--ui-dir", type=click.Path(), default=None)
@domain_errors
def serve_cmd(
    store_dir: str,
    catalog_path: str,
    token: str,
    host: str,
    port: int,
    exemplars_path: str | None,
    snippets_path: str | None,
    provider_kind: str,
    replay_dir: str | None,
    ui_dir: str | None,
) -> None:
    cat = load_catalog(catalog_path)
    idx = None
    provider = None
    if exemplars_path and snippets_path:
        idx = _build_index_from(exemplars_path, snippets_path)
        if provider_kind == "http" or replay_dir:
            provider = _provider_from_options(provider_kind, replay_dir)
    service.serve(
        RecordStore(store_dir),
        cat,
        auth_token=token,
        host=host,
        port=port,
        provider=provider,
        index=idx,
        ui_dir=ui_dir,
    )


def main() -> None:
    cli(prog_name="controls")


if __name__ == "__main__":
    main()
