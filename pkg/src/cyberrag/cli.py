"""Command-line entry points: ingest, analyze, serve, eval, perturb."""

from __future__ import annotations

import json
import sys

import click

from .config import bundled_fixture, load_config
from .errors import CyberRagError
from .evaluation import (
    PERTURB_OPS,
    load_dataset,
    perturb,
    run_ablation,
    run_robustness,
)
from .knowledge import StoreRegistry
from .orchestrator import Orchestrator
from .payload import PayloadRecord
from .reporting import build_attack_representation, render_report
from .storage import ReportStore, StoredReport


def _build_engine(config):
    """Wire an orchestrator from a ServiceConfig, ingesting the KB."""
    embedder = config.make_embedder()
    llm = config.make_llm()
    stores = StoreRegistry(dimension=config.embed_dimension)
    stores.ingest(config.kb_root, embedder)
    return Orchestrator(config.classifier_bindings, stores, embedder, llm), embedder, llm


@click.group()
def main():
    """CyberRAG: agentic RAG triage for web-attack payloads."""


@main.command()
@click.option("--kb", "kb_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def ingest(kb_root, config_path):
    """Chunk and embed every document under a knowledge-base directory."""
    config = load_config(config_path)
    embedder = config.make_embedder()
    stores = StoreRegistry(dimension=config.embed_dimension)
    report = stores.ingest(kb_root, embedder)
    click.echo(report.to_json())


@main.command()
@click.option("--payload", "payload_text", default=None, help="Payload given inline.")
@click.option("--file", "payload_file", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True, help="Emit the JSON report instead of Markdown.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def analyze(payload_text, payload_file, as_json, config_path):
    """Run the full triage pipeline on one payload and print the report."""
    if (payload_text is None) == (payload_file is None):
        raise click.UsageError("give exactly one of --payload or --file")
    if payload_file is not None:
        with open(payload_file, encoding="utf-8") as fh:
            payload_text = fh.read()
    if not payload_text.strip():
        raise click.UsageError("payload is empty")

    config = load_config(config_path)
    try:
        orchestrator, _, llm = _build_engine(config)
        record = PayloadRecord.create("cli", payload_text)
        verdict = orchestrator.analyze(record, config.orchestrator)
        rep = build_attack_representation(verdict, record)
        _, rendered = render_report(rep, "cli", mode="json" if as_json else "markdown")
    except CyberRagError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(rendered)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--static", "static_root", type=click.Path(exists=True, file_okay=False), default=None)
def serve(config_path, static_root):
    """Start the HTTP service."""
    import uvicorn

    from .config import host_port
    from .service import create_app

    config = load_config(config_path)
    app = create_app(config, static_root=static_root)
    host, port = host_port(config.listen_addr)
    uvicorn.run(app, host=host, port=port)


@main.command(name="eval")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--ablation", is_flag=True, help="Score reports with and without retrieval.")
@click.option("--robustness", is_flag=True, help="Per-tag classification breakdown.")
@click.option(
    "--references",
    "references_path",
    type=click.Path(exists=True),
    default=None,
    help="JSON map payload -> reference report text (ablation only).",
)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def eval_cmd(dataset_path, ablation, robustness, references_path, config_path):
    """Evaluate the pipeline on a labeled JSONL dataset."""
    config = load_config(config_path)
    dataset = load_dataset(dataset_path)
    try:
        orchestrator, embedder, _ = _build_engine(config)

        if ablation:
            if references_path is None:
                references_path = str(bundled_fixture("ablation_refs.json"))
            with open(references_path, encoding="utf-8") as fh:
                references = json.load(fh)
            report = run_ablation(
                dataset, references, orchestrator, embedder, config.orchestrator,
                judge_endpoint=config.make_judge(),
            )
            click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))
            return

        result = run_robustness(dataset, orchestrator, config.orchestrator)
    except CyberRagError as exc:
        raise click.ClickException(str(exc)) from exc

    out = {"overall_pct": result["overall_pct"]}
    if robustness:
        out["per_tag_pct"] = result["per_tag_pct"]
    click.echo(json.dumps(out, indent=2, sort_keys=True))


@main.command(name="perturb")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--ops", required=True, help="Comma-separated operator names.")
@click.option("--seed", required=True, type=int)
def perturb_cmd(dataset_path, ops, seed):
    """Emit a perturbed copy of a dataset as JSONL on stdout."""
    op_names = [o.strip() for o in ops.split(",") if o.strip()]
    unknown = [o for o in op_names if o not in PERTURB_OPS]
    if unknown:
        raise click.UsageError(
            f"unknown ops {unknown}; available: {', '.join(sorted(PERTURB_OPS))}"
        )
    dataset = load_dataset(dataset_path)
    for i, item in enumerate(dataset):
        mutated = perturb(item.payload, op_names, seed + i)
        sys.stdout.write(
            json.dumps({"payload": mutated, "label": item.label.value, "tag": "adversarial"}) + "\n"
        )


if __name__ == "__main__":
    main()
