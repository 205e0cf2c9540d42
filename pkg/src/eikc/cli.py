"""Command-line surface: serve the HTTP API, replay scenario scripts,
query, visualize, export and import stores.

Every command is a thin client of the core package; errors exit nonzero
and print their machine code.
"""

from __future__ import annotations

import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import click

from .engine import Engine, ScriptedClock
from .errors import EikcError
from .exploitation import Exploitation, QuerySpec, ViewMode
from .model import TaskKind, format_when
from .repository import Repository
from .scenario import ScenarioRunner, parse_script
from .service.app import serve as service_serve

SCRIPTED_EPOCH = datetime(2010, 1, 1, tzinfo=timezone.utc)


def _fail(exc: EikcError) -> "click.exceptions.Exit":
    click.echo(f"error {exc.code}: {exc.message}", err=True)
    return click.exceptions.Exit(1)


@click.group()
@click.version_option()
def main():
    """Collaborative knowledge capitalization for decision problems."""


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option("--actors", "actors_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False), help="Static web UI directory to host at /")
def serve(port: int, host: str, data_dir: str, actors_file: str, ui_dir: str | None):
    """Run the HTTP service over a store."""
    try:
        service_serve(data_dir, actors_file, host=host, port=port, ui_dir=ui_dir)
    except EikcError as exc:
        raise _fail(exc)


@main.command("run-scenario")
@click.argument("script", type=str)
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option(
    "--clock",
    type=click.Choice(["system", "scripted"]),
    default="system",
    show_default=True,
    help="scripted: fixed epoch, +1s per action, for reproducible runs",
)
def run_scenario(script: str, data_dir: str, clock: str):
    """Replay a scenario script into a store and print the transcript.

    SCRIPT is a file path or the name of a bundled scenario (e.g.
    'sunseed').
    """
    text = _load_script(script)
    try:
        parsed = parse_script(text)
        with Repository(data_dir) as repository:
            engine = Engine(
                repository,
                clock=ScriptedClock(SCRIPTED_EPOCH) if clock == "scripted" else None,
            )
            transcript = ScenarioRunner(engine).run(parsed)
    except EikcError as exc:
        raise _fail(exc)
    click.echo(transcript.text(), nl=False)
    if not transcript.ok:
        raise click.exceptions.Exit(1)


def _load_script(script: str) -> str:
    path = Path(script)
    if path.exists():
        return path.read_text(encoding="utf-8")
    bundled = resources.files("eikc").joinpath("data", f"{script}.scenario")
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    click.echo(f"error ScriptNotFound: no file or bundled scenario named {script!r}", err=True)
    raise click.exceptions.Exit(1)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--terms", required=True, help="Comma-separated query terms (conjunctive)")
@click.option("--project", default=None)
@click.option("--task", default=None, type=click.Choice([t.value for t in TaskKind]))
@click.option("--year", default=None, type=int)
@click.option("--validated-only", is_flag=True, default=False)
def query(data_dir: str, terms: str, project: str | None, task: str | None, year: int | None, validated_only: bool):
    """Conjunctive term search over a store."""
    try:
        with Repository(data_dir, read_only=True) as repository:
            exploitation = Exploitation(Engine(repository))
            spec = QuerySpec.build(
                terms.split(","),
                project_id=project,
                task_kind=TaskKind(task) if task else None,
                year=year,
                validated_only=validated_only,
            )
            result = exploitation.query(spec)
    except EikcError as exc:
        raise _fail(exc)
    for hit in result.hits:
        click.echo(f"{hit.entry_id}\t{hit.thread_id}\tscore={hit.score}\t{hit.snippet}")
    click.echo(f"{len(result.hits)} hit(s) for terms {','.join(result.query.terms)}")


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--thread", "thread_id", required=True)
@click.option("--mode", required=True, type=click.Choice([m.value for m in ViewMode]))
def visualize(data_dir: str, thread_id: str, mode: str):
    """Print a thread view: who did what, when."""
    try:
        with Repository(data_dir, read_only=True) as repository:
            view = Exploitation(Engine(repository)).visualize(thread_id, ViewMode(mode))
    except EikcError as exc:
        raise _fail(exc)
    click.echo(f"thread {view.thread_id} mode={view.mode.value} state={view.state.value}")
    for item in view.items:
        click.echo(
            f"  {format_when(item.when)} {item.kind.value:<11} {item.who:<12} {item.content.what}"
        )


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--file", "file_", default="-", show_default=True, help="Output file, '-' for stdout")
@click.option("--project", default=None, help="Export a single project")
def export(data_dir: str, file_: str, project: str | None):
    """Write the portable log of a store."""
    try:
        with Repository(data_dir, read_only=True) as repository:
            text = repository.export(project)
    except EikcError as exc:
        raise _fail(exc)
    if file_ == "-":
        click.echo(text, nl=False)
    else:
        Path(file_).write_text(text, encoding="utf-8")
        click.echo(f"exported to {file_}", err=True)


@main.command("import")
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option("--file", "file_", default="-", show_default=True, help="Input file, '-' for stdin")
def import_cmd(data_dir: str, file_: str):
    """Merge a portable log into a store."""
    text = sys.stdin.read() if file_ == "-" else Path(file_).read_text(encoding="utf-8")
    try:
        with Repository(data_dir) as repository:
            counts = repository.import_log(text)
    except EikcError as exc:
        raise _fail(exc)
    click.echo(
        f"imported {counts['projects']} project(s), {counts['threads']} thread(s), "
        f"{counts['entries']} entry(ies)"
    )


if __name__ == "__main__":
    main()
