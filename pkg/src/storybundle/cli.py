"""Headless driver for the whole pipeline.

Every subcommand is a thin wrapper over the module operations; with
``--mock-fixtures`` everything runs fully offline and deterministically.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bsv as bsv_mod
from .dimensions import (
    SchemaError,
    classify_states,
    define_author_dimension,
    induce_dimensions,
    induce_values,
    suggest_dimension_names,
)
from .model import (
    BatchFormatError,
    rule_from_dict,
    serialize_batch,
    storyworld_from_dict,
    validate_storyworld,
)
from .oracle import LiveOracle, MockOracle, OracleError, load_fixtures
from .simulate import DEFAULT_PROFILES, SimulationSpec, simulate_batch
from .store import ProjectStore

PROJECT_DOC_ID = "project"

_VIEWS = {"timeline": "timeline_1d", "compact": "compact_1d", "grid": "grid_2d"}


class CliState:
    def __init__(self, project_dir: Path, fixtures: Path | None, seed: int):
        self.project_dir = project_dir
        self.seed = seed
        self.store = ProjectStore(project_dir)
        if fixtures is not None:
            self.oracle = MockOracle(load_fixtures(fixtures), strict=True)
        else:
            self.oracle = None  # created lazily so offline commands need no backend

    def get_oracle(self):
        if self.oracle is None:
            try:
                self.oracle = LiveOracle()
            except OracleError as e:
                raise click.ClickException(str(e)) from e
        return self.oracle

    def load_project(self):
        try:
            return self.store.load(PROJECT_DOC_ID)
        except KeyError:
            raise click.ClickException(
                f"no project at {self.project_dir}; run `storybundle init` first"
            )


@click.group()
@click.option(
    "--project",
    "project_dir",
    type=click.Path(path_type=Path),
    default=Path("."),
    help="Project directory (holds project.json).",
)
@click.option(
    "--mock-fixtures",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="Run fully offline against a fixture directory.",
)
@click.option("--seed", type=int, default=0, help="Seed threaded into oracle sampling.")
@click.pass_context
def main(ctx, project_dir: Path, mock_fixtures: Path | None, seed: int):
    """Authoring pipeline for LLM-driven interactive narratives."""
    ctx.obj = CliState(project_dir, mock_fixtures, seed)


def _print_warnings(warnings: list[str]) -> None:
    for w in warnings:
        click.echo(f"warning: {w}", err=True)


@main.command()
@click.option("--storyworld", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--rules", type=click.Path(exists=True, path_type=Path), default=None)
@click.pass_obj
def init(state: CliState, storyworld: Path | None, rules: Path | None):
    """Scaffold a new project, optionally seeding storyworld and rules."""
    try:
        project = state.store.create(PROJECT_DOC_ID)
    except FileExistsError as e:
        raise click.ClickException(str(e)) from e
    if storyworld is not None:
        sw = storyworld_from_dict(json.loads(storyworld.read_text()))
        errors = validate_storyworld(sw)
        if errors:
            raise click.ClickException("invalid storyworld: " + "; ".join(errors))
        project.storyworld = sw
    if rules is not None:
        project.rules = [rule_from_dict(r) for r in json.loads(rules.read_text())]
    state.store.save(project)
    click.echo(f"initialized project in {state.project_dir}")


@main.command()
@click.option("--rounds", type=int, default=5, show_default=True)
@click.option("--count", type=int, default=3, show_default=True)
@click.option("--profiles", default=",".join(DEFAULT_PROFILES), show_default=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), default=None,
              help="Also write the batch file here.")
@click.pass_obj
def simulate(state: CliState, rounds: int, count: int, profiles: str, out_file: Path | None):
    """Generate a batch of simulated playthroughs and append it to the project."""
    project = state.load_project()
    if project.storyworld is None:
        raise click.ClickException("project has no storyworld")
    spec = SimulationSpec(
        storyworld=project.storyworld,
        rules=list(project.rules),
        profiles=[p for p in profiles.split(",") if p],
        playthroughs_per_request=count,
        rounds_per_playthrough=rounds,
        seed=state.seed,
    )
    oracle = state.get_oracle()
    try:
        spec.validate()
        batch, warnings = simulate_batch(spec, oracle, batch_id=project.next_batch_id())
        _, classify_warnings = state.store.add_batch(project, batch, oracle)
    except (ValueError, OracleError) as e:
        raise click.ClickException(str(e)) from e
    _print_warnings(warnings + classify_warnings)
    if out_file is not None:
        out_file.write_bytes(serialize_batch(batch))
    click.echo(f"batch {batch.batch_id}: {len(batch.storylines)} storylines, t_max={batch.t_max}")


@main.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def upload(state: CliState, file: Path):
    """Upload a playthrough batch file; existing dimensions are re-classified."""
    project = state.load_project()
    try:
        batch_id, warnings = state.store.upload_batch(
            project, file.read_bytes(), state.get_oracle()
        )
    except BatchFormatError as e:
        raise click.ClickException(str(e)) from e
    _print_warnings(warnings)
    click.echo(f"uploaded batch {batch_id}")


@main.group()
def dimensions():
    """Create narrative dimensions (author, data-derived, or mixed)."""


@dimensions.command()
@click.option("-k", type=int, default=3, show_default=True)
@click.pass_obj
def induce(state: CliState, k: int):
    """Derive k dimensions from the latest batch."""
    project = state.load_project()
    batch = project.latest_batch
    if batch is None:
        raise click.ClickException("project has no batches")
    oracle = state.get_oracle()
    try:
        result = induce_dimensions(batch, k, oracle)
    except (ValueError, SchemaError, OracleError) as e:
        raise click.ClickException(str(e)) from e
    for dim in result.dimensions:
        state.store.add_dimension(
            project, dim, oracle, assignments={batch.batch_id: result.assignments[dim.id]}
        )
    _print_warnings(result.warnings)
    for dim in result.dimensions:
        click.echo(f"{dim.name}: {', '.join(dim.values)}")


@dimensions.command()
@click.option("--name", required=True)
@click.option("--description", default="")
@click.option("--values", required=True, help="Comma-separated value tokens.")
@click.pass_obj
def define(state: CliState, name: str, description: str, values: str):
    """Define an author dimension and classify existing batches."""
    project = state.load_project()
    try:
        dim = define_author_dimension(name, description, [v for v in values.split(",") if v])
        warnings = state.store.add_dimension(project, dim, state.get_oracle())
    except (SchemaError, ValueError, OracleError) as e:
        raise click.ClickException(str(e)) from e
    _print_warnings(warnings)
    click.echo(f"{dim.name}: {', '.join(dim.values)}")


@dimensions.command()
@click.option("--name", required=True)
@click.option("--description", default="")
@click.pass_obj
def values_from_data(state: CliState, name: str, description: str):
    """Mixed extraction: author names the dimension, data provides the values."""
    project = state.load_project()
    batch = project.latest_batch
    if batch is None:
        raise click.ClickException("project has no batches")
    oracle = state.get_oracle()
    try:
        result = induce_values(batch, name, description, oracle)
    except (ValueError, SchemaError, OracleError) as e:
        raise click.ClickException(str(e)) from e
    _print_warnings(result.warnings)
    if not result.dimensions:
        raise click.ClickException(f"no usable value schema for {name!r}")
    dim = result.dimensions[0]
    state.store.add_dimension(
        project, dim, oracle, assignments={batch.batch_id: result.assignments[dim.id]}
    )
    click.echo(f"{dim.name}: {', '.join(dim.values)}")


@dimensions.command()
@click.option("-k", type=int, default=3, show_default=True)
@click.pass_obj
def suggest(state: CliState, k: int):
    """Mixed extraction: data names dimensions, the author defines values later."""
    project = state.load_project()
    batch = project.latest_batch
    if batch is None:
        raise click.ClickException("project has no batches")
    try:
        pairs, warnings = suggest_dimension_names(batch, k, state.get_oracle())
    except (ValueError, SchemaError, OracleError) as e:
        raise click.ClickException(str(e)) from e
    _print_warnings(warnings)
    for name, description in pairs:
        click.echo(f"{name}: {description}")


@main.command()
@click.option("--dim", "dim_name", required=True)
@click.option("--batch", "batch_id", type=int, default=None)
@click.pass_obj
def classify(state: CliState, dim_name: str, batch_id: int | None):
    """(Re-)classify a batch under an existing dimension."""
    project = state.load_project()
    try:
        dim = project.dimension(dim_name)
    except KeyError:
        raise click.ClickException(f"unknown dimension {dim_name!r}")
    if batch_id is None:
        if project.latest_batch is None:
            raise click.ClickException("project has no batches")
        batch_id = project.latest_batch.batch_id
    try:
        batch = project.batch(batch_id)
    except KeyError as e:
        raise click.ClickException(str(e)) from e
    warnings: list[str] = []
    asg = classify_states(batch, dim, state.get_oracle(), warnings=warnings)
    project.set_assignment(asg)
    state.store.save(project)
    _print_warnings(warnings)
    counts: dict[str, int] = {}
    for v in asg.values.values():
        counts[v] = counts.get(v, 0) + 1
    click.echo(", ".join(f"{v}={counts[v]}" for v in sorted(counts)))


@main.command()
@click.option("--dims", required=True, help="1 or 2 comma-separated dimension names.")
@click.option("--view", type=click.Choice(sorted(_VIEWS)), default="timeline", show_default=True)
@click.option("--out", "out_format", type=click.Choice(["json", "dot"]), default="json",
              show_default=True)
@click.option("--batch", "batch_id", type=int, default=None)
@click.option("--compare", is_flag=True, help="Attach the previous batch as an overlay.")
@click.pass_obj
def bsv(state: CliState, dims: str, view: str, out_format: str, batch_id: int | None,
        compare: bool):
    """Build a bundled storyline graph and print it as JSON or DOT."""
    project = state.load_project()
    dimension_ids = [d for d in dims.split(",") if d]
    if batch_id is None:
        if project.latest_batch is None:
            raise click.ClickException("project has no batches")
        batch_id = project.latest_batch.batch_id
    try:
        graph = state.store.graph(project, dimension_ids, batch_id, _VIEWS[view], compare=compare)
    except (KeyError, ValueError) as e:
        raise click.ClickException(str(e)) from e
    if out_format == "dot":
        click.echo(bsv_mod.graph_to_dot(graph), nl=False)
    else:
        click.echo(json.dumps(bsv_mod.graph_to_dict(graph), indent=2))


@main.command("diff-batches")
@click.option("--dim", "dim_name", required=True)
@click.option("--from", "from_batch", type=int, required=True)
@click.option("--to", "to_batch", type=int, required=True)
@click.pass_obj
def diff_batches(state: CliState, dim_name: str, from_batch: int, to_batch: int):
    """Structural diff of one dimension's timeline graph between two batches."""
    project = state.load_project()
    try:
        g_from = state.store.graph(project, [dim_name], from_batch, "timeline_1d")
        g_to = state.store.graph(project, [dim_name], to_batch, "timeline_1d")
    except (KeyError, ValueError) as e:
        raise click.ClickException(str(e)) from e
    nodes_from = {n.id: n.count for n in g_from.nodes}
    nodes_to = {n.id: n.count for n in g_to.nodes}
    edges_from = {(e.from_id, e.to_id): e.multiplicity for e in g_from.edges}
    edges_to = {(e.from_id, e.to_id): e.multiplicity for e in g_to.edges}
    for nid in sorted(set(nodes_to) - set(nodes_from)):
        click.echo(f"+ node {nid} (n={nodes_to[nid]})")
    for nid in sorted(set(nodes_from) - set(nodes_to)):
        click.echo(f"- node {nid} (n={nodes_from[nid]})")
    for nid in sorted(set(nodes_from) & set(nodes_to)):
        if nodes_from[nid] != nodes_to[nid]:
            click.echo(f"~ node {nid} (n={nodes_from[nid]} -> n={nodes_to[nid]})")
    for eid in sorted(set(edges_to) - set(edges_from)):
        click.echo(f"+ edge {eid[0]} -> {eid[1]} (x{edges_to[eid]})")
    for eid in sorted(set(edges_from) - set(edges_to)):
        click.echo(f"- edge {eid[0]} -> {eid[1]} (x{edges_from[eid]})")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(state: CliState, port: int, host: str):
    """Run the REST service for this project store."""
    import uvicorn

    from .service import create_app

    oracle = state.oracle if state.oracle is not None else state.get_oracle()
    app = create_app(state.store, oracle)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
