"""File-based project storage and the mutations the service exposes.

A project is a single JSON document on disk, replaced atomically on every
write. Batches are append-only; graphs are never persisted, they are pure
derivations cached in memory keyed by (batch, dimensions, schema, view).
One writer at a time per store instance; reads are side-effect free.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import bsv
from .dimensions import classify_states
from .model import (
    Dimension,
    DimensionAssignment,
    PlaythroughBatch,
    Rule,
    Storyworld,
    assignment_from_dict,
    assignment_to_dict,
    batch_from_dict,
    batch_to_dict,
    check_value_schema,
    dimension_from_dict,
    dimension_to_dict,
    parse_batch,
    rule_from_dict,
    rule_to_dict,
    storyworld_from_dict,
    storyworld_to_dict,
)
from .oracle import Oracle

__all__ = ["Panel", "Project", "ProjectStore"]


@dataclass
class Panel:
    panel_id: str
    dimension_ids: list[str]  # 1 or 2
    view: str  # timeline_1d | compact_1d | grid_2d
    position: dict = field(default_factory=lambda: {"x": 0, "y": 0})
    comparison: bool = False

    def to_dict(self) -> dict:
        return {
            "panel_id": self.panel_id,
            "dimension_ids": list(self.dimension_ids),
            "view": self.view,
            "position": dict(self.position),
            "comparison": self.comparison,
        }

    @staticmethod
    def from_dict(doc: dict) -> "Panel":
        return Panel(
            panel_id=doc["panel_id"],
            dimension_ids=list(doc["dimension_ids"]),
            view=doc["view"],
            position=dict(doc.get("position", {"x": 0, "y": 0})),
            comparison=bool(doc.get("comparison", False)),
        )


@dataclass
class Project:
    project_id: str
    storyworld: Storyworld | None = None
    rules: list[Rule] = field(default_factory=list)
    dimensions: list[Dimension] = field(default_factory=list)
    batches: list[PlaythroughBatch] = field(default_factory=list)
    assignments: list[DimensionAssignment] = field(default_factory=list)
    panels: list[Panel] = field(default_factory=list)

    @property
    def latest_batch(self) -> PlaythroughBatch | None:
        return self.batches[-1] if self.batches else None

    def next_batch_id(self) -> int:
        return self.batches[-1].batch_id + 1 if self.batches else 1

    def batch(self, batch_id: int) -> PlaythroughBatch:
        for b in self.batches:
            if b.batch_id == batch_id:
                return b
        raise KeyError(f"unknown batch id: {batch_id}")

    def dimension(self, dimension_id: str) -> Dimension:
        for d in self.dimensions:
            if d.id == dimension_id:
                return d
        raise KeyError(f"unknown dimension: {dimension_id!r}")

    def panel(self, panel_id: str) -> Panel:
        for p in self.panels:
            if p.panel_id == panel_id:
                return p
        raise KeyError(f"unknown panel: {panel_id!r}")

    def assignment(self, dimension_id: str, batch_id: int) -> DimensionAssignment:
        for a in self.assignments:
            if a.dimension_id == dimension_id and a.batch_id == batch_id:
                return a
        raise KeyError(f"no assignment for dimension {dimension_id!r} on batch {batch_id}")

    def set_assignment(self, asg: DimensionAssignment) -> None:
        self.assignments = [
            a
            for a in self.assignments
            if not (a.dimension_id == asg.dimension_id and a.batch_id == asg.batch_id)
        ]
        self.assignments.append(asg)

    def to_dict(self) -> dict:
        batches = []
        for b in self.batches:
            doc = batch_to_dict(b)
            doc["batch_id"] = b.batch_id
            # Summaries are an oracle-produced cache worth keeping across loads.
            doc["summaries"] = {s.id: [st.summary for st in s.states] for s in b.storylines}
            batches.append(doc)
        return {
            "project_id": self.project_id,
            "storyworld": storyworld_to_dict(self.storyworld) if self.storyworld else None,
            "rules": [rule_to_dict(r) for r in self.rules],
            "dimensions": [dimension_to_dict(d) for d in self.dimensions],
            "batches": batches,
            "assignments": [assignment_to_dict(a) for a in self.assignments],
            "panels": [p.to_dict() for p in self.panels],
        }

    @staticmethod
    def from_dict(doc: dict) -> "Project":
        batches = []
        for bdoc in doc.get("batches", []):
            batch = batch_from_dict(bdoc, batch_id=bdoc["batch_id"])
            for storyline in batch.storylines:
                cached = bdoc.get("summaries", {}).get(storyline.id)
                if cached:
                    for state, summary in zip(storyline.states, cached):
                        state.summary = summary
            batches.append(batch)
        sw = doc.get("storyworld")
        return Project(
            project_id=doc["project_id"],
            storyworld=storyworld_from_dict(sw) if sw else None,
            rules=[rule_from_dict(r) for r in doc.get("rules", [])],
            dimensions=[dimension_from_dict(d) for d in doc.get("dimensions", [])],
            batches=batches,
            assignments=[assignment_from_dict(a) for a in doc.get("assignments", [])],
            panels=[Panel.from_dict(p) for p in doc.get("panels", [])],
        )


class ProjectStore:
    """Directory of project documents with single-writer transactions."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._graph_cache: dict[tuple, bsv.BsvGraph] = {}

    def _path(self, project_id: str) -> Path:
        return self.root / f"{project_id}.json"

    def create(self, project_id: str | None = None) -> Project:
        with self._lock:
            project_id = project_id or uuid.uuid4().hex[:8]
            if self._path(project_id).exists():
                raise FileExistsError(f"project {project_id!r} already exists")
            project = Project(project_id=project_id)
            self.save(project)
            return project

    def load(self, project_id: str) -> Project:
        path = self._path(project_id)
        if not path.exists():
            raise KeyError(f"unknown project: {project_id!r}")
        return Project.from_dict(json.loads(path.read_text()))

    def save(self, project: Project) -> None:
        with self._lock:
            path = self._path(project.project_id)
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(project.to_dict(), indent=2, ensure_ascii=False))
            os.replace(tmp, path)

    def list_projects(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    # -- mutations ---------------------------------------------------------

    def upload_batch(
        self, project: Project, data: bytes, oracle: Oracle
    ) -> tuple[int, list[str]]:
        """Append an uploaded batch and re-classify every existing dimension.

        Prior batches' assignments are retained for comparison; canvas panels
        are untouched. Parse failures leave the project unchanged.
        """
        with self._lock:
            batch = parse_batch(data, batch_id=project.next_batch_id())
            warnings: list[str] = []
            new_assignments = [
                classify_states(batch, dim, oracle, warnings=warnings)
                for dim in project.dimensions
            ]
            project.batches.append(batch)
            for asg in new_assignments:
                project.set_assignment(asg)
            self.save(project)
            return batch.batch_id, warnings

    def add_batch(
        self, project: Project, batch: PlaythroughBatch, oracle: Oracle
    ) -> tuple[int, list[str]]:
        """Append an in-memory batch (e.g. from simulation) like an upload."""
        with self._lock:
            if batch.batch_id != project.next_batch_id():
                raise ValueError(
                    f"batch id {batch.batch_id} is not the next id {project.next_batch_id()}"
                )
            warnings: list[str] = []
            for dim in project.dimensions:
                project.set_assignment(
                    classify_states(batch, dim, oracle, warnings=warnings)
                )
            project.batches.append(batch)
            self.save(project)
            return batch.batch_id, warnings

    def add_dimension(
        self,
        project: Project,
        dim: Dimension,
        oracle: Oracle,
        assignments: dict[int, DimensionAssignment] | None = None,
    ) -> list[str]:
        """Register a dimension and classify every existing batch under it."""
        with self._lock:
            if any(d.name == dim.name for d in project.dimensions):
                raise ValueError(f"dimension name {dim.name!r} already used in project")
            warnings: list[str] = []
            project.dimensions.append(dim)
            for batch in project.batches:
                if assignments and batch.batch_id in assignments:
                    project.set_assignment(assignments[batch.batch_id])
                else:
                    project.set_assignment(
                        classify_states(batch, dim, oracle, warnings=warnings)
                    )
            self.save(project)
            return warnings

    def edit_value_schema(
        self, project: Project, dimension_id: str, new_values: list[str], oracle: Oracle
    ) -> tuple[Dimension, list[str]]:
        """Replace a dimension's value schema and re-classify all batches."""
        with self._lock:
            old = project.dimension(dimension_id)
            check_value_schema(new_values)
            new = Dimension(
                id=old.id,
                name=old.name,
                description=old.description,
                values=tuple(new_values),
                origin=old.origin,
            )
            project.dimensions = [new if d.id == old.id else d for d in project.dimensions]
            warnings: list[str] = []
            for batch in project.batches:
                project.set_assignment(classify_states(batch, new, oracle, warnings=warnings))
            self.save(project)
            return new, warnings

    def add_panel(
        self, project: Project, dimension_ids: list[str], view: str, position: dict | None = None
    ) -> Panel:
        with self._lock:
            if not 1 <= len(dimension_ids) <= 2:
                raise ValueError("a panel covers 1 or 2 dimensions")
            for did in dimension_ids:
                project.dimension(did)  # raises on unknown ids
            panel = Panel(
                panel_id=f"p{len(project.panels) + 1}_{uuid.uuid4().hex[:6]}",
                dimension_ids=list(dimension_ids),
                view=view,
                position=position or {"x": 0, "y": 0},
            )
            project.panels.append(panel)
            self.save(project)
            return panel

    def combine_panels(self, project: Project, panel_a: str, panel_b: str) -> Panel:
        """Stack two 1D panels into a new 2D panel; sources are preserved."""
        with self._lock:
            a = project.panel(panel_a)
            b = project.panel(panel_b)
            if len(a.dimension_ids) != 1 or len(b.dimension_ids) != 1:
                raise ValueError("only two 1D panels can be combined (2-dimension cap)")
            if a.dimension_ids[0] == b.dimension_ids[0]:
                raise ValueError("cannot combine a dimension with itself")
            return self.add_panel(
                project,
                [a.dimension_ids[0], b.dimension_ids[0]],
                "grid_2d",
                position=dict(b.position),
            )

    # -- derivations -------------------------------------------------------

    def graph(
        self,
        project: Project,
        dimension_ids: list[str],
        batch_id: int,
        view: str,
        compare: bool = False,
    ) -> bsv.BsvGraph:
        dims = tuple(project.dimension(d) for d in dimension_ids)
        batch = project.batch(batch_id)
        key = (
            project.project_id,
            batch_id,
            tuple(dimension_ids),
            tuple(d.schema_hash() for d in dims),
            view,
            compare,
        )
        cached = self._graph_cache.get(key)
        if cached is not None:
            return cached
        asgs = tuple(project.assignment(d.id, batch_id) for d in dims)
        graph = bsv.build_graph(batch, dims, asgs, view)
        if compare and batch_id > 1:
            try:
                prev_batch = project.batch(batch_id - 1)
                prev_asgs = tuple(project.assignment(d.id, batch_id - 1) for d in dims)
                graph = bsv.compare_batches(graph, prev_batch, dims, prev_asgs)
            except KeyError:
                pass  # no previous assignments: overlay silently absent
        self._graph_cache[key] = graph
        return graph
