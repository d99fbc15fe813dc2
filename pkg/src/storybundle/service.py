"""REST service consumed by the CLI and the canvas UI.

All request and response bodies use the canonical serializations from the
model module; the service itself holds no graph logic beyond delegating to
the engine. Long-running operations (simulate, dimension extraction) return
a job id to poll.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Request, Response

from . import bsv
from .dimensions import (
    SchemaError,
    define_author_dimension,
    induce_dimensions,
    induce_values,
    suggest_dimension_names,
)
from .jobs import JobRegistry
from .model import (
    BatchFormatError,
    PlaythroughBatch,
    Rule,
    batch_to_dict,
    dimension_to_dict,
    rule_from_dict,
    rule_to_dict,
    storyworld_from_dict,
    storyworld_to_dict,
    validate_storyworld,
)
from .oracle import Oracle
from .runtime import (
    Session,
    TurnOrderError,
    finalize_round,
    gm_turn,
    player_turn,
    session_rounds,
    start_session,
)
from .simulate import DEFAULT_PROFILES, SimulationSpec, simulate_batch
from .store import ProjectStore

__all__ = ["create_app"]


def _highlight_to_dict(h: bsv.HighlightSet) -> dict:
    return {
        "provenance": h.provenance,
        "states": [
            {"storyline_id": sid, "timestep": t} for sid, t in sorted(h.states)
        ],
    }


def create_app(
    store: ProjectStore, oracle: Oracle, synchronous_jobs: bool = False
) -> FastAPI:
    app = FastAPI(title="storybundle")
    jobs = JobRegistry(synchronous=synchronous_jobs)
    sessions: dict[tuple[str, str], Session] = {}

    def project_or_404(project_id: str):
        try:
            return store.load(project_id)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e

    def bad_request(e: Exception):
        return HTTPException(status_code=400, detail=str(e))

    # -- projects ----------------------------------------------------------

    @app.post("/projects")
    async def create_project(request: Request):
        body = await request.json() if await request.body() else {}
        project = store.create(body.get("project_id") if isinstance(body, dict) else None)
        return {"project_id": project.project_id}

    @app.get("/projects")
    def list_projects():
        return {"projects": store.list_projects()}

    @app.get("/projects/{project_id}/storyworld")
    def get_storyworld(project_id: str):
        project = project_or_404(project_id)
        return storyworld_to_dict(project.storyworld) if project.storyworld else {}

    @app.put("/projects/{project_id}/storyworld")
    async def put_storyworld(project_id: str, request: Request):
        project = project_or_404(project_id)
        sw = storyworld_from_dict(await request.json())
        errors = validate_storyworld(sw)
        if errors:
            raise HTTPException(status_code=400, detail={"violations": errors})
        project.storyworld = sw
        store.save(project)
        return storyworld_to_dict(sw)

    # -- rules -------------------------------------------------------------

    @app.get("/projects/{project_id}/rules")
    def list_rules(project_id: str):
        return {"rules": [rule_to_dict(r) for r in project_or_404(project_id).rules]}

    @app.post("/projects/{project_id}/rules")
    async def add_rule(project_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        body.setdefault("id", f"r{len(project.rules) + 1}")
        rule = rule_from_dict(body)
        if not rule.condition.strip() or not rule.effect.strip():
            raise bad_request(ValueError("condition and effect must be nonempty"))
        if any(r.id == rule.id for r in project.rules):
            raise bad_request(ValueError(f"rule id {rule.id!r} already exists"))
        project.rules.append(rule)
        store.save(project)
        return rule_to_dict(rule)

    @app.put("/projects/{project_id}/rules/{rule_id}")
    async def update_rule(project_id: str, rule_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        body["id"] = rule_id
        rule = rule_from_dict(body)
        if not any(r.id == rule_id for r in project.rules):
            raise HTTPException(status_code=404, detail=f"unknown rule {rule_id!r}")
        project.rules = [rule if r.id == rule_id else r for r in project.rules]
        store.save(project)
        return rule_to_dict(rule)

    @app.delete("/projects/{project_id}/rules/{rule_id}")
    def delete_rule(project_id: str, rule_id: str):
        project = project_or_404(project_id)
        if not any(r.id == rule_id for r in project.rules):
            raise HTTPException(status_code=404, detail=f"unknown rule {rule_id!r}")
        project.rules = [r for r in project.rules if r.id != rule_id]
        store.save(project)
        return {"deleted": rule_id}

    # -- batches -----------------------------------------------------------

    @app.get("/projects/{project_id}/batches")
    def list_batches(project_id: str):
        project = project_or_404(project_id)
        return {
            "batches": [
                {
                    "batch_id": b.batch_id,
                    "t_max": b.t_max,
                    "storylines": [
                        {
                            "id": s.id,
                            "display_color": s.display_color,
                            "player_profile": s.player_profile,
                            "length": len(s),
                        }
                        for s in b.storylines
                    ],
                }
                for b in project.batches
            ]
        }

    @app.get("/projects/{project_id}/batches/{batch_id}")
    def get_batch(project_id: str, batch_id: int):
        project = project_or_404(project_id)
        try:
            batch = project.batch(batch_id)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        doc = batch_to_dict(batch)
        doc["batch_id"] = batch.batch_id
        doc["summaries"] = {s.id: [st.summary for st in s.states] for s in batch.storylines}
        return doc

    @app.post("/projects/{project_id}/batches")
    async def upload_batch(project_id: str, request: Request):
        project = project_or_404(project_id)
        data = await request.body()
        try:
            batch_id, warnings = store.upload_batch(project, data, oracle)
        except BatchFormatError as e:
            raise bad_request(e) from e
        return {"batch_id": batch_id, "warnings": warnings}

    @app.post("/projects/{project_id}/simulate")
    async def simulate(project_id: str, request: Request):
        project = project_or_404(project_id)
        if project.storyworld is None:
            raise bad_request(ValueError("project has no storyworld"))
        body = await request.json() if await request.body() else {}
        spec = SimulationSpec(
            storyworld=project.storyworld,
            rules=list(project.rules),
            profiles=list(body.get("profiles", DEFAULT_PROFILES)),
            playthroughs_per_request=int(body.get("playthroughs_per_request", 3)),
            rounds_per_playthrough=int(body.get("rounds_per_playthrough", 5)),
            seed=int(body.get("seed", 0)),
        )
        try:
            spec.validate()
        except ValueError as e:
            raise bad_request(e) from e

        def run():
            fresh = store.load(project_id)
            batch, warnings = simulate_batch(spec, oracle, batch_id=fresh.next_batch_id())
            batch_id, classify_warnings = store.add_batch(fresh, batch, oracle)
            return {"batch_id": batch_id, "warnings": warnings + classify_warnings}

        return {"job_id": jobs.submit("simulate", run).job_id}

    # -- dimensions --------------------------------------------------------

    @app.get("/projects/{project_id}/dimensions")
    def list_dimensions(project_id: str):
        project = project_or_404(project_id)
        return {"dimensions": [dimension_to_dict(d) for d in project.dimensions]}

    @app.post("/projects/{project_id}/dimensions")
    async def extract_dimensions(project_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        mode = body.get("mode", "author")

        def run():
            fresh = store.load(project_id)
            if mode == "author":
                dim = define_author_dimension(
                    body["name"], body.get("description", ""), body["values"]
                )
                warnings = store.add_dimension(fresh, dim, oracle)
                return {"dimensions": [dimension_to_dict(dim)], "warnings": warnings}
            if mode == "mixed_names_from_data":
                batch = fresh.latest_batch
                if batch is None:
                    raise ValueError("project has no batches")
                pairs, warnings = suggest_dimension_names(batch, int(body.get("k", 3)), oracle)
                return {
                    "suggestions": [{"name": n, "description": d} for n, d in pairs],
                    "warnings": warnings,
                }
            batch = fresh.latest_batch
            if batch is None:
                raise ValueError("project has no batches")
            if mode == "data_derived":
                result = induce_dimensions(batch, int(body.get("k", 3)), oracle)
            elif mode == "mixed_values_from_data":
                result = induce_values(
                    batch, body["name"], body.get("description", ""), oracle
                )
            else:
                raise ValueError(f"unknown extraction mode {mode!r}")
            warnings = list(result.warnings)
            for dim in result.dimensions:
                warnings += store.add_dimension(
                    fresh, dim, oracle, assignments={batch.batch_id: result.assignments[dim.id]}
                )
            return {
                "dimensions": [dimension_to_dict(d) for d in result.dimensions],
                "warnings": warnings,
            }

        return {"job_id": jobs.submit("dimensions", run).job_id}

    @app.put("/projects/{project_id}/dimensions/{dimension_id}/values")
    async def edit_schema(project_id: str, dimension_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        try:
            dim, warnings = store.edit_value_schema(
                project, dimension_id, body["values"], oracle
            )
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except (ValueError, SchemaError) as e:
            raise bad_request(e) from e
        return {"dimension": dimension_to_dict(dim), "warnings": warnings}

    @app.get("/projects/{project_id}/assignments")
    def get_assignment(project_id: str, dim: str, batch: int):
        project = project_or_404(project_id)
        try:
            asg = project.assignment(dim, batch)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        from .model import assignment_to_dict

        return assignment_to_dict(asg)

    # -- graphs ------------------------------------------------------------

    def graph_for_query(project, dims: str, batch: int | None, view: str, compare: bool):
        dimension_ids = [d for d in dims.split(",") if d]
        if batch is None:
            if project.latest_batch is None:
                raise HTTPException(status_code=400, detail="project has no batches")
            batch = project.latest_batch.batch_id
        try:
            return store.graph(project, dimension_ids, batch, view, compare=compare)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except ValueError as e:
            raise bad_request(e) from e

    @app.get("/projects/{project_id}/bsv")
    def get_bsv(
        project_id: str,
        dims: str,
        batch: int | None = None,
        view: str = "timeline_1d",
        compare: bool = False,
    ):
        project = project_or_404(project_id)
        graph = graph_for_query(project, dims, batch, view, compare)
        doc = bsv.graph_to_dict(graph)
        doc["dimensions"] = [
            dimension_to_dict(project.dimension(d)) for d in graph.dimension_ids
        ]
        doc["storyline_colors"] = {
            s.id: s.display_color for s in project.batch(graph.batch_id).storylines
        }
        return doc

    @app.get("/projects/{project_id}/bsv/export.dot")
    def export_dot(
        project_id: str, dims: str, batch: int | None = None, view: str = "timeline_1d"
    ):
        project = project_or_404(project_id)
        graph = graph_for_query(project, dims, batch, view, compare=False)
        return Response(content=bsv.graph_to_dot(graph), media_type="text/vnd.graphviz")

    # -- panels ------------------------------------------------------------

    @app.get("/projects/{project_id}/panels")
    def list_panels(project_id: str):
        return {"panels": [p.to_dict() for p in project_or_404(project_id).panels]}

    @app.post("/projects/{project_id}/panels")
    async def add_panel(project_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        try:
            panel = store.add_panel(
                project,
                body["dimension_ids"],
                body.get("view", "timeline_1d"),
                position=body.get("position"),
            )
        except (KeyError, ValueError) as e:
            raise bad_request(e) from e
        return panel.to_dict()

    @app.put("/projects/{project_id}/panels/{panel_id}")
    async def update_panel(project_id: str, panel_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        try:
            panel = project.panel(panel_id)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        if "position" in body:
            panel.position = dict(body["position"])
        if "view" in body:
            if panel.view == "grid_2d" or body["view"] == "grid_2d":
                raise bad_request(ValueError("view toggle applies to 1D panels only"))
            panel.view = body["view"]
        if "comparison" in body:
            panel.comparison = bool(body["comparison"])
        store.save(project)
        return panel.to_dict()

    @app.post("/projects/{project_id}/panels/{panel_a}/combine/{panel_b}")
    def combine(project_id: str, panel_a: str, panel_b: str):
        project = project_or_404(project_id)
        try:
            panel = store.combine_panels(project, panel_a, panel_b)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except ValueError as e:
            raise bad_request(e) from e
        return panel.to_dict()

    # -- highlights --------------------------------------------------------

    @app.get("/projects/{project_id}/highlight")
    def highlight(
        project_id: str,
        by: str,
        batch: int | None = None,
        storyline_id: str | None = None,
        value: str | None = None,
        dims: str | None = None,
        t: int | None = None,
    ):
        project = project_or_404(project_id)
        if batch is None:
            if project.latest_batch is None:
                raise HTTPException(status_code=400, detail="project has no batches")
            batch = project.latest_batch.batch_id
        try:
            batch_obj = project.batch(batch)
            if by == "storyline":
                if storyline_id is None:
                    raise ValueError("storyline_id is required")
                result = bsv.filter_by_storyline(batch_obj, storyline_id)
            elif by == "value":
                if value is None or dims is None:
                    raise ValueError("value and dims are required")
                dimension_ids = [d for d in dims.split(",") if d]
                dim_objs = tuple(project.dimension(d) for d in dimension_ids)
                view = "timeline_1d" if len(dimension_ids) == 1 else "grid_2d"
                graph = store.graph(project, dimension_ids, batch, view)
                result = bsv.filter_by_value(graph, tuple(value.split(",")), dims=dim_objs)
            elif by == "timestep":
                if t is None:
                    raise ValueError("t is required")
                result = bsv.timeline_slice(batch_obj, t)
            else:
                raise ValueError(f"unknown highlight kind {by!r}")
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except ValueError as e:
            raise bad_request(e) from e
        return _highlight_to_dict(result)

    # -- playtest ----------------------------------------------------------

    def session_state(session: Session) -> dict:
        return {
            "session_id": session.session_id,
            "round_index": session.round_index,
            "transcript": [{"role": t.role, "text": t.text} for t in session.transcript],
            "triggers": [
                {"rule_id": t.rule_id, "round": t.round, "rationale": t.verdict_rationale}
                for t in session.trigger_log
            ],
            "warnings": list(session.warnings),
        }

    @app.get("/projects/{project_id}/playtest/{session_id}")
    def get_playtest(project_id: str, session_id: str):
        project_or_404(project_id)
        session = sessions.get((project_id, session_id))
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session_state(session)

    @app.post("/projects/{project_id}/playtest/{session_id}")
    async def post_playtest(project_id: str, session_id: str, request: Request):
        project = project_or_404(project_id)
        body = await request.json()
        action = body.get("action")
        key = (project_id, session_id)
        try:
            if action == "start":
                if project.storyworld is None:
                    raise ValueError("project has no storyworld")
                session = start_session(session_id, project.storyworld, project.rules)
                sessions[key] = session
                gm_turn(session, oracle)
            elif action == "player":
                session = sessions.get(key)
                if session is None:
                    raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
                player_turn(session, body.get("text", ""))
                finalize_round(session, oracle)
                gm_turn(session, oracle)
            else:
                raise ValueError(f"unknown action {action!r}")
        except (ValueError, TurnOrderError) as e:
            raise bad_request(e) from e
        return session_state(sessions[key])

    @app.get("/projects/{project_id}/playtest/{session_id}/export")
    def export_playtest(project_id: str, session_id: str):
        project_or_404(project_id)
        session = sessions.get((project_id, session_id))
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        doc = {
            "format_version": 1,
            "storylines": [
                {"id": session.session_id, "player_profile": None, "rounds": session_rounds(session)}
            ],
        }
        return Response(
            content=json.dumps(doc, indent=2, ensure_ascii=False),
            media_type="application/json",
        )

    # -- jobs --------------------------------------------------------------

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            return jobs.get(job_id).to_dict()
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e

    return app
