"""Bundled storyline graph construction and querying.

Narrative states that share the same dimension value (or value combination)
at the same timestep are grouped into nodes; edges record the 1-step
transitions storylines actually realize between consecutive timesteps. Three
views exist: the 1D timeline, a compact per-value tally with no edges, and
the 2D grid over two dimensions. Everything here is a pure function of
immutable inputs; graphs carry canonical node/edge ordering so identical
inputs produce identical output bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    UNCLASSIFIED,
    Dimension,
    DimensionAssignment,
    PlaythroughBatch,
)

__all__ = [
    "BsvNode",
    "BsvEdge",
    "BsvGraph",
    "HighlightSet",
    "build_1d_bsv",
    "build_compact_view",
    "build_2d_bsv",
    "build_graph",
    "filter_by_storyline",
    "filter_by_value",
    "timeline_slice",
    "compare_batches",
    "graph_to_dict",
    "graph_to_dot",
]

StateKey = tuple[str, int]  # (storyline_id, timestep)


@dataclass(frozen=True)
class BsvNode:
    id: str
    value_key: tuple[str, ...]  # one token per dimension
    timestep: int | None  # None in the compact view
    member_states: tuple[StateKey, ...]  # sorted (storyline order, timestep)

    @property
    def count(self) -> int:
        return len(self.member_states)


@dataclass(frozen=True)
class BsvEdge:
    from_id: str
    to_id: str
    storyline_ids: tuple[str, ...]  # sorted by storyline order in the batch

    @property
    def multiplicity(self) -> int:
        return len(self.storyline_ids)


@dataclass(frozen=True)
class BsvGraph:
    view: str  # timeline_1d | compact_1d | grid_2d
    batch_id: int
    dimension_ids: tuple[str, ...]
    nodes: tuple[BsvNode, ...]
    edges: tuple[BsvEdge, ...]
    previous_overlay: "BsvGraph | None" = None

    def node_by_id(self, node_id: str) -> BsvNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"unknown node id: {node_id!r}")


@dataclass(frozen=True)
class HighlightSet:
    states: frozenset[StateKey]
    provenance: str  # by_storyline | by_value | by_timestep


def _node_id(value_key: tuple[str, ...], timestep: int | None) -> str:
    label = "+".join(value_key)
    return label if timestep is None else f"{label}@t{timestep}"


def _value_order(dims: tuple[Dimension, ...]) -> dict[tuple[str, ...], int]:
    """Canonical ordering of value combinations: schema order, UNCLASSIFIED last."""
    columns: list[tuple[str, ...]] = [()]
    for dim in dims:
        values = list(dim.values) + [UNCLASSIFIED]
        columns = [prefix + (v,) for prefix in columns for v in values]
    return {combo: i for i, combo in enumerate(columns)}


def _storyline_order(batch: PlaythroughBatch) -> dict[str, int]:
    return {s.id: i for i, s in enumerate(batch.storylines)}


def _check_inputs(
    batch: PlaythroughBatch,
    dims: tuple[Dimension, ...],
    asgs: tuple[DimensionAssignment, ...],
) -> None:
    if len(dims) != len(asgs):
        raise ValueError("one assignment per dimension is required")
    if not 1 <= len(dims) <= 2:
        raise ValueError("a graph covers 1 or 2 dimensions")
    if len(dims) == 2 and dims[0].id == dims[1].id:
        raise ValueError("the two dimensions must be distinct")
    for dim, asg in zip(dims, asgs):
        if asg.dimension_id != dim.id:
            raise ValueError(f"assignment {asg.dimension_id!r} does not match dimension {dim.id!r}")
        if asg.batch_id != batch.batch_id:
            raise ValueError(
                f"assignment batch {asg.batch_id} does not match batch {batch.batch_id}"
            )
        asg.check_total(batch, dim)


def _combo_for(asgs: tuple[DimensionAssignment, ...], key: StateKey) -> tuple[str, ...]:
    return tuple(asg.values[key] for asg in asgs)


def build_graph(
    batch: PlaythroughBatch,
    dims: tuple[Dimension, ...],
    asgs: tuple[DimensionAssignment, ...],
    view: str,
) -> BsvGraph:
    """Construct any of the three views over a batch.

    Node member sets partition exactly the batch's states. Nodes are ordered
    by timestep then value-schema order; edges by timestep, then source and
    target column; members by storyline index.
    """
    _check_inputs(batch, dims, asgs)
    if view not in ("timeline_1d", "compact_1d", "grid_2d"):
        raise ValueError(f"unknown view {view!r}")
    if view == "grid_2d" and len(dims) != 2:
        raise ValueError("grid_2d requires exactly 2 dimensions")
    if view in ("timeline_1d", "compact_1d") and len(dims) != 1:
        raise ValueError(f"{view} requires exactly 1 dimension")

    order = _value_order(dims)
    sorder = _storyline_order(batch)
    dim_ids = tuple(d.id for d in dims)

    def member_sort_key(key: StateKey):
        return (sorder[key[0]], key[1])

    if view == "compact_1d":
        buckets: dict[tuple[str, ...], list[StateKey]] = {}
        for st in batch.states:
            key = (st.storyline_id, st.timestep)
            buckets.setdefault(_combo_for(asgs, key), []).append(key)
        nodes = tuple(
            BsvNode(
                id=_node_id(combo, None),
                value_key=combo,
                timestep=None,
                member_states=tuple(sorted(buckets[combo], key=member_sort_key)),
            )
            for combo in sorted(buckets, key=order.__getitem__)
        )
        return BsvGraph(
            view=view, batch_id=batch.batch_id, dimension_ids=dim_ids, nodes=nodes, edges=()
        )

    # Timeline and 2D views share bucketing by (timestep, value combination).
    buckets_t: dict[tuple[int, tuple[str, ...]], list[StateKey]] = {}
    for st in batch.states:
        key = (st.storyline_id, st.timestep)
        buckets_t.setdefault((st.timestep, _combo_for(asgs, key)), []).append(key)
    nodes = tuple(
        BsvNode(
            id=_node_id(combo, t),
            value_key=combo,
            timestep=t,
            member_states=tuple(sorted(buckets_t[(t, combo)], key=member_sort_key)),
        )
        for t, combo in sorted(buckets_t, key=lambda tc: (tc[0], order[tc[1]]))
    )

    transitions: dict[tuple[str, str], list[str]] = {}
    for storyline in batch.storylines:
        for st, nxt in zip(storyline.states, storyline.states[1:]):
            a = _node_id(_combo_for(asgs, (storyline.id, st.timestep)), st.timestep)
            b = _node_id(_combo_for(asgs, (storyline.id, nxt.timestep)), nxt.timestep)
            transitions.setdefault((a, b), []).append(storyline.id)
    node_pos = {n.id: i for i, n in enumerate(nodes)}
    edges = tuple(
        BsvEdge(
            from_id=a,
            to_id=b,
            storyline_ids=tuple(sorted(set(sids), key=sorder.__getitem__)),
        )
        for (a, b), sids in sorted(
            transitions.items(), key=lambda kv: (node_pos[kv[0][0]], node_pos[kv[0][1]])
        )
    )
    return BsvGraph(
        view=view, batch_id=batch.batch_id, dimension_ids=dim_ids, nodes=nodes, edges=edges
    )


def build_1d_bsv(
    batch: PlaythroughBatch, dim: Dimension, asg: DimensionAssignment
) -> BsvGraph:
    return build_graph(batch, (dim,), (asg,), "timeline_1d")


def build_compact_view(
    batch: PlaythroughBatch, dim: Dimension, asg: DimensionAssignment
) -> BsvGraph:
    return build_graph(batch, (dim,), (asg,), "compact_1d")


def build_2d_bsv(
    batch: PlaythroughBatch,
    dim_a: Dimension,
    dim_b: Dimension,
    asg_a: DimensionAssignment,
    asg_b: DimensionAssignment,
) -> BsvGraph:
    return build_graph(batch, (dim_a, dim_b), (asg_a, asg_b), "grid_2d")


# ---------------------------------------------------------------------------
# Highlight computations (shared across every graph on a canvas)


def filter_by_storyline(batch: PlaythroughBatch, storyline_id: str) -> HighlightSet:
    storyline = batch.storyline(storyline_id)
    return HighlightSet(
        states=frozenset((storyline_id, st.timestep) for st in storyline.states),
        provenance="by_storyline",
    )


def filter_by_value(
    graph: BsvGraph,
    value_key: tuple[str, ...] | str,
    dims: tuple[Dimension, ...] | None = None,
) -> HighlightSet:
    if isinstance(value_key, str):
        value_key = (value_key,)
    value_key = tuple(value_key)
    if len(value_key) != len(graph.dimension_ids):
        raise ValueError(
            f"value key has {len(value_key)} tokens, graph has {len(graph.dimension_ids)} dimensions"
        )
    if dims is not None:
        # An unused-but-declared value yields an empty highlight; a token
        # outside the schema is rejected.
        for token, dim in zip(value_key, dims):
            if token not in dim.values and token != UNCLASSIFIED:
                raise ValueError(f"unknown value token {token!r} for dimension {dim.name!r}")
    matched = [n for n in graph.nodes if n.value_key == value_key]
    states = frozenset(key for n in matched for key in n.member_states)
    return HighlightSet(states=states, provenance="by_value")


def timeline_slice(batch: PlaythroughBatch, t: int) -> HighlightSet:
    if not 1 <= t <= batch.t_max:
        raise ValueError(f"timestep {t} out of range 1..{batch.t_max}")
    return HighlightSet(
        states=frozenset(
            (st.storyline_id, st.timestep) for st in batch.states if st.timestep == t
        ),
        provenance="by_timestep",
    )


# ---------------------------------------------------------------------------
# Batch-to-batch comparison


def compare_batches(
    graph: BsvGraph,
    previous_batch: PlaythroughBatch,
    dims: tuple[Dimension, ...],
    previous_asgs: tuple[DimensionAssignment, ...],
) -> BsvGraph:
    """Attach the previous batch's graph as an overlay on the current graph.

    The previous assignments must cover batch_id - 1 under the identical
    dimension schemas; the current structure is unchanged.
    """
    if previous_batch.batch_id != graph.batch_id - 1:
        raise ValueError(
            f"overlay must come from batch {graph.batch_id - 1}, got {previous_batch.batch_id}"
        )
    if tuple(d.id for d in dims) != graph.dimension_ids:
        raise ValueError("overlay dimensions do not match the graph's dimensions")
    overlay = build_graph(previous_batch, dims, previous_asgs, graph.view)
    return BsvGraph(
        view=graph.view,
        batch_id=graph.batch_id,
        dimension_ids=graph.dimension_ids,
        nodes=graph.nodes,
        edges=graph.edges,
        previous_overlay=overlay,
    )


# ---------------------------------------------------------------------------
# Exports


def graph_to_dict(graph: BsvGraph) -> dict:
    doc = {
        "view": graph.view,
        "batch_id": graph.batch_id,
        "dimension_ids": list(graph.dimension_ids),
        "nodes": [
            {
                "id": n.id,
                "value_key": list(n.value_key),
                "timestep": n.timestep,
                "member_states": [
                    {"storyline_id": sid, "timestep": t} for sid, t in n.member_states
                ],
            }
            for n in graph.nodes
        ],
        "edges": [
            {
                "from": e.from_id,
                "to": e.to_id,
                "multiplicity": e.multiplicity,
                "storyline_ids": list(e.storyline_ids),
            }
            for e in graph.edges
        ],
    }
    if graph.previous_overlay is not None:
        doc["previous_overlay"] = graph_to_dict(graph.previous_overlay)
    return doc


def graph_to_dot(graph: BsvGraph) -> str:
    """DOT text with one subgraph rank per timestep and edge weight=multiplicity."""
    lines = ["digraph bsv {", "  rankdir=TB;"]
    by_timestep: dict[int | None, list[BsvNode]] = {}
    for n in graph.nodes:
        by_timestep.setdefault(n.timestep, []).append(n)
    for t in sorted(by_timestep, key=lambda x: (x is None, x)):
        members = by_timestep[t]
        if t is not None:
            lines.append(f"  subgraph t{t} {{")
            lines.append("    rank=same;")
            indent = "    "
        else:
            indent = "  "
        for n in members:
            label = "+".join(n.value_key)
            suffix = f"@t{n.timestep}" if n.timestep is not None else ""
            lines.append(f'{indent}"{n.id}" [label="{label}{suffix} (n={n.count})"];')
        if t is not None:
            lines.append("  }")
    for e in graph.edges:
        lines.append(f'  "{e.from_id}" -> "{e.to_id}" [weight={e.multiplicity}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
