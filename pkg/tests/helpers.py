"""Brute-force oracles and random batch generation shared across test modules.

The oracles here deliberately re-derive graph structure by direct enumeration
over storylines so they stay independent of the engine's bucketing code.
"""

from __future__ import annotations

import random

from storybundle.bsv import BsvGraph, build_graph
from storybundle.model import (
    Dimension,
    DimensionAssignment,
    NarrativeState,
    PlaythroughBatch,
    Storyline,
    storyline_color,
)


def random_batch_and_dims(
    rng: random.Random,
    max_storylines: int = 6,
    max_rounds: int = 6,
    max_values: int = 4,
) -> tuple[PlaythroughBatch, list[Dimension], list[DimensionAssignment]]:
    """A random small batch with two dimensions and total random assignments."""
    n_storylines = rng.randint(1, max_storylines)
    storylines = []
    for i in range(n_storylines):
        sid = f"s{i + 1}"
        n_rounds = rng.randint(1, max_rounds)
        states = [
            NarrativeState(storyline_id=sid, timestep=t, round_text=f"gm {sid} {t}\nplayer")
            for t in range(1, n_rounds + 1)
        ]
        storylines.append(Storyline(id=sid, states=states, display_color=storyline_color(i)))
    batch = PlaythroughBatch(batch_id=1, storylines=storylines)

    dims = []
    asgs = []
    for d in range(2):
        values = tuple(f"v{d}_{j}" for j in range(rng.randint(2, max_values)))
        dim = Dimension(
            id=f"d{d}", name=f"d{d}", description="random", values=values, origin="author"
        )
        asg = DimensionAssignment(
            dimension_id=dim.id,
            batch_id=1,
            values={
                (st.storyline_id, st.timestep): rng.choice(values) for st in batch.states
            },
        )
        dims.append(dim)
        asgs.append(asg)
    return batch, dims, asgs


def assert_partition(graph: BsvGraph, batch: PlaythroughBatch) -> None:
    """Every state of the batch appears in exactly one node."""
    seen: list = []
    for node in graph.nodes:
        seen.extend(node.member_states)
    assert len(seen) == len(batch.states)
    assert set(seen) == batch.state_keys()


def assert_edges_match_bruteforce(
    graph: BsvGraph, batch: PlaythroughBatch, asgs: list[DimensionAssignment]
) -> None:
    """Edge set and multiplicities re-derived by direct transition enumeration."""
    expected: dict[tuple, set[str]] = {}
    for storyline in batch.storylines:
        for a, b in zip(storyline.states, storyline.states[1:]):
            ka = tuple(asg.values[(storyline.id, a.timestep)] for asg in asgs) + (a.timestep,)
            kb = tuple(asg.values[(storyline.id, b.timestep)] for asg in asgs) + (b.timestep,)
            expected.setdefault((ka, kb), set()).add(storyline.id)
    got = {}
    node_key = {n.id: n.value_key + (n.timestep,) for n in graph.nodes}
    for edge in graph.edges:
        got[(node_key[edge.from_id], node_key[edge.to_id])] = set(edge.storyline_ids)
        assert edge.multiplicity == len(edge.storyline_ids)
    assert got == expected


def assert_path_reconstruction(graph: BsvGraph, batch: PlaythroughBatch) -> None:
    """Each storyline's visited node sequence is a directed path in the graph."""
    membership = {}
    for node in graph.nodes:
        for key in node.member_states:
            membership[key] = node.id
    edge_set = {(e.from_id, e.to_id) for e in graph.edges}
    for storyline in batch.storylines:
        path = [membership[(storyline.id, st.timestep)] for st in storyline.states]
        for a, b in zip(path, path[1:]):
            assert (a, b) in edge_set


def assert_2d_projects_to_1d(
    batch: PlaythroughBatch,
    dims: list[Dimension],
    asgs: list[DimensionAssignment],
) -> None:
    """Projecting 2D member sets onto either dimension reproduces its 1D graph."""
    g2 = build_graph(batch, tuple(dims), tuple(asgs), "grid_2d")
    for axis in (0, 1):
        g1 = build_graph(batch, (dims[axis],), (asgs[axis],), "timeline_1d")
        projected: dict[tuple, set] = {}
        for node in g2.nodes:
            key = (node.value_key[axis], node.timestep)
            projected.setdefault(key, set()).update(node.member_states)
        actual = {(n.value_key[0], n.timestep): set(n.member_states) for n in g1.nodes}
        assert projected == actual


def assert_compact_sums(
    batch: PlaythroughBatch, dim: Dimension, asg: DimensionAssignment
) -> None:
    """Compact counts equal timeline column sums and the total state count."""
    timeline = build_graph(batch, (dim,), (asg,), "timeline_1d")
    compact = build_graph(batch, (dim,), (asg,), "compact_1d")
    assert compact.edges == ()
    column_sums: dict[str, int] = {}
    for node in timeline.nodes:
        column_sums[node.value_key[0]] = column_sums.get(node.value_key[0], 0) + node.count
    assert {n.value_key[0]: n.count for n in compact.nodes} == column_sums
    assert sum(n.count for n in compact.nodes) == len(batch.states)
