"""Authoring engine for LLM-driven interactive narratives.

Builds bundled storyline graphs over batches of playthroughs, supports
author-, data-, and mixed-origin narrative dimensions, runs interactive
story sessions with condition/effect rules, and simulates playthroughs with
archetype-conditioned player proxies.
"""

from .model import (
    UNCLASSIFIED,
    Character,
    Dimension,
    DimensionAssignment,
    NarrativeState,
    PlaythroughBatch,
    Rule,
    Storyline,
    Storyworld,
    parse_batch,
    serialize_batch,
    validate_storyworld,
)
from .bsv import (
    BsvGraph,
    HighlightSet,
    build_1d_bsv,
    build_2d_bsv,
    build_compact_view,
    compare_batches,
    filter_by_storyline,
    filter_by_value,
    graph_to_dict,
    graph_to_dot,
    timeline_slice,
)
from .dimensions import (
    classify_states,
    define_author_dimension,
    induce_dimensions,
    induce_values,
    suggest_dimension_names,
    summarize_state,
)
from .oracle import LiveOracle, MockOracle, Oracle, OracleRequest, load_fixtures
from .runtime import Session, finalize_round, gm_turn, player_turn, start_session
from .simulate import SimulationSpec, simulate_batch, simulate_playthrough

__version__ = "0.1.0"
