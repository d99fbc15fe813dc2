"""Core domain types, validation, and canonical serialization.

Every other module builds on the value types defined here: storyworlds and
rules (the author's specification), storylines and playthrough batches (the
recorded play data), and dimensions with their per-state value assignments.
All types are plain frozen-ish dataclasses; mutation happens only inside the
persistence layer's single-writer transactions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

__all__ = [
    "UNCLASSIFIED",
    "BATCH_FORMAT_VERSION",
    "STORYLINE_PALETTE",
    "BatchFormatError",
    "Character",
    "Storyworld",
    "Rule",
    "NarrativeState",
    "Storyline",
    "PlaythroughBatch",
    "Dimension",
    "DimensionAssignment",
    "storyline_color",
    "validate_storyworld",
    "storyworld_to_dict",
    "storyworld_from_dict",
    "rule_to_dict",
    "rule_from_dict",
    "dimension_to_dict",
    "dimension_from_dict",
    "assignment_to_dict",
    "assignment_from_dict",
    "parse_batch",
    "serialize_batch",
    "batch_to_dict",
    "batch_from_dict",
]

# Sentinel value for states the classifier could not place. Deliberately not
# a legal snake_case value token so it can never collide with a schema value.
UNCLASSIFIED = "__unclassified__"

BATCH_FORMAT_VERSION = 1

# Dot colors assigned to storylines by index, cycling when a batch has more
# storylines than the palette has entries.
STORYLINE_PALETTE = (
    "#4e79a7",  # blue
    "#b07aa1",  # purple
    "#59a14f",  # green
    "#e15759",  # red
    "#f28e2b",  # orange
    "#76b7b2",  # teal
    "#edc948",  # yellow
    "#ff9da7",  # pink
    "#9c755f",  # brown
    "#bab0ac",  # gray
)


def storyline_color(index: int) -> str:
    """Color token for the storyline at a given position in its batch."""
    return STORYLINE_PALETTE[index % len(STORYLINE_PALETTE)]


class BatchFormatError(ValueError):
    """Raised when a batch document is malformed; carries a path to the offender."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Character:
    name: str
    description: str
    is_protagonist: bool = False


@dataclass(frozen=True)
class Storyworld:
    world_description: str
    characters: tuple[Character, ...]

    @property
    def protagonist(self) -> Character:
        for c in self.characters:
            if c.is_protagonist:
                return c
        raise ValueError("storyworld has no protagonist")


@dataclass(frozen=True)
class Rule:
    id: str
    condition: str
    effect: str
    persistent: bool = False  # when true, the effect steers every later GM turn


@dataclass
class NarrativeState:
    """One game round of one storyline: the GM turn plus the player turn."""

    storyline_id: str
    timestep: int  # 1-based round index
    round_text: str
    summary: str | None = None
    triggered_rule_ids: frozenset[str] = frozenset()


@dataclass
class Storyline:
    id: str
    states: list[NarrativeState]
    display_color: str = STORYLINE_PALETTE[0]
    player_profile: str | None = None

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class PlaythroughBatch:
    batch_id: int
    storylines: list[Storyline]

    @property
    def t_max(self) -> int:
        return max((len(s) for s in self.storylines), default=0)

    @property
    def states(self) -> list[NarrativeState]:
        return [st for s in self.storylines for st in s.states]

    def state_keys(self) -> set[tuple[str, int]]:
        return {(st.storyline_id, st.timestep) for st in self.states}

    def storyline(self, storyline_id: str) -> Storyline:
        for s in self.storylines:
            if s.id == storyline_id:
                return s
        raise KeyError(f"unknown storyline id: {storyline_id!r}")


@dataclass(frozen=True)
class Dimension:
    id: str
    name: str
    description: str
    values: tuple[str, ...]  # order is column order in every view
    origin: str  # author | data_derived | mixed

    def validate(self) -> None:
        if not self.name:
            raise ValueError("dimension name must be nonempty")
        check_value_schema(self.values)

    def schema_hash(self) -> str:
        import hashlib

        payload = json.dumps(
            {"name": self.name, "description": self.description, "values": list(self.values)},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


def check_value_schema(values: tuple[str, ...] | list[str]) -> None:
    if not (2 <= len(values) <= 9):
        raise ValueError(f"value schema must have 2..9 values, got {len(values)}")
    if len(set(values)) != len(values):
        raise ValueError("value schema has duplicate values")
    if any(not v for v in values):
        raise ValueError("value schema has an empty value token")


@dataclass
class DimensionAssignment:
    """Per-state dimension values for one batch; total over the batch's states."""

    dimension_id: str
    batch_id: int
    values: dict[tuple[str, int], str]

    def value_for(self, storyline_id: str, timestep: int) -> str:
        return self.values[(storyline_id, timestep)]

    def check_total(self, batch: PlaythroughBatch, dim: Dimension | None = None) -> None:
        keys = batch.state_keys()
        if set(self.values) != keys:
            missing = keys - set(self.values)
            extra = set(self.values) - keys
            raise ValueError(
                f"assignment is not total over batch {batch.batch_id}: "
                f"missing={sorted(missing)} extra={sorted(extra)}"
            )
        if dim is not None:
            legal = set(dim.values) | {UNCLASSIFIED}
            bad = {v for v in self.values.values() if v not in legal}
            if bad:
                raise ValueError(f"assignment has values outside the schema: {sorted(bad)}")


# ---------------------------------------------------------------------------
# Storyworld validation


def validate_storyworld(sw: Storyworld) -> list[str]:
    """Return every invariant violation; an empty list means the storyworld is valid."""
    errors: list[str] = []
    if not sw.world_description.strip():
        errors.append("world description is empty")
    if not sw.characters:
        errors.append("no characters")
    names = [c.name for c in sw.characters]
    for i, c in enumerate(sw.characters):
        if not c.name.strip():
            errors.append(f"character {i} has an empty name")
    seen: set[str] = set()
    for n in names:
        if n in seen:
            errors.append(f"duplicate character name: {n!r}")
        seen.add(n)
    protagonists = [c.name for c in sw.characters if c.is_protagonist]
    if sw.characters and not protagonists:
        errors.append("no protagonist")
    elif len(protagonists) > 1:
        errors.append(f"multiple protagonists: {protagonists}")
    return errors


# ---------------------------------------------------------------------------
# Dict serializations (shared by the batch format, the project store, and the API)


def storyworld_to_dict(sw: Storyworld) -> dict:
    return {
        "world_description": sw.world_description,
        "characters": [
            {"name": c.name, "description": c.description, "is_protagonist": c.is_protagonist}
            for c in sw.characters
        ],
    }


def storyworld_from_dict(doc: dict) -> Storyworld:
    return Storyworld(
        world_description=doc["world_description"],
        characters=tuple(
            Character(
                name=c["name"],
                description=c.get("description", ""),
                is_protagonist=bool(c.get("is_protagonist", False)),
            )
            for c in doc.get("characters", [])
        ),
    )


def rule_to_dict(rule: Rule) -> dict:
    return {
        "id": rule.id,
        "condition": rule.condition,
        "effect": rule.effect,
        "persistent": rule.persistent,
    }


def rule_from_dict(doc: dict) -> Rule:
    return Rule(
        id=doc["id"],
        condition=doc["condition"],
        effect=doc["effect"],
        persistent=bool(doc.get("persistent", False)),
    )


def dimension_to_dict(dim: Dimension) -> dict:
    return {
        "id": dim.id,
        "name": dim.name,
        "description": dim.description,
        "values": list(dim.values),
        "origin": dim.origin,
    }


def dimension_from_dict(doc: dict) -> Dimension:
    return Dimension(
        id=doc["id"],
        name=doc["name"],
        description=doc.get("description", ""),
        values=tuple(doc["values"]),
        origin=doc.get("origin", "author"),
    )


def assignment_to_dict(asg: DimensionAssignment) -> dict:
    return {
        "dimension_id": asg.dimension_id,
        "batch_id": asg.batch_id,
        "values": [
            {"storyline_id": sid, "timestep": t, "value": v}
            for (sid, t), v in sorted(asg.values.items())
        ],
    }


def assignment_from_dict(doc: dict) -> DimensionAssignment:
    return DimensionAssignment(
        dimension_id=doc["dimension_id"],
        batch_id=doc["batch_id"],
        values={(e["storyline_id"], e["timestep"]): e["value"] for e in doc["values"]},
    )


# ---------------------------------------------------------------------------
# Batch file format (canonical)
#
# UTF-8 JSON with top-level keys, in order:
#   format_version: 1
#   storylines: [{id, player_profile, rounds: [{gm_text, player_text,
#                                               triggered_rule_ids}]}]
# round_text is defined as gm_text + "\n" + player_text.


def _split_round_text(round_text: str) -> tuple[str, str]:
    gm, _, player = round_text.partition("\n")
    return gm, player


def batch_to_dict(batch: PlaythroughBatch) -> dict:
    storylines = []
    for s in batch.storylines:
        rounds = []
        for st in s.states:
            gm_text, player_text = _split_round_text(st.round_text)
            rounds.append(
                {
                    "gm_text": gm_text,
                    "player_text": player_text,
                    "triggered_rule_ids": sorted(st.triggered_rule_ids),
                }
            )
        storylines.append({"id": s.id, "player_profile": s.player_profile, "rounds": rounds})
    return {"format_version": BATCH_FORMAT_VERSION, "storylines": storylines}


def serialize_batch(batch: PlaythroughBatch) -> bytes:
    return json.dumps(batch_to_dict(batch), indent=2, ensure_ascii=False).encode("utf-8")


def batch_from_dict(doc: dict, batch_id: int = 1) -> PlaythroughBatch:
    if not isinstance(doc, dict):
        raise BatchFormatError("document must be an object")
    version = doc.get("format_version")
    if version != BATCH_FORMAT_VERSION:
        raise BatchFormatError(
            f"unsupported format_version {version!r}", path="$.format_version"
        )
    raw_storylines = doc.get("storylines")
    if not isinstance(raw_storylines, list):
        raise BatchFormatError("storylines must be a list", path="$.storylines")

    storylines: list[Storyline] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(raw_storylines):
        path = f"$.storylines[{i}]"
        if not isinstance(raw, dict):
            raise BatchFormatError("storyline must be an object", path=path)
        sid = raw.get("id")
        if not isinstance(sid, str) or not sid:
            raise BatchFormatError("storyline id must be a nonempty string", path=f"{path}.id")
        if sid in seen_ids:
            raise BatchFormatError(f"duplicate storyline id {sid!r}", path=f"{path}.id")
        seen_ids.add(sid)
        rounds = raw.get("rounds")
        if not isinstance(rounds, list) or not rounds:
            raise BatchFormatError("rounds must be a nonempty list", path=f"{path}.rounds")
        states: list[NarrativeState] = []
        for t, rnd in enumerate(rounds, start=1):
            rpath = f"{path}.rounds[{t - 1}]"
            if not isinstance(rnd, dict):
                raise BatchFormatError("round must be an object", path=rpath)
            gm_text = rnd.get("gm_text")
            player_text = rnd.get("player_text")
            if not isinstance(gm_text, str) or not isinstance(player_text, str):
                raise BatchFormatError("gm_text and player_text must be strings", path=rpath)
            round_text = gm_text + "\n" + player_text
            if not round_text.strip():
                raise BatchFormatError("round text is empty", path=rpath)
            triggered = rnd.get("triggered_rule_ids", [])
            if not isinstance(triggered, list):
                raise BatchFormatError("triggered_rule_ids must be a list", path=rpath)
            states.append(
                NarrativeState(
                    storyline_id=sid,
                    timestep=t,
                    round_text=round_text,
                    triggered_rule_ids=frozenset(triggered),
                )
            )
        storylines.append(
            Storyline(
                id=sid,
                states=states,
                display_color=storyline_color(i),
                player_profile=raw.get("player_profile"),
            )
        )
    return PlaythroughBatch(batch_id=batch_id, storylines=storylines)


def parse_batch(data: bytes, batch_id: int = 1) -> PlaythroughBatch:
    """Parse the canonical batch file format, validating every invariant.

    Display colors are assigned deterministically by storyline index, so the
    same file always yields the same colors.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise BatchFormatError(f"not a UTF-8 JSON document: {e}") from e
    return batch_from_dict(doc, batch_id=batch_id)


def storyline_from_states(
    storyline_id: str,
    states: list[NarrativeState],
    index: int = 0,
    player_profile: str | None = None,
) -> Storyline:
    """Build a storyline from runtime-produced states, re-stamping ids and timesteps."""
    fixed = [
        replace(st, storyline_id=storyline_id, timestep=t)
        for t, st in enumerate(states, start=1)
    ]
    return Storyline(
        id=storyline_id,
        states=fixed,
        display_color=storyline_color(index),
        player_profile=player_profile,
    )
