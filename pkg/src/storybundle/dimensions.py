"""Dimension creation and narrative-state classification.

Dimensions come from three places: the author alone, the playthrough data
alone (a single grouping prompt over per-round state summaries), or a mix
of both. Once a dimension has a value schema, every state of a batch is
classified into one of the values by the oracle; failures fall back to the
UNCLASSIFIED sentinel rather than aborting.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .model import (
    UNCLASSIFIED,
    Dimension,
    DimensionAssignment,
    NarrativeState,
    PlaythroughBatch,
    check_value_schema,
)
from .oracle import Oracle, OracleRequest
from .prompt_assets import fill_template

__all__ = [
    "SchemaError",
    "InductionResult",
    "define_author_dimension",
    "summarize_state",
    "summarize_batch",
    "classify_states",
    "induce_dimensions",
    "induce_values",
    "suggest_dimension_names",
]

_SNAKE_CASE = re.compile(r"^[a-z][a-z0-9_]*$")

# Grammar-level retries (distinct from the gateway's transport retries).
_CLASSIFY_REPROMPTS = 1
_INDUCE_REPROMPTS = 2

_STRICT_SUFFIX = "\nYour previous answer did not follow the required format. Follow it exactly."


class SchemaError(ValueError):
    """A proposed or author-supplied value schema is invalid."""


@dataclass
class InductionResult:
    dimensions: list[Dimension]
    assignments: dict[str, DimensionAssignment]  # keyed by dimension id
    warnings: list[str] = field(default_factory=list)


def define_author_dimension(
    name: str, description: str, values: list[str]
) -> Dimension:
    """Create a dimension entirely from the author's input; no classification yet."""
    dim = Dimension(
        id=name, name=name, description=description, values=tuple(values), origin="author"
    )
    try:
        dim.validate()
    except ValueError as e:
        raise SchemaError(str(e)) from e
    return dim


def summarize_state(state: NarrativeState, oracle: Oracle) -> str:
    """Produce (once) and cache a short summary of the state's round."""
    if state.summary is not None:
        return state.summary
    prompt = fill_template("summarize", round_text=state.round_text)
    state.summary = oracle.complete(
        OracleRequest.make("summarize", prompt, "summarize")
    ).strip()
    return state.summary


def summarize_batch(batch: PlaythroughBatch, oracle: Oracle) -> list[str]:
    return [summarize_state(st, oracle) for st in batch.states]


def _classification_input(
    state: NarrativeState,
    batch: PlaythroughBatch,
    oracle: Oracle,
    full_history: bool,
) -> str:
    if not full_history:
        return summarize_state(state, oracle)
    storyline = batch.storyline(state.storyline_id)
    return "\n".join(st.round_text for st in storyline.states[: state.timestep])


def classify_states(
    batch: PlaythroughBatch,
    dim: Dimension,
    oracle: Oracle,
    full_history: bool = False,
    warnings: list[str] | None = None,
) -> DimensionAssignment:
    """Classify every state of the batch into one of the dimension's values.

    The oracle must answer with exactly one listed value on the first line;
    one re-prompt is allowed, after which the state becomes UNCLASSIFIED.
    Responses are cached by content hash inside the gateway, so reclassifying
    an unchanged batch performs zero backend calls.
    """
    dim.validate()
    legal = set(dim.values)
    values: dict[tuple[str, int], str] = {}
    for state in batch.states:
        text = _classification_input(state, batch, oracle, full_history)
        prompt = fill_template(
            "classify",
            dimension_name=dim.name,
            dimension_description=dim.description,
            values="\n".join(dim.values),
            summary=text,
        )
        value = None
        for attempt in range(1 + _CLASSIFY_REPROMPTS):
            attempt_prompt = prompt + _STRICT_SUFFIX * attempt
            answer = oracle.complete(
                OracleRequest.make("classify", attempt_prompt, "classify")
            )
            token = answer.strip().splitlines()[0].strip() if answer.strip() else ""
            if token in legal:
                value = token
                break
        if value is None:
            value = UNCLASSIFIED
            if warnings is not None:
                warnings.append(
                    f"state ({state.storyline_id}, {state.timestep}) could not be "
                    f"classified for dimension {dim.name!r}"
                )
        values[(state.storyline_id, state.timestep)] = value
    return DimensionAssignment(
        dimension_id=dim.id, batch_id=batch.batch_id, values=values
    )


# ---------------------------------------------------------------------------
# Data-derived and mixed extraction


def _parse_fenced_json(text: str) -> dict:
    match = re.search(r"```(?:json)?\s*\n(.*?)```", text, re.DOTALL)
    payload = match.group(1) if match else text
    doc = json.loads(payload)
    if not isinstance(doc, dict):
        raise ValueError("expected a JSON object")
    return doc


def _numbered_summaries(batch: PlaythroughBatch, oracle: Oracle) -> str:
    return "\n".join(f"{i + 1}. {s}" for i, s in enumerate(summarize_batch(batch, oracle)))


def _validate_proposal(name: str, description: str, values: list[str]) -> None:
    if not name or not _SNAKE_CASE.match(name):
        raise SchemaError(f"dimension name {name!r} is not a snake_case token")
    if not description:
        raise SchemaError(f"dimension {name!r} has no description")
    try:
        check_value_schema(values)
    except ValueError as e:
        raise SchemaError(f"dimension {name!r}: {e}") from e


def _oracle_json(
    oracle: Oracle, template_id: str, prompt: str, purpose: str = "induce"
) -> dict:
    last: Exception | None = None
    for attempt in range(1 + _INDUCE_REPROMPTS):
        answer = oracle.complete(
            OracleRequest.make(template_id, prompt + _STRICT_SUFFIX * attempt, purpose)
        )
        try:
            return _parse_fenced_json(answer)
        except (ValueError, json.JSONDecodeError) as e:
            last = e
    raise SchemaError(f"oracle output unparsable after {_INDUCE_REPROMPTS} re-prompts: {last}")


def _prune_empty_values(
    batch: PlaythroughBatch,
    dim: Dimension,
    oracle: Oracle,
    warnings: list[str],
) -> tuple[Dimension, DimensionAssignment] | None:
    """Drop values labeling zero states; reject the dimension if < 2 survive.

    Every value of a surviving data-derived schema labels at least one state.
    """
    asg = classify_states(batch, dim, oracle, warnings=warnings)
    used = set(asg.values.values())
    kept = tuple(v for v in dim.values if v in used)
    if len(kept) < 2:
        warnings.append(
            f"dimension {dim.name!r} rejected: only {len(kept)} of its values label any state"
        )
        return None
    if kept == dim.values:
        return dim, asg
    warnings.append(
        f"dimension {dim.name!r}: dropped unused values {sorted(set(dim.values) - set(kept))}"
    )
    pruned = Dimension(
        id=dim.id, name=dim.name, description=dim.description, values=kept, origin=dim.origin
    )
    return pruned, classify_states(batch, pruned, oracle, warnings=warnings)


def induce_dimensions(
    batch: PlaythroughBatch, k: int, oracle: Oracle
) -> InductionResult:
    """Derive k dimensions from the playthrough data alone.

    Pipeline: summarize every state, then one grouping call proposing k named
    dimensions with value schemas, then classify each and prune empty values.
    A rejected dimension is re-requested once; fewer than k valid dimensions
    yields a partial result with a warning.
    """
    if not batch.states:
        raise ValueError("batch has no states")
    if k < 1:
        raise ValueError("k must be >= 1")
    summaries = _numbered_summaries(batch, oracle)
    warnings: list[str] = []
    result: list[Dimension] = []
    assignments: dict[str, DimensionAssignment] = {}
    seen_names: set[str] = set()
    requests = 0
    while len(result) < k and requests < 2:
        requests += 1
        prompt = fill_template(
            "induce_dimensions", k=str(k - len(result)), summaries=summaries
        )
        doc = _oracle_json(oracle, "induce_dimensions", prompt)
        for entry in doc.get("dimensions", []):
            if len(result) >= k:
                break
            name = str(entry.get("name", ""))
            if name in seen_names:
                continue
            seen_names.add(name)
            try:
                _validate_proposal(name, str(entry.get("description", "")), entry.get("values", []))
            except SchemaError as e:
                warnings.append(str(e))
                continue
            dim = Dimension(
                id=name,
                name=name,
                description=str(entry["description"]),
                values=tuple(entry["values"]),
                origin="data_derived",
            )
            pruned = _prune_empty_values(batch, dim, oracle, warnings)
            if pruned is not None:
                result.append(pruned[0])
                assignments[pruned[0].id] = pruned[1]
    if len(result) < k:
        warnings.append(f"only {len(result)} of {k} requested dimensions could be derived")
    return InductionResult(dimensions=result, assignments=assignments, warnings=warnings)


def induce_values(
    batch: PlaythroughBatch, name: str, description: str, oracle: Oracle
) -> InductionResult:
    """Mixed extraction: the author names the dimension, the data provides values."""
    if not batch.states:
        raise ValueError("batch has no states")
    if not name or not _SNAKE_CASE.match(name):
        raise SchemaError(f"dimension name {name!r} is not a snake_case token")
    summaries = _numbered_summaries(batch, oracle)
    warnings: list[str] = []
    for _ in range(2):  # rejected schemas are re-requested once
        prompt = fill_template(
            "induce_values", name=name, description=description, summaries=summaries
        )
        doc = _oracle_json(oracle, "induce_values", prompt)
        values = [str(v) for v in doc.get("values", [])]
        try:
            check_value_schema(values)
        except ValueError as e:
            warnings.append(f"proposed schema invalid: {e}")
            continue
        dim = Dimension(
            id=name, name=name, description=description, values=tuple(values), origin="mixed"
        )
        pruned = _prune_empty_values(batch, dim, oracle, warnings)
        if pruned is not None:
            return InductionResult(
                dimensions=[pruned[0]],
                assignments={pruned[0].id: pruned[1]},
                warnings=warnings,
            )
    warnings.append(f"no valid value schema obtainable for dimension {name!r}")
    return InductionResult(dimensions=[], assignments={}, warnings=warnings)


def suggest_dimension_names(
    batch: PlaythroughBatch, k: int, oracle: Oracle
) -> tuple[list[tuple[str, str]], list[str]]:
    """Mixed extraction: the data names dimensions, the author will define values."""
    if not batch.states:
        raise ValueError("batch has no states")
    if k == 0:
        return [], []
    summaries = _numbered_summaries(batch, oracle)
    prompt = fill_template("suggest_names", k=str(k), summaries=summaries)
    doc = _oracle_json(oracle, "suggest_names", prompt)
    warnings: list[str] = []
    pairs: list[tuple[str, str]] = []
    for entry in doc.get("dimensions", []):
        name = str(entry.get("name", ""))
        if _SNAKE_CASE.match(name):
            pairs.append((name, str(entry.get("description", ""))))
        else:
            warnings.append(f"skipped suggestion with bad name {name!r}")
    if len(pairs) > k:
        pairs = pairs[:k]
    elif len(pairs) < k:
        warnings.append(f"only {len(pairs)} of {k} requested suggestions available")
    return pairs, warnings
