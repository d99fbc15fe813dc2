"""Interactive story session execution.

A session alternates game-master and player turns. At the end of each round
every rule's condition is checked by the oracle against the cumulative
transcript; triggered effects are queued and injected as mandatory steering
directives into the next game-master prompt (once, unless the rule is marked
persistent). Each completed round yields one narrative state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import NarrativeState, Rule, Storyworld, validate_storyworld
from .oracle import Oracle, OracleRequest
from .prompt_assets import fill_template

__all__ = [
    "Turn",
    "RuleTrigger",
    "Session",
    "TurnOrderError",
    "start_session",
    "gm_turn",
    "player_turn",
    "finalize_round",
    "session_rounds",
]


class TurnOrderError(RuntimeError):
    """A turn operation was called out of order."""


@dataclass(frozen=True)
class Turn:
    role: str  # game_master | player
    text: str


@dataclass(frozen=True)
class RuleTrigger:
    rule_id: str
    round: int
    verdict_rationale: str


@dataclass
class Session:
    session_id: str
    storyworld: Storyworld
    rules: list[Rule]
    transcript: list[Turn] = field(default_factory=list)
    round_index: int = 0  # completed rounds
    pending_effects: list[str] = field(default_factory=list)  # injected once, then cleared
    persistent_effects: list[str] = field(default_factory=list)  # injected on every GM turn
    trigger_log: list[RuleTrigger] = field(default_factory=list)
    states: list[NarrativeState] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    seed: int | None = None

    @property
    def next_role(self) -> str:
        return "game_master" if len(self.transcript) % 2 == 0 else "player"

    @property
    def round_open(self) -> bool:
        return len(self.transcript) > 2 * self.round_index


def start_session(
    session_id: str, storyworld: Storyworld, rules: list[Rule], seed: int | None = None
) -> Session:
    errors = validate_storyworld(storyworld)
    if errors:
        raise ValueError(f"invalid storyworld: {'; '.join(errors)}")
    return Session(session_id=session_id, storyworld=storyworld, rules=list(rules), seed=seed)


def _transcript_text(session: Session) -> str:
    if not session.transcript:
        return "(the story has not started yet)"
    labels = {"game_master": "Game master", "player": session.storyworld.protagonist.name}
    return "\n\n".join(f"{labels[t.role]}: {t.text}" for t in session.transcript)


def _characters_text(sw: Storyworld) -> str:
    lines = []
    for c in sw.characters:
        marker = " (protagonist, played by the player)" if c.is_protagonist else ""
        lines.append(f"- {c.name}{marker}: {c.description}")
    return "\n".join(lines)


def gm_turn(session: Session, oracle: Oracle) -> str:
    """Generate the game master's turn, consuming any queued rule effects."""
    if session.next_role != "game_master":
        raise TurnOrderError("it is the player's turn")
    effects = session.pending_effects + session.persistent_effects
    if effects:
        directives = "Mandatory steering directives for this turn (the plot must move towards these outcomes):\n"
        directives += "\n".join(f"- {e}" for e in effects) + "\n"
    else:
        directives = ""
    prompt = fill_template(
        "gm_turn",
        world_description=session.storyworld.world_description,
        characters=_characters_text(session.storyworld),
        round_number=str(session.round_index + 1),
        directives=directives,
        transcript=_transcript_text(session),
    )
    text = oracle.complete(
        OracleRequest.make("gm_turn", prompt, "gm_turn", seed=session.seed)
    ).strip()
    session.pending_effects.clear()
    session.transcript.append(Turn(role="game_master", text=text))
    return text


def player_turn(session: Session, input_text: str) -> Session:
    """Record the player's action/dialogue for the protagonist."""
    if session.next_role != "player":
        raise TurnOrderError("it is the game master's turn")
    if not input_text.strip():
        raise ValueError("player input is empty")
    session.transcript.append(Turn(role="player", text=input_text))
    return session


def _check_rule(session: Session, rule: Rule, oracle: Oracle) -> RuleTrigger | None:
    prompt = fill_template(
        "rule_check", condition=rule.condition, transcript=_transcript_text(session)
    )
    try:
        answer = oracle.complete(
            OracleRequest.make("rule_check", prompt, "rule_check", seed=session.seed)
        )
    except Exception as e:  # unparsable or failed verdicts mean "not triggered"
        session.warnings.append(f"rule {rule.id}: verdict failed ({e}); treated as not triggered")
        return None
    lines = answer.strip().splitlines() or [""]
    verdict = lines[0].strip()
    rationale = "\n".join(lines[1:]).strip()
    if verdict == "TRIGGERED":
        return RuleTrigger(
            rule_id=rule.id, round=session.round_index + 1, verdict_rationale=rationale
        )
    if verdict != "NOT_TRIGGERED":
        session.warnings.append(
            f"rule {rule.id}: unparsable verdict {verdict!r}; treated as not triggered"
        )
    return None


def finalize_round(session: Session, oracle: Oracle) -> tuple[NarrativeState, list[RuleTrigger]]:
    """Close the current round: build its narrative state and run rule checks.

    Triggered effects are appended to pending_effects in rule order. Rules are
    re-entrant: the same rule may trigger again in a later round, at most once
    per round.
    """
    if not session.round_open or session.next_role != "game_master":
        raise TurnOrderError("the round does not have both turns yet")
    gm = session.transcript[-2]
    player = session.transcript[-1]
    triggers = []
    for rule in session.rules:
        trigger = _check_rule(session, rule, oracle)
        if trigger is not None:
            triggers.append(trigger)
            if rule.persistent:
                if rule.effect not in session.persistent_effects:
                    session.persistent_effects.append(rule.effect)
            else:
                session.pending_effects.append(rule.effect)
    session.round_index += 1
    state = NarrativeState(
        storyline_id=session.session_id,
        timestep=session.round_index,
        round_text=gm.text + "\n" + player.text,
        triggered_rule_ids=frozenset(t.rule_id for t in triggers),
    )
    session.states.append(state)
    session.trigger_log.extend(triggers)
    return state, triggers


def session_rounds(session: Session) -> list[dict]:
    """The session's completed rounds in the batch file format's round shape."""
    rounds = []
    for state in session.states:
        gm_text, _, player_text = state.round_text.partition("\n")
        rounds.append(
            {
                "gm_text": gm_text,
                "player_text": player_text,
                "triggered_rule_ids": sorted(state.triggered_rule_ids),
            }
        )
    return rounds
