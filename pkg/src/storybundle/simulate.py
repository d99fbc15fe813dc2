"""Simulated playthrough generation via archetype-conditioned player proxies.

Each simulated playthrough runs a fresh story session where the player turns
are produced by the oracle, conditioned on one of the registered player
profiles. Profiles are assigned to playthroughs round-robin; a refused or
failed playthrough is skipped with a warning rather than failing the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import PlaythroughBatch, Rule, Storyline, Storyworld, storyline_from_states
from .oracle import Oracle, OracleError, OracleRefusal, OracleRequest
from .prompt_assets import fill_template
from .runtime import finalize_round, gm_turn, player_turn, start_session, _transcript_text

__all__ = [
    "PlayerProfile",
    "PROFILE_REGISTRY",
    "DEFAULT_PROFILES",
    "SimulationSpec",
    "PlaythroughSkipped",
    "profile_for_index",
    "simulate_playthrough",
    "simulate_batch",
]


@dataclass(frozen=True)
class PlayerProfile:
    name: str
    description: str


# Built-in player archetypes. The registry is extensible: register() adds more.
PROFILE_REGISTRY: dict[str, PlayerProfile] = {}


def register(profile: PlayerProfile) -> PlayerProfile:
    if profile.name in PROFILE_REGISTRY:
        raise ValueError(f"profile {profile.name!r} already registered")
    PROFILE_REGISTRY[profile.name] = profile
    return profile


register(
    PlayerProfile(
        "role_player",
        "Role-players prioritize narrative immersion and character development by "
        "mimicking the actions their character would take in the gaming world.",
    )
)
register(
    PlayerProfile(
        "explorer",
        "Explorers are motivated by curiosity and derive enjoyment from discovering, "
        "mapping, and understanding the game world, its systems, and hidden possibilities.",
    )
)
register(
    PlayerProfile(
        "killer",
        "Killer players are motivated by competition and domination, deriving enjoyment "
        "from imposing on, defeating, or disrupting other players within the game world.",
    )
)
register(
    PlayerProfile(
        "clueless",
        "Clueless players engage with a game without a clear understanding of its "
        "systems, goals, or optimal strategies, often acting through trial-and-error, "
        "guesswork, or playful misunderstanding rather than informed decision-making.",
    )
)

DEFAULT_PROFILES = ("role_player", "explorer", "clueless")


@dataclass
class SimulationSpec:
    storyworld: Storyworld
    rules: list[Rule] = field(default_factory=list)
    profiles: list[str] = field(default_factory=lambda: list(DEFAULT_PROFILES))
    playthroughs_per_request: int = 3
    rounds_per_playthrough: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.playthroughs_per_request < 1 or self.rounds_per_playthrough < 1:
            raise ValueError("playthrough and round counts must be >= 1")
        if not self.profiles:
            raise ValueError("at least one player profile is required")
        for name in self.profiles:
            if name not in PROFILE_REGISTRY:
                raise ValueError(f"unknown player profile {name!r}")


class PlaythroughSkipped(RuntimeError):
    """A single playthrough was abandoned (e.g. backend refusal)."""


def profile_for_index(profiles: list[str], index: int) -> str:
    """Round-robin profile assignment: a pure function of (profiles, index)."""
    return profiles[index % len(profiles)]


def _proxy_player_turn(session, profile: PlayerProfile, oracle: Oracle) -> None:
    prompt = fill_template(
        "player_turn",
        protagonist_name=session.storyworld.protagonist.name,
        profile_name=profile.name,
        profile_description=profile.description,
        round_number=str(session.round_index + 1),
        transcript=_transcript_text(session),
    )
    text = oracle.complete(
        OracleRequest.make("player_turn", prompt, "player_turn", seed=session.seed)
    ).strip()
    player_turn(session, text)


def simulate_playthrough(
    spec: SimulationSpec, profile_name: str, index: int, oracle: Oracle
) -> Storyline:
    """Run one fresh session for the configured number of rounds."""
    spec.validate()
    profile = PROFILE_REGISTRY[profile_name]
    storyline_id = f"s{index + 1}"
    session = start_session(storyline_id, spec.storyworld, spec.rules, seed=spec.seed + index)
    try:
        for _ in range(spec.rounds_per_playthrough):
            gm_turn(session, oracle)
            _proxy_player_turn(session, profile, oracle)
            finalize_round(session, oracle)
    except OracleRefusal as e:
        raise PlaythroughSkipped(
            f"playthrough {storyline_id} ({profile_name}) skipped: backend refusal ({e})"
        ) from e
    except OracleError as e:
        raise PlaythroughSkipped(f"playthrough {storyline_id} ({profile_name}) failed: {e}") from e
    return storyline_from_states(
        storyline_id, session.states, index=index, player_profile=profile_name
    )


def simulate_batch(
    spec: SimulationSpec, oracle: Oracle, batch_id: int = 1
) -> tuple[PlaythroughBatch, list[str]]:
    """Generate a batch of simulated playthroughs; partial batches are allowed."""
    spec.validate()
    storylines: list[Storyline] = []
    warnings: list[str] = []
    for index in range(spec.playthroughs_per_request):
        profile_name = profile_for_index(spec.profiles, index)
        try:
            storylines.append(simulate_playthrough(spec, profile_name, index, oracle))
        except PlaythroughSkipped as e:
            warnings.append(str(e))
    if not storylines:
        raise OracleError(f"all playthroughs failed: {'; '.join(warnings)}")
    return PlaythroughBatch(batch_id=batch_id, storylines=storylines), warnings
