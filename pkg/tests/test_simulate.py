import pytest

from storybundle.model import serialize_batch, parse_batch
from storybundle.oracle import Fixture, MockOracle, OracleError
from storybundle.simulate import (
    DEFAULT_PROFILES,
    PROFILE_REGISTRY,
    SimulationSpec,
    PlaythroughSkipped,
    profile_for_index,
    simulate_batch,
    simulate_playthrough,
)


@pytest.fixture
def spec(duck_storyworld):
    return SimulationSpec(storyworld=duck_storyworld)


class TestProfiles:
    def test_registry_has_four_archetypes(self):
        assert set(PROFILE_REGISTRY) >= {"role_player", "explorer", "killer", "clueless"}

    def test_round_robin(self):
        profiles = ["a", "b", "c"]
        assert [profile_for_index(profiles, i) for i in range(7)] == [
            "a", "b", "c", "a", "b", "c", "a",
        ]

    def test_spec_validation(self, duck_storyworld):
        with pytest.raises(ValueError, match="unknown player profile"):
            SimulationSpec(storyworld=duck_storyworld, profiles=["ghost"]).validate()
        with pytest.raises(ValueError, match="counts"):
            SimulationSpec(storyworld=duck_storyworld, rounds_per_playthrough=0).validate()
        with pytest.raises(ValueError, match="profile"):
            SimulationSpec(storyworld=duck_storyworld, profiles=[]).validate()


class TestPlaythrough:
    def test_five_rounds(self, spec, sim_oracle):
        storyline = simulate_playthrough(spec, "explorer", 1, sim_oracle)
        assert storyline.id == "s2"
        assert storyline.player_profile == "explorer"
        assert [st.timestep for st in storyline.states] == [1, 2, 3, 4, 5]
        for t, st in enumerate(storyline.states, start=1):
            assert st.round_text.startswith(f"GM-R{t}:")
            assert "P-EXPL:" in st.round_text

    def test_profile_description_reaches_prompt(self, spec, sim_oracle):
        simulate_playthrough(spec, "killer", 0, sim_oracle)
        player_prompts = [
            r.filled_prompt for r in sim_oracle.requests if r.purpose == "player_turn"
        ]
        assert len(player_prompts) == 5
        assert all(PROFILE_REGISTRY["killer"].description in p for p in player_prompts)

    def test_refusal_skips(self, spec, sim_oracle):
        refusing = MockOracle(
            [Fixture("keyword", "Current round: 3", "", refusal=True, purpose="gm_turn")]
            + sim_oracle.fixtures,
        )
        with pytest.raises(PlaythroughSkipped, match="refusal"):
            simulate_playthrough(spec, "explorer", 0, refusing)


class TestBatch:
    def test_default_batch_shape(self, spec, sim_oracle):
        batch, warnings = simulate_batch(spec, sim_oracle)
        assert warnings == []
        assert [s.id for s in batch.storylines] == ["s1", "s2", "s3"]
        assert [s.player_profile for s in batch.storylines] == list(DEFAULT_PROFILES)
        assert batch.t_max == 5
        assert len(batch.states) == 15
        # distinct profiles produce distinct playthroughs
        texts = {s.states[0].round_text for s in batch.storylines}
        assert len(texts) == 3

    def test_serializes_to_batch_format(self, spec, sim_oracle):
        batch, _ = simulate_batch(spec, sim_oracle)
        again = parse_batch(serialize_batch(batch), batch_id=1)
        assert serialize_batch(again) == serialize_batch(batch)
        assert [s.player_profile for s in again.storylines] == list(DEFAULT_PROFILES)

    def test_partial_batch_on_refusal(self, spec, sim_oracle):
        # the explorer proxy refuses; the other two playthroughs survive
        refusing = MockOracle(
            [
                Fixture(
                    "keyword",
                    "role-playing as this type of player: explorer",
                    "",
                    refusal=True,
                    purpose="player_turn",
                )
            ]
            + sim_oracle.fixtures,
        )
        batch, warnings = simulate_batch(spec, refusing)
        assert [s.id for s in batch.storylines] == ["s1", "s3"]
        assert len(warnings) == 1 and "s2" in warnings[0] and "refusal" in warnings[0]

    def test_all_failed_raises(self, spec):
        empty = MockOracle([], strict=True)
        with pytest.raises(OracleError, match="all playthroughs failed"):
            simulate_batch(spec, empty)

    def test_deterministic(self, spec, duck_storyworld):
        from storybundle.oracle import load_fixtures
        from conftest import FIXTURES

        results = []
        for _ in range(2):
            oracle = MockOracle(load_fixtures(FIXTURES / "sim_mock"), strict=True)
            batch, _ = simulate_batch(spec, oracle)
            results.append(serialize_batch(batch))
        assert results[0] == results[1]
