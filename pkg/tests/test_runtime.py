import pytest

from storybundle.model import Character, Rule, Storyworld, parse_batch, serialize_batch
from storybundle.oracle import Fixture, MockOracle
from storybundle.runtime import (
    TurnOrderError,
    finalize_round,
    gm_turn,
    player_turn,
    session_rounds,
    start_session,
)

STAND_UP_RULE = Rule(
    id="confront",
    condition="The duckling personally stands up to the goose.",
    effect="The goose backs down, impressed by the duckling's courage.",
)


@pytest.fixture
def session(duck_storyworld):
    return start_session("s1", duck_storyworld, [STAND_UP_RULE])


class TestSessionLifecycle:
    def test_invalid_storyworld_rejected(self):
        sw = Storyworld(world_description="x", characters=(Character("A", "a"),))
        with pytest.raises(ValueError, match="no protagonist"):
            start_session("s1", sw, [])

    def test_alternation_enforced(self, session, sim_oracle):
        with pytest.raises(TurnOrderError):
            player_turn(session, "too early")
        gm_turn(session, sim_oracle)
        with pytest.raises(TurnOrderError):
            gm_turn(session, sim_oracle)
        player_turn(session, "I look around.")
        with pytest.raises(TurnOrderError):
            player_turn(session, "twice")

    def test_finalize_requires_complete_round(self, session, sim_oracle):
        with pytest.raises(TurnOrderError):
            finalize_round(session, sim_oracle)
        gm_turn(session, sim_oracle)
        with pytest.raises(TurnOrderError):
            finalize_round(session, sim_oracle)

    def test_empty_player_input_rejected(self, session, sim_oracle):
        gm_turn(session, sim_oracle)
        with pytest.raises(ValueError):
            player_turn(session, "   ")

    def test_round_yields_state(self, session, sim_oracle):
        gm_turn(session, sim_oracle)
        player_turn(session, "I hide in the reeds.")
        state, triggers = finalize_round(session, sim_oracle)
        assert state.timestep == 1
        assert state.storyline_id == "s1"
        assert state.round_text.startswith("GM-R1:")
        assert state.round_text.endswith("I hide in the reeds.")
        assert triggers == []
        assert session.round_index == 1
        assert session.next_role == "game_master"

    def test_gm_prompt_carries_world_and_transcript(self, session, sim_oracle):
        gm_turn(session, sim_oracle)
        player_turn(session, "I hide in the reeds.")
        finalize_round(session, sim_oracle)
        gm_turn(session, sim_oracle)
        prompt = sim_oracle.requests[-1].filled_prompt
        assert session.storyworld.world_description in prompt
        assert "Duckling (protagonist, played by the player)" in prompt
        assert "GM-R1:" in prompt and "I hide in the reeds." in prompt
        assert "Current round: 2" in prompt


class TestRules:
    def play_round(self, session, oracle, player_text):
        gm_turn(session, oracle)
        player_turn(session, player_text)
        return finalize_round(session, oracle)

    def test_trigger_and_one_shot_effect(self, session, sim_oracle):
        _, t1 = self.play_round(session, sim_oracle, "I swim in circles.")
        assert t1 == []
        _, t2 = self.play_round(session, sim_oracle, "I stand up to the goose!")
        assert [t.rule_id for t in t2] == ["confront"]
        assert t2[0].round == 2
        assert "confronted the goose" in t2[0].verdict_rationale
        assert session.pending_effects == [STAND_UP_RULE.effect]

        gm_turn(session, sim_oracle)
        prompt = sim_oracle.requests[-1].filled_prompt
        assert "Mandatory steering directives" in prompt
        assert STAND_UP_RULE.effect in prompt
        # consumed: not injected again next round
        assert session.pending_effects == []
        player_turn(session, "I swim in circles.")
        finalize_round(session, sim_oracle)  # transcript still mentions the phrase
        gm_turn(session, sim_oracle)

    def test_rule_is_reentrant(self, session, sim_oracle):
        # the trigger phrase stays in the cumulative transcript, so the rule
        # fires again in the following round
        self.play_round(session, sim_oracle, "I stand up to the goose!")
        _, t2 = self.play_round(session, sim_oracle, "I keep going.")
        assert [t.rule_id for t in t2] == ["confront"]
        assert [t.round for t in session.trigger_log] == [1, 2]
        assert state_ids(session) == [frozenset({"confront"}), frozenset({"confront"})]

    def test_persistent_effect_reinjected(self, duck_storyworld, sim_oracle):
        rule = Rule(
            id="confront",
            condition=STAND_UP_RULE.condition,
            effect=STAND_UP_RULE.effect,
            persistent=True,
        )
        session = start_session("s1", duck_storyworld, [rule])
        self.play_round(session, sim_oracle, "I stand up to the goose!")
        assert session.persistent_effects == [rule.effect]
        assert session.pending_effects == []
        for _ in range(2):
            gm_turn(session, sim_oracle)
            assert rule.effect in sim_oracle.requests[-1].filled_prompt
            player_turn(session, "I keep going.")
            finalize_round(session, sim_oracle)
        # re-triggering does not duplicate the directive
        assert session.persistent_effects == [rule.effect]

    def test_unparsable_verdict_is_not_triggered(self, duck_storyworld):
        oracle = MockOracle(
            [
                Fixture("keyword", "Current round:", "GM text.", purpose="gm_turn"),
                Fixture("keyword", "Condition:", "MAYBE\nwho knows", purpose="rule_check"),
            ]
        )
        session = start_session("s1", duck_storyworld, [STAND_UP_RULE])
        _, triggers = self.play_round(session, oracle, "I act.")
        assert triggers == []
        assert any("unparsable verdict 'MAYBE'" in w for w in session.warnings)

    def test_failed_verdict_is_not_triggered(self, duck_storyworld):
        oracle = MockOracle(
            [Fixture("keyword", "Current round:", "GM text.", purpose="gm_turn")],
            strict=True,  # rule_check prompts have no fixture -> NoFixtureError
        )
        session = start_session("s1", duck_storyworld, [STAND_UP_RULE])
        _, triggers = self.play_round(session, oracle, "I act.")
        assert triggers == []
        assert any("verdict failed" in w for w in session.warnings)

    def test_effects_survive_gm_failure(self, session, sim_oracle):
        self.play_round(session, sim_oracle, "I stand up to the goose!")
        failing = MockOracle([], strict=True)
        with pytest.raises(Exception):
            gm_turn(session, failing)
        assert session.pending_effects == [STAND_UP_RULE.effect]


def state_ids(session):
    return [s.triggered_rule_ids for s in session.states]


class TestExport:
    def test_session_rounds_are_batch_shaped(self, session, sim_oracle):
        for text in ["I swim.", "I stand up to the goose!"]:
            gm_turn(session, sim_oracle)
            player_turn(session, text)
            finalize_round(session, sim_oracle)
        rounds = session_rounds(session)
        assert [r["gm_text"][:6] for r in rounds] == ["GM-R1:", "GM-R2:"]
        assert rounds[1]["player_text"] == "I stand up to the goose!"
        assert rounds[0]["triggered_rule_ids"] == []
        assert rounds[1]["triggered_rule_ids"] == ["confront"]
        # the shape parses as a batch file
        doc = {
            "format_version": 1,
            "storylines": [{"id": "s1", "player_profile": None, "rounds": rounds}],
        }
        import json

        batch = parse_batch(json.dumps(doc).encode())
        assert serialize_batch(batch)  # round-trips cleanly
