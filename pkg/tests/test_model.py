import json

import pytest

from storybundle.model import (
    BatchFormatError,
    Character,
    DimensionAssignment,
    Storyworld,
    UNCLASSIFIED,
    parse_batch,
    serialize_batch,
    storyline_color,
    validate_storyworld,
)

from conftest import DUCK_D1_VALUES


def make_storyworld(characters):
    return Storyworld(world_description="a pond", characters=tuple(characters))


class TestValidateStoryworld:
    def test_duck_storyworld_is_valid(self, duck_storyworld):
        assert validate_storyworld(duck_storyworld) == []
        assert duck_storyworld.protagonist.name == "Duckling"

    def test_no_characters(self):
        errors = validate_storyworld(make_storyworld([]))
        assert "no characters" in errors

    def test_multiple_protagonists(self):
        sw = make_storyworld(
            [
                Character("A", "a", is_protagonist=True),
                Character("B", "b", is_protagonist=True),
            ]
        )
        assert any("multiple protagonists" in e for e in validate_storyworld(sw))

    def test_no_protagonist_and_duplicate_names(self):
        sw = make_storyworld([Character("A", "a"), Character("A", "b")])
        errors = validate_storyworld(sw)
        assert any("no protagonist" in e for e in errors)
        assert any("duplicate character name" in e for e in errors)

    def test_empty_world_description(self):
        sw = Storyworld(
            world_description="  ", characters=(Character("A", "a", is_protagonist=True),)
        )
        assert any("world description" in e for e in validate_storyworld(sw))


class TestParseBatch:
    def test_duck_batch(self, duck_batch):
        assert duck_batch.t_max == 3
        assert len(duck_batch.states) == 9
        assert [s.id for s in duck_batch.storylines] == ["s1", "s2", "s3"]
        for storyline in duck_batch.storylines:
            assert [st.timestep for st in storyline.states] == [1, 2, 3]

    def test_minimal_single_round(self):
        doc = {
            "format_version": 1,
            "storylines": [
                {
                    "id": "a",
                    "player_profile": None,
                    "rounds": [
                        {"gm_text": "x", "player_text": "y", "triggered_rule_ids": []}
                    ],
                }
            ],
        }
        batch = parse_batch(json.dumps(doc).encode())
        assert batch.t_max == 1
        assert batch.states[0].round_text == "x\ny"

    def test_duplicate_storyline_id(self, duck_batch_bytes):
        doc = json.loads(duck_batch_bytes)
        doc["storylines"][1]["id"] = "s1"
        with pytest.raises(BatchFormatError, match="duplicate storyline id"):
            parse_batch(json.dumps(doc).encode())

    def test_bad_version(self):
        with pytest.raises(BatchFormatError, match="format_version"):
            parse_batch(b'{"format_version": 2, "storylines": []}')

    def test_not_json(self):
        with pytest.raises(BatchFormatError):
            parse_batch(b"not json at all")

    def test_empty_round(self, duck_batch_bytes):
        doc = json.loads(duck_batch_bytes)
        doc["storylines"][0]["rounds"][1] = {
            "gm_text": "",
            "player_text": "",
            "triggered_rule_ids": [],
        }
        with pytest.raises(BatchFormatError, match=r"rounds\[1\]"):
            parse_batch(json.dumps(doc).encode())

    def test_error_path_points_at_offender(self, duck_batch_bytes):
        doc = json.loads(duck_batch_bytes)
        del doc["storylines"][2]["rounds"][0]["gm_text"]
        with pytest.raises(BatchFormatError) as exc:
            parse_batch(json.dumps(doc).encode())
        assert "storylines[2].rounds[0]" in str(exc.value)


class TestRoundTrip:
    def test_serialize_parse_round_trip(self, duck_batch):
        again = parse_batch(serialize_batch(duck_batch), batch_id=duck_batch.batch_id)
        assert serialize_batch(again) == serialize_batch(duck_batch)
        assert again.state_keys() == duck_batch.state_keys()
        for a, b in zip(again.states, duck_batch.states):
            assert a.round_text == b.round_text

    def test_key_order_is_canonical(self, duck_batch):
        doc = json.loads(serialize_batch(duck_batch))
        assert list(doc) == ["format_version", "storylines"]
        assert list(doc["storylines"][0]) == ["id", "player_profile", "rounds"]
        assert list(doc["storylines"][0]["rounds"][0]) == [
            "gm_text",
            "player_text",
            "triggered_rule_ids",
        ]


class TestColors:
    def test_colors_are_pure_function_of_index(self, duck_batch_bytes):
        a = parse_batch(duck_batch_bytes)
        b = parse_batch(duck_batch_bytes)
        assert [s.display_color for s in a.storylines] == [
            s.display_color for s in b.storylines
        ]
        assert [s.display_color for s in a.storylines] == [
            storyline_color(0),
            storyline_color(1),
            storyline_color(2),
        ]

    def test_palette_cycles(self):
        assert storyline_color(0) == storyline_color(10)


class TestAssignment:
    def test_totality_check(self, duck_batch, dim_advantage):
        asg = DimensionAssignment(
            dimension_id="ducks_advantage", batch_id=1, values=dict(DUCK_D1_VALUES)
        )
        asg.check_total(duck_batch, dim_advantage)

    def test_missing_entry_rejected(self, duck_batch, dim_advantage):
        values = dict(DUCK_D1_VALUES)
        del values[("s2", 2)]
        asg = DimensionAssignment("ducks_advantage", 1, values)
        with pytest.raises(ValueError, match="not total"):
            asg.check_total(duck_batch, dim_advantage)

    def test_out_of_schema_value_rejected(self, duck_batch, dim_advantage):
        values = dict(DUCK_D1_VALUES)
        values[("s2", 2)] = "enormous"
        asg = DimensionAssignment("ducks_advantage", 1, values)
        with pytest.raises(ValueError, match="outside the schema"):
            asg.check_total(duck_batch, dim_advantage)

    def test_unclassified_is_legal(self, duck_batch, dim_advantage):
        values = dict(DUCK_D1_VALUES)
        values[("s2", 2)] = UNCLASSIFIED
        DimensionAssignment("ducks_advantage", 1, values).check_total(
            duck_batch, dim_advantage
        )
