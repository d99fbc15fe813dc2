import json
from pathlib import Path

import pytest

from storybundle.model import (
    Dimension,
    DimensionAssignment,
    parse_batch,
    storyworld_from_dict,
)
from storybundle.oracle import MockOracle, load_fixtures

FIXTURES = Path(__file__).parent / "fixtures"

# Hand-derived per-round value tables for the duck-pond batch (checked against
# the keyword mock before freezing; see test_dimensions).
DUCK_D1_VALUES = {
    ("s1", 1): "medium", ("s1", 2): "low", ("s1", 3): "low",
    ("s2", 1): "low", ("s2", 2): "medium", ("s2", 3): "high",
    ("s3", 1): "medium", ("s3", 2): "medium", ("s3", 3): "medium",
}
DUCK_D2_VALUES = {
    ("s1", 1): "neutral", ("s1", 2): "passive", ("s1", 3): "passive",
    ("s2", 1): "passive", ("s2", 2): "proactive", ("s2", 3): "proactive",
    ("s3", 1): "neutral", ("s3", 2): "proactive", ("s3", 3): "neutral",
}


@pytest.fixture
def duck_batch_bytes() -> bytes:
    return (FIXTURES / "duck_batch_v1.json").read_bytes()


@pytest.fixture
def duck_batch(duck_batch_bytes):
    return parse_batch(duck_batch_bytes, batch_id=1)


@pytest.fixture
def duck_batch_v2():
    return parse_batch((FIXTURES / "duck_batch_v2.json").read_bytes(), batch_id=2)


@pytest.fixture
def duck_storyworld():
    return storyworld_from_dict(json.loads((FIXTURES / "duck_storyworld.json").read_text()))


@pytest.fixture
def dim_advantage():
    return Dimension(
        id="ducks_advantage",
        name="ducks_advantage",
        description="the ducks' advantage against the goose",
        values=("low", "medium", "high"),
        origin="author",
    )


@pytest.fixture
def dim_behavior():
    return Dimension(
        id="duckling_behavior",
        name="duckling_behavior",
        description="how actively the duckling behaves",
        values=("passive", "neutral", "proactive"),
        origin="author",
    )


@pytest.fixture
def asg_advantage():
    return DimensionAssignment(
        dimension_id="ducks_advantage", batch_id=1, values=dict(DUCK_D1_VALUES)
    )


@pytest.fixture
def asg_behavior():
    return DimensionAssignment(
        dimension_id="duckling_behavior", batch_id=1, values=dict(DUCK_D2_VALUES)
    )


@pytest.fixture
def duck_oracle():
    return MockOracle(load_fixtures(FIXTURES / "duck_mock"), strict=True)


@pytest.fixture
def sim_oracle():
    return MockOracle(load_fixtures(FIXTURES / "sim_mock"), strict=True)
