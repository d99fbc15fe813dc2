"""Regenerate the API response snapshots the frontend tests assert against.

Runs the REST service in-process against the strict mock oracle and the
duck-pond fixtures from the backend test suite, and records selected
responses as JSON files under frontend/tests/fixtures/.

Usage: python3 frontend/scripts/generate-fixtures.py
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parents[2]
BACKEND_FIXTURES = ROOT / "tests" / "fixtures"
OUT = ROOT / "frontend" / "tests" / "fixtures"

sys.path.insert(0, str(ROOT / "tests"))

from storybundle.oracle import MockOracle, load_fixtures  # noqa: E402
from storybundle.service import create_app  # noqa: E402
from storybundle.store import ProjectStore  # noqa: E402


def write(name: str, payload) -> None:
    (OUT / name).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {name}")


def main() -> None:
    import tempfile

    oracle = MockOracle(
        load_fixtures(BACKEND_FIXTURES / "duck_mock")
        + load_fixtures(BACKEND_FIXTURES / "sim_mock"),
        strict=True,
    )
    with tempfile.TemporaryDirectory() as tmp:
        client = TestClient(create_app(ProjectStore(tmp), oracle, synchronous_jobs=True))
        client.post("/projects", json={"project_id": "duck"})
        client.put(
            "/projects/duck/storyworld",
            json=json.loads((BACKEND_FIXTURES / "duck_storyworld.json").read_text()),
        )
        client.post(
            "/projects/duck/batches",
            content=(BACKEND_FIXTURES / "duck_batch_v1.json").read_bytes(),
        )
        for name, values in [
            ("ducks_advantage", ["low", "medium", "high"]),
            ("duckling_behavior", ["passive", "neutral", "proactive"]),
        ]:
            job = client.post(
                "/projects/duck/dimensions",
                json={"mode": "author", "name": name, "values": values},
            ).json()
            assert client.get(f"/jobs/{job['job_id']}").json()["status"] == "done"

        write(
            "bsv_d1_timeline.json",
            client.get("/projects/duck/bsv", params={"dims": "ducks_advantage"}).json(),
        )
        write(
            "bsv_d1_compact.json",
            client.get(
                "/projects/duck/bsv",
                params={"dims": "ducks_advantage", "view": "compact_1d"},
            ).json(),
        )
        write(
            "bsv_d1_d2_grid.json",
            client.get(
                "/projects/duck/bsv",
                params={"dims": "ducks_advantage,duckling_behavior", "view": "grid_2d"},
            ).json(),
        )
        write(
            "highlight_storyline_s2.json",
            client.get(
                "/projects/duck/highlight",
                params={"by": "storyline", "storyline_id": "s2"},
            ).json(),
        )
        write(
            "highlight_value_proactive.json",
            client.get(
                "/projects/duck/highlight",
                params={"by": "value", "value": "proactive", "dims": "duckling_behavior"},
            ).json(),
        )
        write(
            "highlight_timestep_2.json",
            client.get(
                "/projects/duck/highlight", params={"by": "timestep", "t": 2}
            ).json(),
        )

        # a three-round playtest transcript plus its batch-file export
        url = "/projects/duck/playtest/chat1"
        client.post(
            "/projects/duck/rules",
            json={
                "id": "confront",
                "condition": "The duckling personally stands up to the goose.",
                "effect": "The goose backs down.",
            },
        )
        steps = [
            client.post(url, json={"action": "start"}).json(),
            client.post(url, json={"action": "player", "text": "I look around."}).json(),
            client.post(
                url, json={"action": "player", "text": "I stand up to the goose!"}
            ).json(),
            client.post(url, json={"action": "player", "text": "I hold my ground."}).json(),
        ]
        write("playtest_steps.json", steps)
        write("playtest_export.json", client.get(f"{url}/export").json())


if __name__ == "__main__":
    main()
