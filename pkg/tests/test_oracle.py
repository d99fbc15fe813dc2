import hashlib

import pytest

from storybundle.oracle import (
    Fixture,
    MockOracle,
    NoFixtureError,
    Oracle,
    OracleError,
    OracleRefusal,
    OracleRequest,
    load_fixtures,
)


def req(prompt="hello world", purpose="summarize", **kw):
    return OracleRequest.make("t", prompt, purpose, **kw)


class TestRequest:
    def test_defaults_by_purpose(self):
        assert req(purpose="classify").sampling.temperature == 0.0
        assert req(purpose="rule_check").sampling.temperature == 0.0
        assert req(purpose="gm_turn").sampling.temperature == 0.7
        assert req(purpose="gm_turn", temperature=0.2).sampling.temperature == 0.2

    def test_rejects_bad_purpose_and_empty_prompt(self):
        with pytest.raises(ValueError):
            req(purpose="translate")
        with pytest.raises(ValueError):
            req(prompt="")

    def test_content_hash(self):
        expected = hashlib.sha256(b"hello world").hexdigest()
        assert req().content_hash() == expected


class TestMockOracle:
    def test_first_match_wins(self):
        oracle = MockOracle(
            [
                Fixture("keyword", "hello", "first"),
                Fixture("keyword", "hello", "second"),
            ]
        )
        assert oracle.complete(req(purpose="gm_turn")) == "first"

    def test_keyword_list_means_all_of(self):
        oracle = MockOracle([Fixture("keyword", ["hello", "absent"], "x")], strict=False)
        assert oracle.complete(req(purpose="gm_turn")) == ""
        oracle2 = MockOracle([Fixture("keyword", ["hello", "world"], "x")])
        assert oracle2.complete(req(purpose="gm_turn")) == "x"

    def test_purpose_filter(self):
        oracle = MockOracle(
            [
                Fixture("keyword", "hello", "only-gm", purpose="gm_turn"),
                Fixture("keyword", "hello", "fallback"),
            ]
        )
        assert oracle.complete(req(purpose="gm_turn")) == "only-gm"
        assert oracle.complete(req(purpose="player_turn")) == "fallback"

    def test_exact_hash_match(self):
        r = req(purpose="gm_turn")
        oracle = MockOracle([Fixture("exact_hash", r.content_hash(), "hit")])
        assert oracle.complete(r) == "hit"

    def test_strict_raises_and_records_request(self):
        oracle = MockOracle([])
        with pytest.raises(NoFixtureError):
            oracle.complete(req(purpose="gm_turn"))
        assert len(oracle.requests) == 1
        assert oracle.requests[0].purpose == "gm_turn"

    def test_scripted_refusal(self):
        oracle = MockOracle([Fixture("keyword", "hello", "", refusal=True)])
        with pytest.raises(OracleRefusal):
            oracle.complete(req(purpose="gm_turn"))


class TestCachingAndRetry:
    def test_summarize_cached_by_hash(self):
        oracle = MockOracle([Fixture("keyword", "hello", "s")])
        for _ in range(3):
            assert oracle.complete(req()) == "s"
        assert oracle.call_count == 1
        oracle.complete(req(prompt="hello again"))
        assert oracle.call_count == 2

    def test_gm_turn_not_cached(self):
        oracle = MockOracle([Fixture("keyword", "hello", "g")])
        oracle.complete(req(purpose="gm_turn"))
        oracle.complete(req(purpose="gm_turn"))
        assert oracle.call_count == 2

    def test_transient_errors_retried(self):
        class Flaky(Oracle):
            def __init__(self):
                super().__init__(max_attempts=3, backoff=0.0)
                self.failures = 2

            def _complete(self, request):
                if self.failures:
                    self.failures -= 1
                    raise OracleError("transient")
                return "ok"

        assert Flaky().complete(req(purpose="gm_turn")) == "ok"

    def test_retry_budget_exhausted(self):
        class AlwaysDown(Oracle):
            def _complete(self, request):
                raise OracleError("down")

        oracle = AlwaysDown(max_attempts=2, backoff=0.0)
        with pytest.raises(OracleError, match="after 2 attempts"):
            oracle.complete(req(purpose="gm_turn"))
        assert oracle.call_count == 2

    def test_refusal_never_retried(self):
        class Refuses(Oracle):
            def _complete(self, request):
                raise OracleRefusal("no")

        oracle = Refuses(max_attempts=3, backoff=0.0)
        with pytest.raises(OracleRefusal):
            oracle.complete(req(purpose="gm_turn"))
        assert oracle.call_count == 1


class TestLoadFixtures:
    def test_load_directory(self, tmp_path):
        (tmp_path / "a.json").write_text(
            '{"fixtures": [{"match": "keyword", "pattern": "x", "response": "ra"}]}'
        )
        (tmp_path / "b.json").write_text(
            '{"fixtures": [{"match": "keyword", "pattern": "y", "response": "rb", '
            '"purpose": "classify", "refusal": true}]}'
        )
        fixtures = load_fixtures(tmp_path)
        assert [f.response for f in fixtures] == ["ra", "rb"]
        assert fixtures[1].purpose == "classify" and fixtures[1].refusal

    def test_load_single_file(self, tmp_path):
        f = tmp_path / "only.json"
        f.write_text('{"fixtures": [{"match": "keyword", "pattern": "z", "response": "r"}]}')
        assert len(load_fixtures(f)) == 1
