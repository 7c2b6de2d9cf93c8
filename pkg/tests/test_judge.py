import json
import threading

import numpy as np

import pytest

from tsteval.corpus import EvaluationInstance
from tsteval.judge import (
    BINARY,
    LIKERT,
    TEMPLATES,
    JudgeConfig,
    cache_key,
    judge_batch,
    normalize_rating,
    parse_rating,
    render_prompt,
    responses_to_columns,
)
from tsteval.metaeval import spearman

S1 = "so he can charge a bloody fortune for them."
S2 = "so he can charge a fair amount of money for them."


def make_instance(direction="neg→pos", iid="ex-1"):
    return EvaluationInstance(
        instance_id=iid,
        language="en",
        task="sentiment_transfer",
        direction=direction,
        system_id="sys",
        source_text=S1,
        generated_text=S2,
        reference_text=None,
        target_style_label=1,
        human_ratings={},
    )


class TestRenderPrompt:
    @pytest.mark.parametrize(
        "template_id,direction",
        [
            ("style_likert", "neg→pos"),
            ("style_binary", "pos→neg"),
            ("content_likert", "neg→pos"),
            ("fluency_likert", "neg→pos"),
        ],
    )
    def test_byte_exact_against_golden(self, golden_dir, template_id, direction):
        rendered = render_prompt(TEMPLATES[template_id], make_instance(direction))
        golden = (golden_dir / "prompts" / f"{template_id}.txt").read_bytes()
        assert rendered.encode("utf-8") == golden

    def test_terminal_lines(self):
        likert = render_prompt(TEMPLATES["style_likert"], make_instance())
        assert likert.endswith("Sentiment transfer accuracy rating (on a scale of 1 to 5) =")
        binary = render_prompt(TEMPLATES["style_binary"], make_instance("pos→neg"))
        assert binary.endswith("classification (0 or 1) =")

    def test_fluency_uses_only_generated(self):
        prompt = render_prompt(TEMPLATES["fluency_likert"], make_instance())
        assert S2 in prompt
        assert S1 not in prompt
        assert "S1" not in prompt

    def test_overall_template_renders(self):
        prompt = render_prompt(TEMPLATES["overall_likert"], make_instance())
        assert prompt.endswith("Overall quality rating (on a scale of 1 to 5) =")

    def test_unknown_task_rejected(self):
        inst = make_instance()
        object.__setattr__(inst, "task", "limerick_style")
        with pytest.raises(ValueError, match="no task phrases"):
            render_prompt(TEMPLATES["style_likert"], inst)


class TestParseRating:
    def test_plain_number(self):
        assert parse_rating("Rating = 4", LIKERT) == 4.0

    def test_binary_phrase(self):
        assert parse_rating("I'd say 1", BINARY) == 1.0

    def test_no_number_is_none(self):
        assert parse_rating("excellent", LIKERT) is None

    def test_out_of_range_is_none(self):
        assert parse_rating("I rate it 7", LIKERT) is None
        assert parse_rating("output: 2", BINARY) is None

    def test_half_steps_accepted(self):
        assert parse_rating("3.5", LIKERT) == 3.5
        assert parse_rating("3.7", LIKERT) is None

    def test_last_number_wins(self):
        assert parse_rating("between 2 and 4, final: 3", LIKERT) == 3.0

    def test_never_raises_on_junk(self):
        for junk in ("", "NaN-ish 9.9.9", "①", "ok."):
            assert parse_rating(junk, LIKERT) is None


class TestNormalizeRating:
    def test_likert_mapping(self):
        assert normalize_rating(1.0, LIKERT) == 0.0
        assert normalize_rating(5.0, LIKERT) == 1.0
        assert normalize_rating(3.0, LIKERT) == 0.5

    def test_binary_passthrough(self):
        assert normalize_rating(1.0, BINARY) == 1.0

    def test_rank_invariance(self):
        raw = [1.0, 4.0, 2.0, 5.0, 3.0, 2.5]
        normalized = [normalize_rating(v, LIKERT) for v in raw]
        assert spearman(raw, normalized) == pytest.approx(1.0)
        rng = np.random.default_rng(8)
        for _ in range(1000):
            raw = list(rng.integers(2, 11, size=8) / 2.0)
            normalized = [normalize_rating(v, LIKERT) for v in raw]
            got = spearman(raw, normalized)
            if got is not None:
                assert got == pytest.approx(1.0)


class FakeEndpoint:
    def __init__(self, model_id="fake-model", fail_keys=(), flaky_keys=()):
        self.model_id = model_id
        self.calls = 0
        self.fail_keys = set(fail_keys)
        self.flaky = dict.fromkeys(flaky_keys, 0)
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.calls += 1
        for key in self.fail_keys:
            if key in prompt:
                raise RuntimeError("boom")
        for key, seen in self.flaky.items():
            if key in prompt:
                self.flaky[key] = seen + 1
                if seen == 0:
                    raise RuntimeError("transient")
        return "I would rate this 4"


def config(tmp_path, **kw):
    defaults = dict(cache_path=tmp_path / "cache.jsonl", max_retries=2, backoff_s=0.0)
    defaults.update(kw)
    return JudgeConfig(**defaults)


class TestJudgeBatch:
    def test_cold_cache_calls_endpoint_and_populates(self, tmp_path):
        instances = [make_instance(iid=f"i{k}") for k in range(10)]
        endpoint = FakeEndpoint()
        templates = [TEMPLATES["style_likert"]]
        responses = judge_batch(instances, templates, config(tmp_path), endpoint)
        assert len(responses) == 10
        assert endpoint.calls == 10
        assert all(r.parsed == 4.0 for r in responses)
        cache_lines = (tmp_path / "cache.jsonl").read_text().strip().splitlines()
        assert len(cache_lines) == 10

    def test_warm_cache_makes_no_calls(self, tmp_path):
        instances = [make_instance(iid=f"i{k}") for k in range(10)]
        endpoint = FakeEndpoint()
        templates = [TEMPLATES["style_likert"]]
        judge_batch(instances, templates, config(tmp_path), endpoint)
        endpoint.calls = 0
        responses = judge_batch(instances, templates, config(tmp_path), endpoint)
        assert endpoint.calls == 0
        assert all(r.cached for r in responses)

    def test_offline_with_miss_lists_keys(self, tmp_path):
        instances = [make_instance(iid="i0"), make_instance(iid="i1")]
        templates = [TEMPLATES["style_likert"]]
        judge_batch(instances[:1], templates, config(tmp_path), FakeEndpoint())
        with pytest.raises(RuntimeError, match=r"\(i1, style_likert\)"):
            judge_batch(
                instances, templates, config(tmp_path),
                endpoint=None, model_id="fake-model",
            )

    def test_offline_replay_is_deterministic(self, tmp_path):
        instances = [make_instance(iid=f"i{k}") for k in range(5)]
        templates = [TEMPLATES["style_likert"], TEMPLATES["content_likert"]]
        judge_batch(instances, templates, config(tmp_path), FakeEndpoint())
        r1 = judge_batch(instances, templates, config(tmp_path), None, model_id="fake-model")
        r2 = judge_batch(instances, templates, config(tmp_path), None, model_id="fake-model")
        assert r1 == r2
        cols1 = responses_to_columns(r1, "fake")
        cols2 = responses_to_columns(r2, "fake")
        assert json.dumps(cols1, sort_keys=True) == json.dumps(cols2, sort_keys=True)

    def test_exhausted_retries_recorded_as_failure(self, tmp_path):
        instances = [make_instance(iid="ok"), make_instance(iid="bad")]
        # the failing instance is identified through its rendered prompt:
        # give it a unique generated sentence
        object.__setattr__(instances[1], "generated_text", "UNLUCKY SENTENCE")
        endpoint = FakeEndpoint(fail_keys=["UNLUCKY"])
        templates = [TEMPLATES["style_likert"]]
        responses = judge_batch(instances, templates, config(tmp_path), endpoint)
        by_id = {r.instance_id: r for r in responses}
        assert by_id["ok"].parsed == 4.0
        assert by_id["bad"].parsed is None
        assert by_id["bad"].error is not None
        # failure is cached: offline replay reproduces the null
        replay = judge_batch(instances, templates, config(tmp_path), None, model_id="fake-model")
        assert {r.instance_id: r.parsed for r in replay} == {"ok": 4.0, "bad": None}

    def test_retry_recovers_from_transient_error(self, tmp_path):
        instances = [make_instance(iid="flaky")]
        object.__setattr__(instances[0], "generated_text", "FLAKY SENTENCE")
        endpoint = FakeEndpoint(flaky_keys=["FLAKY"])
        responses = judge_batch(
            instances, [TEMPLATES["style_likert"]], config(tmp_path), endpoint
        )
        assert responses[0].parsed == 4.0

    def test_concurrent_batch_consistent(self, tmp_path):
        instances = [make_instance(iid=f"i{k}") for k in range(20)]
        endpoint = FakeEndpoint()
        responses = judge_batch(
            instances,
            [TEMPLATES["style_likert"]],
            config(tmp_path, max_in_flight=8),
            endpoint,
        )
        assert [r.instance_id for r in responses] == [f"i{k}" for k in range(20)]
        assert endpoint.calls == 20


def test_cache_key_stable():
    assert cache_key("style_likert", "i1", "m") == cache_key("style_likert", "i1", "m")
    assert cache_key("style_likert", "i1", "m") != cache_key("style_likert", "i2", "m")
