"""LLM-as-judge: prompt rendering, rating parsing, cached batch calls.

Prompt templates cover four rating dimensions plus a binary style check.
The overall-quality template is a reconstruction in the same house style
(the source wording for it is not published). The endpoint abstraction is
one ``complete(prompt) -> text`` call; no vendor specifics live here.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .corpus import EvaluationInstance

logger = logging.getLogger(__name__)

LIKERT = "likert_1_5"
BINARY = "binary_0_1"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    scale: str


TEMPLATES: dict[str, PromptTemplate] = {
    "style_likert": PromptTemplate(
        "style_likert",
        "{task_definition}\n"
        "\n"
        "Please rate the {style_noun} transfer accuracy of the {direction} "
        "{style_noun} transfer task between the following {language} source "
        "sentence S1 and the {style_noun}-transferred sentence S2. Use a scale "
        "of 1 to 5, where 1 indicates that the {style_noun} in S1 is completely "
        "identical to the {style_noun} in S2, and 5 indicates that the "
        "{style_noun} has been completely transferred to the target "
        "{style_noun} in S2.\n"
        "\n"
        "S1: {S1} S2: {S2}\n"
        "\n"
        "{style_noun_title} transfer accuracy rating (on a scale of 1 to 5) =",
        LIKERT,
    ),
    "style_binary": PromptTemplate(
        "style_binary",
        "{task_definition}\n"
        "\n"
        "Please act as a binary classifier to evaluate the {style_noun} "
        "transfer accuracy of the {direction} {style_noun} transfer task in "
        "{language}. Determine whether the target {style_noun} has been "
        "successfully transferred to the generated sentence (S2) from the "
        "source sentence (S1). If the target {style_noun} has been "
        "successfully transferred to S2, output '1'. If the target "
        "{style_noun} has not been successfully transferred to S2, output '0'.\n"
        "\n"
        "S1: {S1} S2: {S2}\n"
        "\n"
        "{style_noun_title} transfer accuracy classification (0 or 1) =",
        BINARY,
    ),
    "content_likert": PromptTemplate(
        "content_likert",
        "{content_task_definition}\n"
        "\n"
        "Please rate the content preservation between the following {language} "
        "source sentence S1 and the {style_noun}-transferred sentence S2 for "
        "the {direction} {style_noun} transfer task on a scale of 1 to 5, "
        "where 1 indicates very low content preservation and 5 indicates very "
        "high content preservation. To determine the content preservation "
        "between these two sentences, consider only the information conveyed "
        "by the sentences and ignore any differences in {style_noun} due to "
        "the {direction} {style_noun} transfer.\n"
        "\n"
        "S1: {S1} S2: {S2}\n"
        "\n"
        "Content Preservation rating (on a scale of 1 to 5) =",
        LIKERT,
    ),
    "fluency_likert": PromptTemplate(
        "fluency_likert",
        "Please rate the fluency of the following {language} sentence S on a "
        "scale of 1 to 5, where 1 represents poor fluency, and 5 represents "
        "excellent fluency.\n"
        "\n"
        "S: {S}\n"
        "\n"
        "Fluency rating (on a scale of 1 to 5) =",
        LIKERT,
    ),
    # Reconstructed in-house: no published wording exists for this one.
    "overall_likert": PromptTemplate(
        "overall_likert",
        "{task_definition}\n"
        "\n"
        "Please rate the overall quality of the {direction} {style_noun} "
        "transfer task between the following {language} source sentence S1 "
        "and the {style_noun}-transferred sentence S2. Use a scale of 1 to 5, "
        "where 1 indicates very low overall quality and 5 indicates very high "
        "overall quality, considering {style_noun} transfer accuracy, content "
        "preservation, and fluency together.\n"
        "\n"
        "S1: {S1} S2: {S2}\n"
        "\n"
        "Overall quality rating (on a scale of 1 to 5) =",
        LIKERT,
    ),
}


@dataclass(frozen=True)
class TaskPhrases:
    style_noun: str
    task_definition: str
    content_task_definition: str


_TASK_PHRASES: dict[str, TaskPhrases] = {
    "sentiment_transfer": TaskPhrases(
        style_noun="sentiment",
        task_definition=(
            "Sentiment transfer task: transfer the sentiment of a sentence "
            "(from positive to negative or negative to positive) while keeping "
            "the rest of the sentiment-independent content unchanged."
        ),
        content_task_definition=(
            "Sentiment transfer task: transfer the sentiment of a sentence "
            "(from positive to negative or negative to positive) while keeping "
            "the rest of the content unchanged."
        ),
    ),
    "detoxification": TaskPhrases(
        style_noun="style",
        task_definition=(
            "Text detoxification task: transfer the style of a sentence from "
            "toxic to clean while keeping the rest of the style-independent "
            "content unchanged."
        ),
        content_task_definition=(
            "Text detoxification task: transfer the style of a sentence from "
            "toxic to clean while keeping the rest of the content unchanged."
        ),
    ),
}

_DIRECTION_WORDS = {
    "pos→neg": "positive to negative",
    "neg→pos": "negative to positive",
    "toxic→clean": "toxic to clean",
}

_LANGUAGE_NAMES = {"en": "English", "hi": "Hindi", "bn": "Bengali"}


def register_task_phrases(task: str, phrases: TaskPhrases) -> None:
    _TASK_PHRASES[task] = phrases


def direction_words(direction: str) -> str:
    if direction in _DIRECTION_WORDS:
        return _DIRECTION_WORDS[direction]
    return direction.replace("→", " to ").replace("->", " to ")


def render_prompt(template: PromptTemplate, instance: EvaluationInstance) -> str:
    """Instantiate a template with one instance's sentences and task words."""
    if instance.task not in _TASK_PHRASES:
        raise ValueError(
            f"no task phrases registered for task {instance.task!r}; "
            "call register_task_phrases first"
        )
    phrases = _TASK_PHRASES[instance.task]
    slots = {
        "task_definition": phrases.task_definition,
        "content_task_definition": phrases.content_task_definition,
        "style_noun": phrases.style_noun,
        "style_noun_title": phrases.style_noun.capitalize(),
        "direction": direction_words(instance.direction),
        "language": _LANGUAGE_NAMES.get(instance.language, instance.language),
        "S1": instance.source_text,
        "S2": instance.generated_text,
        "S": instance.generated_text,
    }
    try:
        return template.body.format(**slots)
    except KeyError as exc:
        raise ValueError(f"template slot {exc} cannot be filled") from exc


_NUMBER_RE = re.compile(r"(?<![\w.])\d+(?:\.\d+)?(?![\w.])")


def parse_rating(raw: str, scale: str) -> float | None:
    """Extract the last standalone number; None when absent or out of scale.

    Likert accepts integers or halves in 1..5; binary accepts 0 or 1.
    Failures are logged with the raw text, never raised.
    """
    matches = _NUMBER_RE.findall(raw)
    if not matches:
        logger.warning("no rating found in judge output: %r", raw)
        return None
    value = float(matches[-1])
    if scale == LIKERT:
        if 1.0 <= value <= 5.0 and float(value * 2).is_integer():
            return value
    elif scale == BINARY:
        if value in (0.0, 1.0):
            return value
    else:
        raise ValueError(f"unknown scale {scale!r}")
    logger.warning("rating %s out of range for %s: %r", value, scale, raw)
    return None


def normalize_rating(value: float, scale: str) -> float:
    """Map a rating onto [0, 1]; strictly monotone, so ranks are unchanged."""
    if scale == LIKERT:
        return (value - 1.0) / 4.0
    if scale == BINARY:
        return value
    raise ValueError(f"unknown scale {scale!r}")


@dataclass
class JudgeResponse:
    instance_id: str
    template_id: str
    raw_text: str
    parsed: float | None
    model_id: str
    cached: bool
    error: str | None = None


class Endpoint(Protocol):
    model_id: str

    def complete(self, prompt: str) -> str: ...


class HttpEndpoint:
    """Minimal JSON-over-HTTP completion client.

    POSTs ``{"model", "prompt", "temperature", "max_tokens"}`` to the base
    URL and reads the completion from the response's ``text`` field. The
    bearer token, if any, comes from the named environment variable.
    """

    def __init__(
        self,
        base_url: str,
        model_id: str,
        auth_env: str | None = None,
        timeout: float = 30.0,
        temperature: float = 0.0,
        max_tokens: int = 16,
    ):
        self.base_url = base_url
        self.model_id = model_id
        self.auth_env = auth_env
        self.timeout = timeout
        self.temperature = temperature
        self.max_tokens = max_tokens

    def complete(self, prompt: str) -> str:
        import requests

        headers = {}
        if self.auth_env:
            token = os.environ.get(self.auth_env)
            if not token:
                raise RuntimeError(f"auth env var {self.auth_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        resp = requests.post(
            self.base_url,
            json={
                "model": self.model_id,
                "prompt": prompt,
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            },
            headers=headers,
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()["text"]


def cache_key(template_id: str, instance_id: str, model_id: str) -> str:
    payload = "\x1f".join((template_id, instance_id, model_id))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class JudgeCache:
    """Append-only JSONL cache with single-writer discipline."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, dict] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._records[rec["key"]] = rec

    def get(self, key: str) -> dict | None:
        return self._records.get(key)

    def append(self, record: dict) -> None:
        with self._lock:
            self._records[record["key"]] = record
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                fh.flush()


@dataclass
class JudgeConfig:
    cache_path: str | Path
    max_in_flight: int = 4
    max_retries: int = 3
    backoff_s: float = 0.5
    min_interval_s: float = 0.0


class _RateLimiter:
    def __init__(self, min_interval_s: float):
        self.min_interval_s = min_interval_s
        self._lock = threading.Lock()
        self._last = 0.0

    def wait(self) -> None:
        if self.min_interval_s <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._last + self.min_interval_s - now
            if delay > 0:
                time.sleep(delay)
            self._last = time.monotonic()


def judge_batch(
    instances: Sequence[EvaluationInstance],
    templates: Iterable[PromptTemplate],
    config: JudgeConfig,
    endpoint: Endpoint | None = None,
    model_id: str | None = None,
) -> list[JudgeResponse]:
    """One response per (instance, template), cache-first.

    Without an endpoint the cache must cover every request (offline replay);
    otherwise misses are fetched concurrently with retries and appended to
    the cache, so the next run is fully offline-reproducible.
    """
    templates = list(templates)
    if endpoint is None and model_id is None:
        raise ValueError("offline mode needs an explicit model_id to key the cache")
    model = model_id if model_id is not None else endpoint.model_id
    cache = JudgeCache(config.cache_path)

    requests_list = []
    for inst in instances:
        for tmpl in templates:
            key = cache_key(tmpl.template_id, inst.instance_id, model)
            requests_list.append((inst, tmpl, key))

    missing = [item for item in requests_list if cache.get(item[2]) is None]
    if missing and endpoint is None:
        listing = ", ".join(
            f"({inst.instance_id}, {tmpl.template_id})" for inst, tmpl, _ in missing
        )
        raise RuntimeError(f"offline judge run with cache misses: {listing}")

    limiter = _RateLimiter(config.min_interval_s)

    def fetch(item) -> None:
        inst, tmpl, key = item
        prompt = render_prompt(tmpl, inst)
        last_error = None
        for attempt in range(config.max_retries):
            limiter.wait()
            try:
                raw = endpoint.complete(prompt)
                cache.append({"key": key, "prompt": prompt, "raw_text": raw,
                              "timestamp": time.time()})
                return
            except Exception as exc:  # endpoint failures become null scores
                last_error = str(exc)
                logger.warning(
                    "judge call failed (%s, %s) attempt %d/%d: %s",
                    inst.instance_id, tmpl.template_id, attempt + 1,
                    config.max_retries, exc,
                )
                time.sleep(config.backoff_s * (2**attempt))
        cache.append({"key": key, "prompt": prompt, "raw_text": "",
                      "timestamp": time.time(), "error": last_error})

    if missing:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            list(pool.map(fetch, missing))

    missing_keys = {key for _, _, key in missing}
    responses = []
    for inst, tmpl, key in requests_list:
        rec = cache.get(key)
        error = rec.get("error")
        parsed = None if error else parse_rating(rec["raw_text"], tmpl.scale)
        responses.append(
            JudgeResponse(
                instance_id=inst.instance_id,
                template_id=tmpl.template_id,
                raw_text=rec["raw_text"],
                parsed=parsed,
                model_id=model,
                cached=key not in missing_keys,
                error=error,
            )
        )
    return responses


def responses_to_columns(
    responses: Sequence[JudgeResponse], model_key: str
) -> dict[str, dict[str, float]]:
    """Group parsed ratings into metric columns keyed by model and template."""
    out: dict[str, dict[str, float]] = {}
    for resp in responses:
        if resp.parsed is None:
            continue
        metric_id = f"{model_key}_{resp.template_id}"
        out.setdefault(metric_id, {})[resp.instance_id] = resp.parsed
    return out
