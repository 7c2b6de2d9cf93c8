"""Scoring engine: computes requested metric columns over a dataset.

Missing inputs (no embeddings file, absent reference, unparseable side
artifact) yield null cells or null columns with warnings; they never abort
a run. Unknown metric ids fail fast before any computation.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import overlap, style
from .corpus import (
    Dataset,
    DataError,
    EvaluationInstance,
    ScoreTable,
    SideArtifacts,
    load_dataset,
    load_side_artifacts,
)
from .embedding import EmbeddedSentence, bert_score, sentence_cosine, wmd
from .registry import MetricRegistry
from .structural import (
    DependencyTree,
    SemanticGraph,
    dep_to_amr_style,
    parse_conllu_file,
    parse_penman_file,
    smatch,
    ted,
)

logger = logging.getLogger(__name__)

_JUDGE_COLUMN_RE = re.compile(
    r"^(?P<model>\w+)_(?P<template>style_likert|style_binary|content_likert|"
    r"fluency_likert|overall_likert)$"
)


class ConfigError(ValueError):
    """Bad run configuration (unknown metric, missing key, bad value)."""


@dataclass
class RunConfig:
    """Declarative per-run configuration; flags may override single keys."""

    dataset: Path
    style_dists: Path | None = None
    tokens: Path | None = None
    external_scores: Path | None = None
    parses: Path | None = None
    amrs: Path | None = None
    # one shared lexicon file, or one per language tag
    lexicon: Path | dict[str, Path] | None = None
    metrics: list[str] = field(default_factory=list)
    mode: str = "reference_free"
    dimension: str | None = None
    seed: int = 0
    workers: int = 1
    out_dir: Path = Path("out")
    kl_direction: str = "p_q"
    ted_label: str = "deprel_upos"
    smatch_restarts: int = 4
    wmd_cells_cap: int = 4096
    enable_shifts: bool = True
    judge: dict[str, Any] = field(default_factory=dict)
    ensemble: dict[str, Any] = field(default_factory=dict)
    overall: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict[str, Any] | None = None) -> "RunConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}")
        if overrides:
            raw.update({k: v for k, v in overrides.items() if v is not None})
        base = path.parent

        def p(key: str) -> Path | None:
            value = raw.get(key)
            return None if value is None else (base / value)

        if "dataset" not in raw:
            raise ConfigError(f"{path}: config must name a dataset")
        lexicon_raw = raw.get("lexicon")
        lexicon: Path | dict[str, Path] | None
        if lexicon_raw is None:
            lexicon = None
        elif isinstance(lexicon_raw, dict):
            lexicon = {lang: base / rel for lang, rel in lexicon_raw.items()}
        else:
            lexicon = base / lexicon_raw
        cfg = cls(
            dataset=base / raw["dataset"],
            style_dists=p("style_dists"),
            tokens=p("tokens"),
            external_scores=p("external_scores"),
            parses=p("parses"),
            amrs=p("amrs"),
            lexicon=lexicon,
            metrics=list(raw.get("metrics", [])),
            mode=raw.get("mode", "reference_free"),
            dimension=raw.get("dimension"),
            seed=int(raw.get("seed", 0)),
            workers=int(raw.get("workers", 1)),
            out_dir=base / raw.get("out_dir", "out"),
            kl_direction=raw.get("kl_direction", "p_q"),
            ted_label=raw.get("ted_label", "deprel_upos"),
            smatch_restarts=int(raw.get("smatch_restarts", 4)),
            wmd_cells_cap=int(raw.get("wmd_cells_cap", 4096)),
            enable_shifts=bool(raw.get("enable_shifts", True)),
            judge=raw.get("judge", {}),
            ensemble=raw.get("ensemble", {}),
            overall=raw.get("overall", {}),
            raw=raw,
        )
        if cfg.mode not in ("reference_free", "reference_based"):
            raise ConfigError(f"unknown mode {cfg.mode!r}")
        if cfg.kl_direction not in ("p_q", "q_p"):
            raise ConfigError(f"unknown kl_direction {cfg.kl_direction!r}")
        return cfg


@dataclass
class RunInputs:
    dataset: Dataset
    artifacts: SideArtifacts
    dep_trees: dict[tuple[str, str], DependencyTree]
    amr_graphs: dict[tuple[str, str], SemanticGraph]
    lexicon: frozenset[str]
    lexicons_by_language: dict[str, frozenset[str]]

    def lexicon_for(self, language: str) -> frozenset[str]:
        return self.lexicons_by_language.get(language, self.lexicon)


def load_run_inputs(cfg: RunConfig) -> RunInputs:
    dataset = load_dataset(cfg.dataset)
    artifacts = load_side_artifacts(
        dataset,
        style_dists_path=cfg.style_dists,
        tokens_path=cfg.tokens,
        external_scores_path=cfg.external_scores,
    )
    dep_trees: dict[tuple[str, str], DependencyTree] = {}
    if cfg.parses is not None:
        dep_trees = parse_conllu_file(Path(cfg.parses).read_text(encoding="utf-8"))
    amr_graphs: dict[tuple[str, str], SemanticGraph] = {}
    if cfg.amrs is not None:
        amr_graphs = parse_penman_file(Path(cfg.amrs).read_text(encoding="utf-8"))
    lexicon: frozenset[str] = frozenset()
    by_language: dict[str, frozenset[str]] = {}
    if isinstance(cfg.lexicon, dict):
        by_language = {
            lang: overlap.load_lexicon(path) for lang, path in cfg.lexicon.items()
        }
    elif cfg.lexicon is not None:
        lexicon = overlap.load_lexicon(cfg.lexicon)
    return RunInputs(dataset, artifacts, dep_trees, amr_graphs, lexicon, by_language)


class ScoringContext:
    def __init__(self, cfg: RunConfig, inputs: RunInputs):
        self.cfg = cfg
        self.inputs = inputs
        self.mode = cfg.mode
        self.cmp_slot = "source" if cfg.mode == "reference_free" else "reference"

    def cmp_text(self, inst: EvaluationInstance) -> str | None:
        return (
            inst.source_text if self.mode == "reference_free" else inst.reference_text
        )

    def tokens(self, inst: EvaluationInstance, slot: str) -> list[str] | None:
        ann = self.inputs.artifacts.tokens.get((inst.instance_id, slot))
        if ann is not None:
            return list(ann.tokens)
        text = {
            "source": inst.source_text,
            "generated": inst.generated_text,
            "reference": inst.reference_text,
        }.get(slot)
        if text is None:
            return None
        return overlap.simple_tokenize(text)

    def mask_flags(self, inst: EvaluationInstance, slot: str):
        ann = self.inputs.artifacts.tokens.get((inst.instance_id, slot))
        return None if ann is None else ann.mask_flags

    def embedded(self, inst: EvaluationInstance, slot: str) -> EmbeddedSentence | None:
        ann = self.inputs.artifacts.tokens.get((inst.instance_id, slot))
        if ann is None or ann.embeddings is None:
            return None
        return EmbeddedSentence.from_annotation(ann)

    def sentence_vector(self, inst: EvaluationInstance, slot: str):
        ann = self.inputs.artifacts.tokens.get((inst.instance_id, slot))
        if ann is None or ann.sentence_embedding is None:
            return None
        return ann.sentence_embedding

    def dist(self, inst: EvaluationInstance, slot: str):
        return self.inputs.artifacts.style_dists.get((inst.instance_id, slot))

    def tree(self, inst: EvaluationInstance, slot: str):
        return self.inputs.dep_trees.get((inst.instance_id, slot))

    def graph(self, inst: EvaluationInstance, slot: str):
        return self.inputs.amr_graphs.get((inst.instance_id, slot))

    def pair_tokens(self, inst: EvaluationInstance):
        if self.cmp_text(inst) is None:
            return None
        cand = self.tokens(inst, "generated")
        cmp_toks = self.tokens(inst, self.cmp_slot)
        if cand is None or cmp_toks is None or not cand or not cmp_toks:
            return None
        return cand, cmp_toks


def _bleu(ctx: ScoringContext, inst) -> float | None:
    pair = ctx.pair_tokens(inst)
    return None if pair is None else overlap.bleu(pair[0], pair[1])


def _masked_bleu(ctx: ScoringContext, inst) -> float | None:
    pair = ctx.pair_tokens(inst)
    if pair is None:
        return None
    cand, ref = pair
    return overlap.masked_bleu(
        cand,
        ref,
        lexicon=ctx.inputs.lexicon_for(inst.language),
        cand_flags=ctx.mask_flags(inst, "generated"),
        ref_flags=ctx.mask_flags(inst, ctx.cmp_slot),
    )


def _rouge2(ctx, inst):
    pair = ctx.pair_tokens(inst)
    return None if pair is None else overlap.rouge_2(pair[0], pair[1])


def _rouge_l(ctx, inst):
    pair = ctx.pair_tokens(inst)
    return None if pair is None else overlap.rouge_l(pair[0], pair[1])


def _meteor(ctx, inst):
    pair = ctx.pair_tokens(inst)
    return None if pair is None else overlap.meteor(pair[0], pair[1])


def _ter(ctx, inst):
    pair = ctx.pair_tokens(inst)
    if pair is None:
        return None
    return overlap.ter(pair[0], pair[1], enable_shifts=ctx.cfg.enable_shifts)


def _pinc(ctx, inst):
    pair = ctx.pair_tokens(inst)
    return None if pair is None else overlap.pinc(pair[1], pair[0])


def _cosine(ctx, inst):
    a = ctx.sentence_vector(inst, "generated")
    b = ctx.sentence_vector(inst, ctx.cmp_slot)
    return None if a is None or b is None else sentence_cosine(a, b)


def _masked_cosine(ctx, inst):
    a = ctx.sentence_vector(inst, "generated_masked")
    b = ctx.sentence_vector(inst, ctx.cmp_slot + "_masked")
    return None if a is None or b is None else sentence_cosine(a, b)


def _wmd(ctx, inst):
    a = ctx.embedded(inst, "generated")
    b = ctx.embedded(inst, ctx.cmp_slot)
    if a is None or b is None:
        return None
    result = wmd(a, b, cells_cap=ctx.cfg.wmd_cells_cap)
    if result.approximate:
        logger.warning(
            "wmd for %s exceeded the exact-solve cap; relaxed bound used",
            inst.instance_id,
        )
    return result.value


def _bertscore(ctx, inst, use_idf=False):
    a = ctx.embedded(inst, "generated")
    b = ctx.embedded(inst, ctx.cmp_slot)
    if a is None or b is None:
        return None
    return bert_score(a, b, use_idf=use_idf).f1


def _dist_pair(ctx, inst):
    p = ctx.dist(inst, ctx.cmp_slot)
    q = ctx.dist(inst, "generated")
    if p is None or q is None:
        return None
    return p, q


def _sentence_accuracy(ctx, inst):
    q = ctx.dist(inst, "generated")
    return None if q is None else float(style.sentence_accuracy(q, inst.target_style_label))


def _classifier_confidence(ctx, inst):
    q = ctx.dist(inst, "generated")
    return None if q is None else style.classifier_confidence(q, inst.target_style_label)


def _emd(ctx, inst):
    pair = _dist_pair(ctx, inst)
    return None if pair is None else style.emd(pair[0], pair[1])


def _kl(ctx, inst):
    pair = _dist_pair(ctx, inst)
    if pair is None:
        return None
    p, q = pair
    if ctx.cfg.kl_direction == "q_p":
        p, q = q, p
    return style.kl_divergence(p, q)


def _js(ctx, inst):
    pair = _dist_pair(ctx, inst)
    return None if pair is None else style.js_divergence(pair[0], pair[1])


def _style_cosine(ctx, inst):
    pair = _dist_pair(ctx, inst)
    return None if pair is None else style.dist_cosine(pair[0], pair[1])


def _ted(ctx, inst):
    t1 = ctx.tree(inst, "generated")
    t2 = ctx.tree(inst, ctx.cmp_slot)
    if t1 is None or t2 is None:
        return None
    return ted(t1, t2, label=ctx.cfg.ted_label).normalized


def _smatch_dep(ctx, inst):
    t1 = ctx.tree(inst, "generated")
    t2 = ctx.tree(inst, ctx.cmp_slot)
    if t1 is None or t2 is None:
        return None
    g1 = dep_to_amr_style(t1)
    g2 = dep_to_amr_style(t2)
    return smatch(g1, g2, restarts=ctx.cfg.smatch_restarts, seed=ctx.cfg.seed).f1


def _smatch_amr(ctx, inst):
    g1 = ctx.graph(inst, "generated")
    g2 = ctx.graph(inst, ctx.cmp_slot)
    if g1 is None or g2 is None:
        return None
    return smatch(g1, g2, restarts=ctx.cfg.smatch_restarts, seed=ctx.cfg.seed).f1


_COMPUTED_METRICS: dict[str, Callable[[ScoringContext, EvaluationInstance], float | None]] = {
    "bleu": _bleu,
    "masked_bleu": _masked_bleu,
    "rouge2": _rouge2,
    "rouge_l": _rouge_l,
    "meteor": _meteor,
    "ter": _ter,
    "pinc": _pinc,
    "cosine": _cosine,
    "masked_cosine": _masked_cosine,
    "wmd": _wmd,
    "bertscore": _bertscore,
    "bertscore_idf": lambda ctx, inst: _bertscore(ctx, inst, use_idf=True),
    "sentence_accuracy": _sentence_accuracy,
    "classifier_confidence": _classifier_confidence,
    "emd": _emd,
    "kl": _kl,
    "js": _js,
    "style_cosine": _style_cosine,
    "ted": _ted,
    "smatch_dep": _smatch_dep,
    "smatch_amr": _smatch_amr,
}


def registry_from_config(cfg: RunConfig) -> MetricRegistry:
    """Default registry with any config-supplied descriptor overrides applied.

    Config key ``registry``: a list of ``{metric_id, dimension, orientation,
    normalization?, bounds?}`` objects; entries replace built-in defaults.
    """
    from .registry import MetricDescriptor

    registry = MetricRegistry()
    for entry in cfg.raw.get("registry", []):
        try:
            desc = MetricDescriptor(
                entry["metric_id"],
                entry["dimension"],
                entry["orientation"],
                normalization=entry.get("normalization", "minmax_per_dataset"),
                bounds=tuple(entry["bounds"]) if entry.get("bounds") else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad registry entry {entry!r}: {exc}") from exc
        registry.register(desc, replace=True)
    return registry


def resolve_metrics(metrics: list[str], registry: MetricRegistry) -> None:
    """Validate metric ids up front; auto-register judge-pattern columns."""
    if not metrics:
        raise ConfigError("empty metric list")
    for metric_id in metrics:
        if metric_id in registry:
            continue
        match = _JUDGE_COLUMN_RE.match(metric_id)
        if match:
            registry.register_judge_metric(match.group("model"), match.group("template"))
        else:
            raise ConfigError(f"unknown metric id {metric_id!r}")


def compute_scores(
    cfg: RunConfig,
    inputs: RunInputs,
    registry: MetricRegistry | None = None,
) -> tuple[ScoreTable, list[str]]:
    """Compute every requested metric column; returns the table and warnings."""
    registry = registry or MetricRegistry()
    resolve_metrics(cfg.metrics, registry)
    ctx = ScoringContext(cfg, inputs)
    table = ScoreTable(inputs.dataset.instance_ids)
    warnings: list[str] = []

    def column_for(metric_id: str) -> list[float | None]:
        fn = _COMPUTED_METRICS[metric_id]

        def one(inst: EvaluationInstance) -> float | None:
            try:
                return fn(ctx, inst)
            except (ValueError, DataError) as exc:
                logger.warning("%s on %s failed: %s", metric_id, inst.instance_id, exc)
                return None

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                return list(pool.map(one, inputs.dataset.instances))
        return [one(inst) for inst in inputs.dataset.instances]

    for metric_id in cfg.metrics:
        desc = registry.get(metric_id)
        meta = desc.column_meta(cfg.mode)
        if metric_id in _COMPUTED_METRICS:
            values = column_for(metric_id)
        else:
            scores = inputs.artifacts.external_scores.get(metric_id)
            if scores is None:
                warnings.append(
                    f"metric {metric_id!r}: no input available; column is all nulls"
                )
                values = [None] * len(table)
            else:
                values = [scores.get(iid) for iid in table.instance_ids]
        null_count = sum(v is None for v in values)
        if 0 < null_count < len(values):
            warnings.append(
                f"metric {metric_id!r}: {null_count}/{len(values)} instances null"
            )
        elif null_count == len(values) and metric_id in _COMPUTED_METRICS:
            warnings.append(
                f"metric {metric_id!r}: no input available; column is all nulls"
            )
        table.add_column(metric_id, values, meta)
    for message in warnings:
        logger.warning("%s", message)
    return table, warnings


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(cfg: RunConfig) -> str:
    payload = json.dumps(cfg.raw, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def write_manifest(
    cfg: RunConfig,
    out_dir: Path,
    name: str,
    outputs: list[str],
    extra: dict[str, Any] | None = None,
) -> Path:
    """Record config hash, seeds and input digests for reproducibility."""
    inputs = {}
    for attr in ("dataset", "style_dists", "tokens", "external_scores", "parses", "amrs", "lexicon"):
        value = getattr(cfg, attr)
        if value is None:
            continue
        entries = value.items() if isinstance(value, dict) else [(attr, value)]
        for key, input_path in entries:
            label = attr if key == attr else f"{attr}.{key}"
            if Path(input_path).exists():
                inputs[label] = {
                    "path": str(input_path),
                    "sha256": file_digest(input_path),
                }
    manifest = {
        "config_sha256": config_digest(cfg),
        "seed": cfg.seed,
        "mode": cfg.mode,
        "metrics": cfg.metrics,
        "inputs": inputs,
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    path = out_dir / f"{name}.manifest.json"
    path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path
