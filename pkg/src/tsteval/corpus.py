"""Evaluation data model, dataset ingestion, and side-artifact file formats.

All inputs are line-delimited JSON:

- ``dataset.jsonl``: one evaluation instance per line, optionally preceded by
  a header record declaring the human rating scale, e.g.
  ``{"rating_scale": [1, 5]}``.
- ``style_dists.jsonl``: ``{instance_id, slot, class_labels, probs}``.
- ``tokens.jsonl``: ``{instance_id, slot, tokens, embeddings?,
  sentence_embedding?, idf?, mask_flags?}``.
- ``external_scores.jsonl``: ``{instance_id, metric_id, value}``.

Loaded datasets are immutable in spirit: loaders validate once and callers
share the resulting objects freely across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping

import numpy as np

DIMENSIONS = ("style_accuracy", "content_preservation", "fluency", "overall")

#: Sentence slots referenced by side artifacts. The ``*_masked`` slots carry
#: adapter-supplied embeddings of masked sentences.
SLOTS = (
    "source",
    "generated",
    "reference",
    "source_masked",
    "generated_masked",
    "reference_masked",
)

KNOWN_LANGUAGES = ("en", "hi", "bn")
KNOWN_TASKS = ("sentiment_transfer", "detoxification")

PROB_SUM_TOL = 1e-6


class DataError(ValueError):
    """Malformed or inconsistent input data. Message names file/line/field."""


def _err(path: str | Path, lineno: int, msg: str) -> DataError:
    return DataError(f"{path}:{lineno}: {msg}")


@dataclass(frozen=True)
class RatingScale:
    """Inclusive bounds of the human rating scale declared by the dataset."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise DataError(f"invalid rating scale [{self.lo}, {self.hi}]")

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class EvaluationInstance:
    """One (source, generated, optional reference) triple with judgments."""

    instance_id: str
    language: str
    task: str
    direction: str
    system_id: str
    source_text: str
    generated_text: str
    reference_text: str | None
    target_style_label: int
    human_ratings: Mapping[str, float] = field(default_factory=dict)

    @property
    def has_reference(self) -> bool:
        return self.reference_text is not None


@dataclass
class Dataset:
    """An ordered, id-indexed collection of evaluation instances."""

    instances: list[EvaluationInstance]
    rating_scale: RatingScale | None = None

    def __post_init__(self) -> None:
        self.by_id = {inst.instance_id: inst for inst in self.instances}

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[EvaluationInstance]:
        return iter(self.instances)

    @property
    def instance_ids(self) -> list[str]:
        return [inst.instance_id for inst in self.instances]

    def human_column(self, dimension: str) -> list[float | None]:
        """Per-instance human rating for one dimension, None where absent."""
        if dimension not in DIMENSIONS:
            raise DataError(f"unknown rating dimension {dimension!r}")
        return [inst.human_ratings.get(dimension) for inst in self.instances]


@dataclass(frozen=True)
class StyleDistribution:
    """Classifier probability vector over style classes for one sentence."""

    instance_id: str
    slot: str
    class_labels: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        k = len(self.probs)
        if k < 2:
            raise DataError(
                f"{self.instance_id}/{self.slot}: need at least 2 classes, got {k}"
            )
        if len(self.class_labels) != k:
            raise DataError(
                f"{self.instance_id}/{self.slot}: {len(self.class_labels)} labels "
                f"for {k} probabilities"
            )
        if any(p < 0 for p in self.probs):
            raise DataError(f"{self.instance_id}/{self.slot}: negative probability")
        total = sum(self.probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise DataError(
                f"{self.instance_id}/{self.slot}: probs sum to {total:.6g}, not 1"
            )

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class TokenAnnotation:
    """Tokens plus optional vectors/IDF/mask flags for one sentence slot."""

    instance_id: str
    slot: str
    tokens: tuple[str, ...]
    embeddings: np.ndarray | None = None
    sentence_embedding: np.ndarray | None = None
    idf: np.ndarray | None = None
    mask_flags: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.tokens)
        where = f"{self.instance_id}/{self.slot}"
        if self.embeddings is not None and self.embeddings.shape[0] != n:
            raise DataError(
                f"{where}: {self.embeddings.shape[0]} embedding rows for {n} tokens"
            )
        if self.idf is not None:
            if len(self.idf) != n:
                raise DataError(f"{where}: {len(self.idf)} idf values for {n} tokens")
            if np.any(np.asarray(self.idf) < 0):
                raise DataError(f"{where}: negative idf value")
        if self.mask_flags is not None and len(self.mask_flags) != n:
            raise DataError(
                f"{where}: {len(self.mask_flags)} mask flags for {n} tokens"
            )


@dataclass(frozen=True)
class ColumnMeta:
    """Per-metric metadata carried by a score table."""

    dimension: str
    orientation: str
    mode: str

    def __post_init__(self) -> None:
        if self.dimension not in DIMENSIONS:
            raise DataError(f"unknown dimension {self.dimension!r}")
        if self.orientation not in ("higher_better", "lower_better"):
            raise DataError(f"unknown orientation {self.orientation!r}")
        if self.mode not in ("reference_free", "reference_based"):
            raise DataError(f"unknown mode {self.mode!r}")


class ScoreTable:
    """Per-instance, per-metric values with metadata.

    Null (None) values mean "metric unavailable for this instance" and are
    preserved as such; downstream consumers pairwise-delete them.
    """

    def __init__(self, instance_ids: list[str]):
        if len(set(instance_ids)) != len(instance_ids):
            raise DataError("duplicate instance ids in score table")
        self.instance_ids = list(instance_ids)
        self._index = {iid: i for i, iid in enumerate(self.instance_ids)}
        self.columns: dict[str, list[float | None]] = {}
        self.meta: dict[str, ColumnMeta] = {}

    def __len__(self) -> int:
        return len(self.instance_ids)

    @property
    def metric_ids(self) -> list[str]:
        return list(self.columns)

    def add_column(
        self, metric_id: str, values: list[float | None], meta: ColumnMeta
    ) -> None:
        if metric_id in self.columns:
            raise DataError(f"metric {metric_id!r} already present in score table")
        if len(values) != len(self.instance_ids):
            raise DataError(
                f"metric {metric_id!r}: {len(values)} values for "
                f"{len(self.instance_ids)} instances"
            )
        self.columns[metric_id] = [None if v is None else float(v) for v in values]
        self.meta[metric_id] = meta

    def column(self, metric_id: str) -> list[float | None]:
        if metric_id not in self.columns:
            raise DataError(f"metric {metric_id!r} not in score table")
        return self.columns[metric_id]

    def value(self, instance_id: str, metric_id: str) -> float | None:
        return self.column(metric_id)[self._index[instance_id]]

    def row(self, instance_id: str) -> dict[str, float | None]:
        i = self._index[instance_id]
        return {m: col[i] for m, col in self.columns.items()}

    def save(self, path: str | Path, extra_header: dict | None = None) -> None:
        """Write header line (column metadata) followed by one row per instance."""
        with open(path, "w", encoding="utf-8") as fh:
            header = {
                "columns": [
                    {
                        "metric_id": m,
                        "dimension": meta.dimension,
                        "orientation": meta.orientation,
                        "mode": meta.mode,
                    }
                    for m, meta in self.meta.items()
                ]
            }
            if extra_header:
                header.update(extra_header)
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for i, iid in enumerate(self.instance_ids):
                row = {
                    "instance_id": iid,
                    "values": {m: self.columns[m][i] for m in self.columns},
                }
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ScoreTable":
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise DataError(f"{path}: empty score file")
        header = json.loads(lines[0])
        if "columns" not in header:
            raise _err(path, 1, "missing score-table header line")
        ids, rows = [], []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            rec = json.loads(line)
            if "instance_id" not in rec or "values" not in rec:
                raise _err(path, lineno, "score row needs instance_id and values")
            ids.append(rec["instance_id"])
            rows.append(rec["values"])
        table = cls(ids)
        for col in header["columns"]:
            metric = col["metric_id"]
            values = [r.get(metric) for r in rows]
            table.add_column(
                metric,
                values,
                ColumnMeta(col["dimension"], col["orientation"], col["mode"]),
            )
        return table


@dataclass
class SideArtifacts:
    """Externally computed inputs keyed by (instance_id, slot)."""

    style_dists: dict[tuple[str, str], StyleDistribution] = field(default_factory=dict)
    tokens: dict[tuple[str, str], TokenAnnotation] = field(default_factory=dict)
    external_scores: dict[str, dict[str, float]] = field(default_factory=dict)


_REQUIRED_FIELDS = (
    "instance_id",
    "language",
    "task",
    "direction",
    "system_id",
    "source_text",
    "generated_text",
    "target_style_label",
)


def _parse_scale(value: Any, path: str | Path, lineno: int) -> RatingScale:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise _err(path, lineno, "rating_scale must be a [lo, hi] pair")
    return RatingScale(float(value[0]), float(value[1]))


def load_dataset(path: str | Path) -> Dataset:
    """Load a dataset.jsonl file, preserving input order.

    Rejects duplicate ids and schema violations, naming line and field.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    instances: list[EvaluationInstance] = []
    seen: set[str] = set()
    scale: RatingScale | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _err(path, lineno, f"invalid JSON: {exc.msg}") from exc
            if "instance_id" not in rec and "rating_scale" in rec:
                if instances:
                    raise _err(path, lineno, "header record must precede instances")
                scale = _parse_scale(rec["rating_scale"], path, lineno)
                continue
            for field_name in _REQUIRED_FIELDS:
                if field_name not in rec or rec[field_name] is None:
                    raise _err(path, lineno, f"missing field {field_name!r}")
            iid = str(rec["instance_id"])
            if iid in seen:
                raise _err(path, lineno, f"duplicate instance_id {iid!r}")
            seen.add(iid)
            ratings_raw = rec.get("human") or {}
            if not isinstance(ratings_raw, dict):
                raise _err(path, lineno, "field 'human' must be an object")
            ratings: dict[str, float] = {}
            for dim, val in ratings_raw.items():
                if val is None:
                    continue
                if dim not in DIMENSIONS:
                    raise _err(path, lineno, f"unknown rating dimension {dim!r}")
                val = float(val)
                if scale is None:
                    raise _err(
                        path,
                        lineno,
                        "human ratings present but no rating_scale header declared",
                    )
                if not scale.contains(val):
                    raise _err(
                        path,
                        lineno,
                        f"rating {dim}={val} outside scale [{scale.lo}, {scale.hi}]",
                    )
                ratings[dim] = val
            try:
                label = int(rec["target_style_label"])
            except (TypeError, ValueError):
                raise _err(path, lineno, "target_style_label must be an integer")
            instances.append(
                EvaluationInstance(
                    instance_id=iid,
                    language=str(rec["language"]),
                    task=str(rec["task"]),
                    direction=str(rec["direction"]),
                    system_id=str(rec["system_id"]),
                    source_text=str(rec["source_text"]),
                    generated_text=str(rec["generated_text"]),
                    reference_text=(
                        None
                        if rec.get("reference_text") is None
                        else str(rec["reference_text"])
                    ),
                    target_style_label=label,
                    human_ratings=ratings,
                )
            )
    return Dataset(instances=instances, rating_scale=scale)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Serialize a dataset back to dataset.jsonl (round-trips with load)."""
    with open(path, "w", encoding="utf-8") as fh:
        if dataset.rating_scale is not None:
            fh.write(
                json.dumps(
                    {"rating_scale": [dataset.rating_scale.lo, dataset.rating_scale.hi]}
                )
                + "\n"
            )
        for inst in dataset.instances:
            rec: dict[str, Any] = {
                "instance_id": inst.instance_id,
                "language": inst.language,
                "task": inst.task,
                "direction": inst.direction,
                "system_id": inst.system_id,
                "source_text": inst.source_text,
                "generated_text": inst.generated_text,
                "target_style_label": inst.target_style_label,
            }
            if inst.reference_text is not None:
                rec["reference_text"] = inst.reference_text
            if inst.human_ratings:
                rec["human"] = dict(inst.human_ratings)
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _check_slot(slot: Any, path: Path, lineno: int) -> str:
    if slot not in SLOTS:
        raise _err(path, lineno, f"unknown slot {slot!r}")
    return str(slot)


def load_style_dists(
    path: str | Path, dataset: Dataset
) -> dict[tuple[str, str], StyleDistribution]:
    """Load style_dists.jsonl; enforces shared class order across the file."""
    path = Path(path)
    out: dict[tuple[str, str], StyleDistribution] = {}
    labels_ref: tuple[str, ...] | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            iid = rec.get("instance_id")
            if iid not in dataset.by_id:
                raise _err(path, lineno, f"unknown instance_id {iid!r}")
            slot = _check_slot(rec.get("slot"), path, lineno)
            try:
                dist = StyleDistribution(
                    instance_id=iid,
                    slot=slot,
                    class_labels=tuple(str(c) for c in rec["class_labels"]),
                    probs=tuple(float(p) for p in rec["probs"]),
                )
            except DataError as exc:
                raise _err(path, lineno, str(exc)) from exc
            except (KeyError, TypeError, ValueError) as exc:
                raise _err(path, lineno, f"malformed distribution record: {exc}")
            if labels_ref is None:
                labels_ref = dist.class_labels
            elif dist.class_labels != labels_ref:
                raise _err(
                    path,
                    lineno,
                    f"class labels {dist.class_labels} differ from {labels_ref}",
                )
            key = (iid, slot)
            if key in out:
                raise _err(path, lineno, f"duplicate distribution for {key}")
            out[key] = dist
    return out


def _opt_matrix(rec: dict, key: str) -> np.ndarray | None:
    if rec.get(key) is None:
        return None
    return np.asarray(rec[key], dtype=float)


def load_tokens(
    path: str | Path, dataset: Dataset
) -> dict[tuple[str, str], TokenAnnotation]:
    """Load tokens.jsonl with optional embeddings/idf/mask flags."""
    path = Path(path)
    out: dict[tuple[str, str], TokenAnnotation] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            iid = rec.get("instance_id")
            if iid not in dataset.by_id:
                raise _err(path, lineno, f"unknown instance_id {iid!r}")
            slot = _check_slot(rec.get("slot"), path, lineno)
            if "tokens" not in rec:
                raise _err(path, lineno, "missing field 'tokens'")
            try:
                ann = TokenAnnotation(
                    instance_id=iid,
                    slot=slot,
                    tokens=tuple(str(t) for t in rec["tokens"]),
                    embeddings=_opt_matrix(rec, "embeddings"),
                    sentence_embedding=_opt_matrix(rec, "sentence_embedding"),
                    idf=_opt_matrix(rec, "idf"),
                    mask_flags=(
                        None
                        if rec.get("mask_flags") is None
                        else tuple(bool(b) for b in rec["mask_flags"])
                    ),
                )
            except DataError as exc:
                raise _err(path, lineno, str(exc)) from exc
            key = (iid, slot)
            if key in out:
                raise _err(path, lineno, f"duplicate token annotation for {key}")
            out[key] = ann
    return out


def load_external_scores(
    path: str | Path, dataset: Dataset
) -> dict[str, dict[str, float]]:
    """Load external_scores.jsonl into metric_id -> instance_id -> value."""
    path = Path(path)
    out: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            iid = rec.get("instance_id")
            if iid is None and "config_sha256" in rec:
                continue  # provenance header line
            if iid not in dataset.by_id:
                raise _err(path, lineno, f"unknown instance_id {iid!r}")
            metric = rec.get("metric_id")
            if not metric:
                raise _err(path, lineno, "missing field 'metric_id'")
            if "value" not in rec:
                raise _err(path, lineno, "missing field 'value'")
            column = out.setdefault(str(metric), {})
            if iid in column:
                raise _err(path, lineno, f"duplicate score ({iid}, {metric})")
            column[iid] = float(rec["value"])
    return out


def load_side_artifacts(
    dataset: Dataset,
    style_dists_path: str | Path | None = None,
    tokens_path: str | Path | None = None,
    external_scores_path: str | Path | None = None,
) -> SideArtifacts:
    """Load whichever side-artifact files are supplied, validated against ids."""
    artifacts = SideArtifacts()
    if style_dists_path is not None:
        artifacts.style_dists = load_style_dists(style_dists_path, dataset)
    if tokens_path is not None:
        artifacts.tokens = load_tokens(tokens_path, dataset)
    if external_scores_path is not None:
        artifacts.external_scores = load_external_scores(external_scores_path, dataset)
    return artifacts
