"""Oracle ensembles: grid-searched and forest-learned top-3 hybrids, plus
geometric-mean overall scores.

Both hybrid variants combine three oriented, [eps, 1]-normalized metric
columns by weighted geometric mean. They are oracle metrics by
construction (weights are tuned on human-labeled target data), and reports
must label them as such.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .corpus import ScoreTable
from .metaeval import pairwise_complete, pearson

logger = logging.getLogger(__name__)

HYBRID_SIZE = 3
DEFAULT_GRID_STEP = 0.05
DEFAULT_SPLIT = "sha256_mod2"
MIN_TUNING_INSTANCES = 10
MIN_FOREST_ROWS = 20

#: column families that must not feed a hybrid (they are ensembles already)
_NON_BASE_PREFIXES = ("hybrid_", "overall_")


def in_tuning_split(instance_id: str, split: str = DEFAULT_SPLIT) -> bool:
    """Deterministic hash split; 'all' puts every instance in the tuning half."""
    if split == "all":
        return True
    if split == DEFAULT_SPLIT:
        digest = hashlib.sha256(instance_id.encode("utf-8")).digest()
        return digest[0] % 2 == 0
    raise ValueError(f"unknown tuning split spec {split!r}")


@dataclass
class HybridModel:
    dimension: str
    metric_ids: tuple[str, str, str]
    weights: tuple[float, float, float]
    provenance: str  # "simulation" | "learned"
    tuning_split_spec: str = DEFAULT_SPLIT

    def __post_init__(self) -> None:
        if len(self.metric_ids) != HYBRID_SIZE or len(self.weights) != HYBRID_SIZE:
            raise ValueError("hybrid models combine exactly 3 metrics")
        if any(w < 0 for w in self.weights):
            raise ValueError("hybrid weights must be non-negative")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"hybrid weights sum to {total!r}, not 1")
        if self.provenance not in ("simulation", "learned"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def save(self, path: str | Path, comment: str | None = None) -> None:
        lines = ["# hybrid ensemble model (oracle: weights tuned on target data)"]
        if comment:
            lines.append(f"# {comment}")
        lines += [
            f"dimension = {self.dimension}",
            f"provenance = {self.provenance}",
            f"tuning_split = {self.tuning_split_spec}",
        ]
        for metric, weight in zip(self.metric_ids, self.weights):
            lines.append(f"metric {metric} {weight!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "HybridModel":
        fields: dict[str, str] = {}
        metrics: list[str] = []
        weights: list[float] = []
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("metric "):
                _, metric, weight = line.split()
                metrics.append(metric)
                weights.append(float(weight))
            elif "=" in line:
                key, _, value = line.partition("=")
                fields[key.strip()] = value.strip()
        if len(metrics) != HYBRID_SIZE:
            raise ValueError(f"{path}: expected 3 metric lines, got {len(metrics)}")
        total = sum(weights)
        if total <= 0:
            raise ValueError(f"{path}: non-positive weight total")
        if abs(total - 1.0) > 1e-9:
            logger.warning(
                "%s: weights sum to %.4f; renormalizing onto the simplex", path, total
            )
            weights = [w / total for w in weights]
        return cls(
            dimension=fields.get("dimension", ""),
            metric_ids=tuple(metrics),
            weights=tuple(weights),
            provenance=fields.get("provenance", "simulation"),
            tuning_split_spec=fields.get("tuning_split", DEFAULT_SPLIT),
        )


def apply_hybrid(model: HybridModel, row: Mapping[str, float | None]) -> float | None:
    """Weighted geometric mean of the model's components; nulls propagate."""
    values = [row.get(m) for m in model.metric_ids]
    if any(v is None for v in values):
        return None
    return float(
        math.exp(sum(w * math.log(v) for w, v in zip(model.weights, values)))
    )


def simplex_grid(k: int, step: float) -> Iterator[tuple[float, ...]]:
    """All weight vectors on the k-simplex with the given step, in
    lexicographic order."""
    m = round(1 / step)
    if abs(m * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} does not divide 1")

    def rec(remaining: int, slots: int) -> Iterator[tuple[int, ...]]:
        if slots == 1:
            yield (remaining,)
            return
        for i in range(remaining + 1):
            for rest in rec(remaining - i, slots - 1):
                yield (i, *rest)

    for ints in rec(m, k):
        yield tuple(i / m for i in ints)


def _base_metrics_for(table: ScoreTable, dimension: str, metrics=None) -> list[str]:
    if metrics is not None:
        return list(metrics)
    return [
        m
        for m, meta in table.meta.items()
        if meta.dimension == dimension and not m.startswith(_NON_BASE_PREFIXES)
    ]


def fit_hybrid_simulation(
    oriented: ScoreTable,
    human: Mapping[str, float],
    dimension: str,
    grid_step: float = DEFAULT_GRID_STEP,
    split: str = DEFAULT_SPLIT,
    metrics: Sequence[str] | None = None,
) -> HybridModel:
    """Top-3 metrics by |Pearson| with human on the tuning split, weighted by
    exhaustive simplex grid search maximizing the hybrid's Pearson.

    Deterministic: ties in the grid go to the lexicographically smallest
    weight vector.
    """
    candidates = _base_metrics_for(oriented, dimension, metrics)
    tuning_ids = [
        iid for iid in oriented.instance_ids if in_tuning_split(iid, split)
    ]
    if len(tuning_ids) < MIN_TUNING_INSTANCES:
        raise ValueError(
            f"tuning split has {len(tuning_ids)} instances; need >= {MIN_TUNING_INSTANCES}"
        )
    idx = [oriented.instance_ids.index(iid) for iid in tuning_ids]
    human_col = [human.get(iid) for iid in tuning_ids]

    scored: list[tuple[float, str]] = []
    for metric in candidates:
        col = oriented.column(metric)
        r = pearson([col[i] for i in idx], human_col)
        if r is not None:
            scored.append((abs(r), metric))
    if len(scored) < HYBRID_SIZE:
        raise ValueError(
            f"only {len(scored)} usable metric columns for {dimension!r}; need 3"
        )
    scored.sort(key=lambda item: (-item[0], item[1]))
    top = tuple(metric for _, metric in scored[:HYBRID_SIZE])

    cols = []
    ys = []
    for i, iid in zip(idx, tuning_ids):
        values = [oriented.column(m)[i] for m in top]
        if any(v is None for v in values) or human.get(iid) is None:
            continue
        cols.append(values)
        ys.append(human[iid])
    x = np.asarray(cols, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(y) < MIN_TUNING_INSTANCES:
        raise ValueError(
            f"only {len(y)} complete tuning rows for {top}; need >= {MIN_TUNING_INSTANCES}"
        )
    log_x = np.log(x)

    best_weights: tuple[float, ...] | None = None
    best_r = -np.inf
    for weights in simplex_grid(HYBRID_SIZE, grid_step):
        hybrid = np.exp(log_x @ np.asarray(weights))
        r = pearson(hybrid, y)
        if r is not None and r > best_r:
            best_r, best_weights = r, weights
    if best_weights is None:
        raise ValueError("no grid point produced a non-degenerate hybrid")
    return HybridModel(
        dimension=dimension,
        metric_ids=top,
        weights=best_weights,
        provenance="simulation",
        tuning_split_spec=split,
    )


# ---------------------------------------------------------------------------
# Random-forest regressor (bagged CART trees, squared-error splits)
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    value: float
    feature: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    def predict_one(self, row: np.ndarray) -> float:
        node = self
        while node.feature is not None:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.value


@dataclass
class ForestModel:
    trees: list[TreeNode]
    n_trees: int
    max_features_rule: str
    seed: int
    importances: np.ndarray
    feature_names: list[str]

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        preds = np.zeros(len(x))
        for tree in self.trees:
            preds += np.array([tree.predict_one(row) for row in x])
        return preds / len(self.trees)

    def top_features(self, k: int) -> list[tuple[str, float]]:
        order = sorted(
            range(len(self.feature_names)),
            key=lambda i: (-self.importances[i], self.feature_names[i]),
        )
        return [(self.feature_names[i], float(self.importances[i])) for i in order[:k]]


def _best_split(x_col: np.ndarray, y: np.ndarray):
    """Best threshold on one feature by squared-error reduction, or None."""
    order = np.argsort(x_col, kind="stable")
    xs = x_col[order]
    ys = y[order]
    n = len(ys)
    csum = np.cumsum(ys)
    csum2 = np.cumsum(ys * ys)
    total_sse = csum2[-1] - csum[-1] ** 2 / n
    best = None
    for i in range(n - 1):
        if xs[i] == xs[i + 1]:
            continue
        nl = i + 1
        nr = n - nl
        sse_l = csum2[i] - csum[i] ** 2 / nl
        sse_r = (csum2[-1] - csum2[i]) - (csum[-1] - csum[i]) ** 2 / nr
        reduction = total_sse - sse_l - sse_r
        if best is None or reduction > best[0] + 1e-12:
            best = (reduction, (xs[i] + xs[i + 1]) / 2)
    return best


def _grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_features: int,
    importances: np.ndarray,
) -> TreeNode:
    node = TreeNode(value=float(y.mean()))
    if len(y) < 2 or np.all(y == y[0]):
        return node
    p = x.shape[1]
    chosen = np.sort(rng.choice(p, size=max_features, replace=False))
    best = None
    for feature in chosen:
        split = _best_split(x[:, feature], y)
        if split is None:
            continue
        reduction, threshold = split
        if reduction <= 1e-12:
            continue
        if best is None or reduction > best[0] + 1e-12:
            best = (reduction, int(feature), threshold)
    if best is None:
        return node
    reduction, feature, threshold = best
    importances[feature] += reduction
    mask = x[:, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.left = _grow_tree(x[mask], y[mask], rng, max_features, importances)
    node.right = _grow_tree(x[~mask], y[~mask], rng, max_features, importances)
    return node


def _canonical_order(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, int]:
    """Sort rows by a content digest so row order never affects the fit."""
    digests = []
    for row, target in zip(x, y):
        payload = ",".join(repr(float(v)) for v in row) + "|" + repr(float(target))
        digests.append(hashlib.sha256(payload.encode()).hexdigest())
    order = np.array(sorted(range(len(digests)), key=lambda i: (digests[i], i)))
    combined = hashlib.sha256("".join(digests[i] for i in order).encode()).digest()
    return order, int.from_bytes(combined[:8], "big")


def fit_forest_arrays(
    x: np.ndarray,
    y: np.ndarray,
    feature_names: Sequence[str],
    n_trees: int = 200,
    seed: int = 0,
    max_features: int | None = None,
    bootstrap: bool = True,
) -> ForestModel:
    """Fit bagged regression trees on dense arrays.

    Per-split feature subsample of ceil(p/3) features, minimum 2 samples to
    split. Importance is the total squared-error reduction per feature,
    averaged over trees and normalized to sum 1. The RNG is keyed to the
    row contents, so permuting training rows cannot change the result.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("features must be a 2-D array aligned with targets")
    if np.all(y == y[0]):
        raise ValueError("degenerate target: all training targets are equal")
    order, digest = _canonical_order(x, y)
    x, y = x[order], y[order]
    n, p = x.shape
    if max_features is None:
        max_features = math.ceil(p / 3)
    max_features = min(max_features, p)

    per_tree_importances = np.zeros((n_trees, p))
    trees: list[TreeNode] = []
    for i in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, digest, i]))
        sample = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        imp = per_tree_importances[i]
        trees.append(_grow_tree(x[sample], y[sample], rng, max_features, imp))
    totals = per_tree_importances.mean(axis=0)
    if totals.sum() <= 0:
        raise ValueError("no informative split found in any tree")
    importances = totals / totals.sum()
    return ForestModel(
        trees=trees,
        n_trees=n_trees,
        max_features_rule="ceil_p_over_3",
        seed=seed,
        importances=importances,
        feature_names=list(feature_names),
    )


def fit_random_forest(
    oriented: ScoreTable,
    human: Mapping[str, float],
    dimension: str,
    n_trees: int = 200,
    seed: int = 0,
    metrics: Sequence[str] | None = None,
) -> ForestModel:
    """Fit the forest on all base metrics of a dimension vs human ratings.

    Rows with any null feature or missing rating are dropped (and logged).
    """
    features = _base_metrics_for(oriented, dimension, metrics)
    if not features:
        raise ValueError(f"no metric columns for dimension {dimension!r}")
    rows = []
    targets = []
    dropped = 0
    for i, iid in enumerate(oriented.instance_ids):
        values = [oriented.column(m)[i] for m in features]
        rating = human.get(iid)
        if rating is None or any(v is None for v in values):
            dropped += 1
            continue
        rows.append(values)
        targets.append(rating)
    if dropped:
        logger.warning("forest training dropped %d rows with nulls", dropped)
    if len(rows) < MIN_FOREST_ROWS:
        raise ValueError(f"only {len(rows)} complete rows; need >= {MIN_FOREST_ROWS}")
    return fit_forest_arrays(
        np.asarray(rows), np.asarray(targets), features, n_trees=n_trees, seed=seed
    )


def fit_hybrid_learned(forest: ForestModel, dimension: str) -> HybridModel:
    """Top-3 features by importance, weights renormalized to the simplex.

    Importance ties break by metric id (logged).
    """
    if len(forest.feature_names) < HYBRID_SIZE:
        raise ValueError("forest has fewer than 3 features")
    top = forest.top_features(HYBRID_SIZE)
    values = [imp for _, imp in top]
    if len({round(v, 12) for v in forest.importances.tolist()}) < len(
        forest.importances
    ):
        logger.info("importance ties present; selection falls back to metric id order")
    total = sum(values)
    if total <= 0:
        raise ValueError("top importances are all zero")
    return HybridModel(
        dimension=dimension,
        metric_ids=tuple(name for name, _ in top),
        weights=tuple(v / total for v in values),
        provenance="learned",
    )


def overall_score(style: float, content: float, fluency: float) -> float:
    """Geometric mean of one oriented metric per evaluation dimension."""
    return float((style * content * fluency) ** (1.0 / 3.0))


#: Per task and language metric triples behind the overall-score presets.
#: "existing" aggregates the best previously-used metric per dimension,
#: "ours1" the best newly applied one, and "ours2" swaps in the tuned
#: hybrids. Override via configuration for other datasets.
OVERALL_PRESETS: dict[tuple[str, str], dict[str, dict[str, str]]] = {
    ("sentiment_transfer", "en"): {
        "existing": {
            "style": "sentence_accuracy",
            "content": "cosine",
            "fluency": "ppl_gpt2",
        },
        "ours1": {"style": "js", "content": "bertscore", "fluency": "ppl_gpt2_ft"},
        "ours2": {
            "style": "hybrid_simulation_style",
            "content": "hybrid_simulation_content",
            "fluency": "ppl_gpt2_ft",
        },
    },
    ("sentiment_transfer", "hi"): {
        "existing": {
            "style": "sentence_accuracy",
            "content": "cosine",
            "fluency": "ppl_mgpt",
        },
        "ours1": {"style": "js", "content": "ter", "fluency": "ppl_mgpt_ft"},
        "ours2": {
            "style": "hybrid_simulation_style",
            "content": "hybrid_simulation_content",
            "fluency": "ppl_mgpt_ft",
        },
    },
    ("sentiment_transfer", "bn"): {
        "existing": {
            "style": "sentence_accuracy",
            "content": "cosine",
            "fluency": "ppl_mgpt",
        },
        "ours1": {"style": "js", "content": "bleurt", "fluency": "ppl_mgpt_ft"},
        "ours2": {
            "style": "hybrid_simulation_style",
            "content": "hybrid_simulation_content",
            "fluency": "ppl_mgpt_ft",
        },
    },
    ("detoxification", "en"): {
        "existing": {
            "style": "sentence_accuracy",
            "content": "cosine",
            "fluency": "ppl_gpt2",
        },
        "ours1": {"style": "kl", "content": "ted", "fluency": "ppl_gpt2_ft"},
        "ours2": {
            "style": "hybrid_simulation_style",
            "content": "hybrid_simulation_content",
            "fluency": "ppl_gpt2_ft",
        },
    },
    ("detoxification", "hi"): {
        "existing": {
            "style": "sentence_accuracy",
            "content": "cosine",
            "fluency": "ppl_mgpt",
        },
        "ours1": {"style": "js", "content": "bleurt", "fluency": "ppl_mgpt_ft"},
        "ours2": {
            "style": "hybrid_simulation_style",
            "content": "hybrid_simulation_content",
            "fluency": "ppl_mgpt_ft",
        },
    },
}


def resolve_overall_preset(
    task: str,
    language: str,
    preset: str,
    presets: Mapping | None = None,
) -> dict[str, str]:
    """Look up the (style, content, fluency) metric triple for a preset."""
    table = presets if presets is not None else OVERALL_PRESETS
    key = (task, language)
    if key not in table:
        raise KeyError(f"no overall presets for task={task!r}, language={language!r}")
    if preset not in table[key]:
        raise KeyError(f"unknown preset {preset!r} for {key}")
    return dict(table[key][preset])
