"""Embedding-space content metrics over externally supplied vectors.

Sentence cosine, word mover's distance via an exact transportation solve,
and greedy token-matching P/R/F with optional IDF weighting. The engine
never computes embeddings itself; they arrive through tokens.jsonl.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np
from scipy.optimize import linprog

from .corpus import ColumnMeta, DataError, ScoreTable, TokenAnnotation

logger = logging.getLogger(__name__)

WMD_CELLS_CAP = 4096

WEIGHT_SUM_TOL = 1e-6


@dataclass
class EmbeddedSentence:
    """Token vectors plus nbow weights for one sentence."""

    tokens: list[str]
    vectors: np.ndarray  # (n_tokens, d)
    weights: np.ndarray | None = None  # defaults to uniform
    sentence_vector: np.ndarray | None = None
    idf: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.tokens):
            raise ValueError(
                f"vectors shape {self.vectors.shape} for {len(self.tokens)} tokens"
            )
        if self.weights is None:
            n = len(self.tokens)
            self.weights = np.full(n, 1.0 / n) if n else np.zeros(0)
        else:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.tokens),):
                raise ValueError("one weight per token required")
            if np.any(self.weights < 0):
                raise ValueError("negative nbow weight")
            if abs(self.weights.sum() - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError(f"weights sum to {self.weights.sum():.6g}, not 1")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @classmethod
    def from_annotation(cls, ann: TokenAnnotation) -> "EmbeddedSentence":
        if ann.embeddings is None:
            raise ValueError(f"{ann.instance_id}/{ann.slot}: no token embeddings")
        return cls(
            tokens=list(ann.tokens),
            vectors=ann.embeddings,
            sentence_vector=ann.sentence_embedding,
            idf=None if ann.idf is None else np.asarray(ann.idf, dtype=float),
        )


def sentence_cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Standard cosine between two sentence vectors of equal dimension."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("zero vector in cosine similarity")
    return float(np.dot(a, b) / (na * nb))


def _distance_matrix(a: EmbeddedSentence, b: EmbeddedSentence) -> np.ndarray:
    if a.dim != b.dim:
        raise ValueError(f"embedding dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.vectors[:, None, :] - b.vectors[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _solve_transport(cost: np.ndarray, row: np.ndarray, col: np.ndarray) -> float:
    m, n = cost.shape
    a_eq = np.zeros((m + n, m * n))
    for i in range(m):
        a_eq[i, i * n : (i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    res = linprog(
        cost.ravel(),
        A_eq=a_eq,
        b_eq=np.concatenate([row, col]),
        bounds=(0, None),
        method="highs",
        # default feasibility tolerances (1e-7) let the solver shave tiny
        # masses off the marginals; 1e-10 is the tightest HiGHS accepts
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if not res.success:
        raise RuntimeError(f"transport solve failed: {res.message}")
    return float(res.fun)


class WmdResult(NamedTuple):
    value: float
    approximate: bool


def relaxed_wmd(a: EmbeddedSentence, b: EmbeddedSentence) -> float:
    """Lower bound on WMD: each side's mass moves to its nearest counterpart."""
    dist = _distance_matrix(a, b)
    row_bound = float(np.dot(a.weights, dist.min(axis=1)))
    col_bound = float(np.dot(b.weights, dist.min(axis=0)))
    return max(row_bound, col_bound)


def wmd(
    a: EmbeddedSentence,
    b: EmbeddedSentence,
    cells_cap: int = WMD_CELLS_CAP,
    method: str = "auto",
) -> WmdResult:
    """Word mover's distance between two embedded sentences.

    Solved exactly as a transportation problem while the plan has at most
    ``cells_cap`` cells; beyond that the relaxed lower bound is returned
    with ``approximate=True``.
    """
    if len(a.tokens) == 0 or len(b.tokens) == 0:
        raise ValueError("empty sentence in WMD")
    if method not in ("auto", "exact", "relaxed"):
        raise ValueError(f"unknown WMD method {method!r}")
    n_cells = len(a.tokens) * len(b.tokens)
    if method == "relaxed" or (method == "auto" and n_cells > cells_cap):
        return WmdResult(relaxed_wmd(a, b), approximate=True)
    dist = _distance_matrix(a, b)
    value = _solve_transport(dist, a.weights, b.weights)
    return WmdResult(max(value, 0.0), approximate=False)


class BertScoreResult(NamedTuple):
    precision: float
    recall: float
    f1: float


def _token_weights(sent: EmbeddedSentence, use_idf: bool) -> np.ndarray:
    n = len(sent.tokens)
    if not use_idf:
        return np.full(n, 1.0 / n)
    if sent.idf is None:
        raise ValueError("IDF weighting requested but no idf values present")
    total = float(np.sum(sent.idf))
    if total == 0:
        raise ValueError("all-zero IDF weights")
    return np.asarray(sent.idf, dtype=float) / total


def bert_score(
    cand: EmbeddedSentence, ref: EmbeddedSentence, use_idf: bool = False
) -> BertScoreResult:
    """Greedy-matching token similarity (no baseline rescaling).

    Recall sums, over reference tokens, each token's best cosine against
    the candidate; precision is symmetric over candidate tokens.
    """
    if len(cand.tokens) == 0 or len(ref.tokens) == 0:
        raise ValueError("empty sentence in greedy token matching")
    if cand.dim != ref.dim:
        raise ValueError(f"embedding dimension mismatch: {cand.dim} vs {ref.dim}")
    cn = np.linalg.norm(cand.vectors, axis=1)
    rn = np.linalg.norm(ref.vectors, axis=1)
    if np.any(cn == 0) or np.any(rn == 0):
        raise ValueError("zero token vector in greedy token matching")
    cos = (cand.vectors / cn[:, None]) @ (ref.vectors / rn[:, None]).T
    w_cand = _token_weights(cand, use_idf)
    w_ref = _token_weights(ref, use_idf)
    precision = float(np.dot(w_cand, cos.max(axis=1)))
    recall = float(np.dot(w_ref, cos.max(axis=0)))
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return BertScoreResult(precision, recall, f1)


def ingest_external_metric(
    table: ScoreTable,
    metric_id: str,
    scores: Mapping[str, float],
    meta: ColumnMeta,
) -> None:
    """Add an externally computed column (BLEURT, perplexities, ...) to a table.

    Instances missing from ``scores`` get nulls; a warning reports how many.
    The metric must already be registered (callers resolve ``meta`` through
    the registry) and duplicates per (instance, metric) are rejected upstream
    at load time and here via the one-column-per-metric rule.
    """
    unknown = set(scores) - set(table.instance_ids)
    if unknown:
        raise DataError(
            f"external scores for unknown instances: {sorted(unknown)[:5]}"
        )
    values = [scores.get(iid) for iid in table.instance_ids]
    missing = sum(v is None for v in values)
    if missing:
        logger.warning(
            "metric %s: %d of %d instances have no external score; storing nulls",
            metric_id,
            missing,
            len(values),
        )
    table.add_column(metric_id, values, meta)
