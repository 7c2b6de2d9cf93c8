"""Correlation meta-evaluation: Pearson, Spearman, Kendall tau-b, reports.

Correlations are computed on raw (un-normalized, un-oriented) metric values
so lower-better metrics show negative coefficients, matching the reporting
convention. Null values are pairwise-deleted per metric-human pair.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Dataset, ScoreTable

logger = logging.getLogger(__name__)

MIN_PAIRS = 3


def pairwise_complete(
    x: Sequence[float | None], y: Sequence[float | None]
) -> tuple[np.ndarray, np.ndarray]:
    """Drop positions where either value is missing (None or NaN)."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    xs, ys = [], []
    for a, b in zip(x, y):
        if a is None or b is None:
            continue
        a, b = float(a), float(b)
        if np.isnan(a) or np.isnan(b):
            continue
        xs.append(a)
        ys.append(b)
    return np.asarray(xs), np.asarray(ys)


def pearson(x, y) -> float | None:
    """Sample Pearson r; None when n < 3 or either side is constant."""
    xv, yv = pairwise_complete(x, y)
    if len(xv) < MIN_PAIRS:
        logger.debug("pearson null: only %d complete pairs", len(xv))
        return None
    xd = xv - xv.mean()
    yd = yv - yv.mean()
    denom = np.sqrt(np.sum(xd * xd) * np.sum(yd * yd))
    if denom == 0:
        logger.debug("pearson null: constant input vector")
        return None
    return float(np.sum(xd * yd) / denom)


def average_ranks(v: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their ranks."""
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x, y) -> float | None:
    """Pearson correlation of average-ranked values."""
    xv, yv = pairwise_complete(x, y)
    if len(xv) < MIN_PAIRS:
        return None
    return pearson(average_ranks(xv), average_ranks(yv))


def _tie_pairs(v: np.ndarray) -> int:
    _, counts = np.unique(v, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def _joint_tie_pairs(x: np.ndarray, y: np.ndarray) -> int:
    pairs = {}
    for a, b in zip(x, y):
        pairs[(a, b)] = pairs.get((a, b), 0) + 1
    return sum(c * (c - 1) // 2 for c in pairs.values())


def _count_inversions(seq: list[float]) -> int:
    """Strict inversions via merge sort; equal elements do not count."""
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inv = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if right[j] < left[i]:
            inv += len(left) - i
            merged.append(right[j])
            j += 1
        else:
            merged.append(left[i])
            i += 1
    seq[:] = merged + left[i:] + right[j:]
    return inv


def kendall_tau_b(x, y, method: str = "n2") -> float | None:
    """Kendall tau-b with tie correction.

    ``method="n2"`` is the direct pair scan; ``"fast"`` counts discordant
    pairs with a merge sort. Both give identical results.
    """
    xv, yv = pairwise_complete(x, y)
    n = len(xv)
    if n < MIN_PAIRS:
        return None
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(xv)
    n2_ties = _tie_pairs(yv)
    if n0 == n1 or n0 == n2_ties:
        logger.debug("kendall null: one side entirely tied")
        return None
    if method == "n2":
        concordant = discordant = 0
        for i in range(n):
            for j in range(i + 1, n):
                s = (xv[i] - xv[j]) * (yv[i] - yv[j])
                if s > 0:
                    concordant += 1
                elif s < 0:
                    discordant += 1
        numerator = concordant - discordant
    elif method == "fast":
        order = np.lexsort((yv, xv))
        y_sorted = [float(yv[k]) for k in order]
        discordant = _count_inversions(list(y_sorted))
        n3 = _joint_tie_pairs(xv, yv)
        numerator = n0 - n1 - n2_ties + n3 - 2 * discordant
    else:
        raise ValueError(f"unknown kendall method {method!r}")
    return float(numerator / np.sqrt((n0 - n1) * (n0 - n2_ties)))


@dataclass
class CorrelationCell:
    pc: float | None
    sc: float | None
    kc: float | None
    n_used: int


#: ensemble columns are tuned on the target data; reports must say so
_ORACLE_PREFIXES = ("hybrid_", "overall_")


def _is_oracle_metric(metric_id: str) -> bool:
    return metric_id.startswith(_ORACLE_PREFIXES)


@dataclass
class CorrelationReport:
    """Metric-by-group correlation coefficients against human judgments."""

    dimension: str
    mode: str
    groups: list[tuple[str, str]]  # (task, language)
    rows: dict[str, dict[tuple[str, str], CorrelationCell]] = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = []
        for metric, cells in self.rows.items():
            for (task, language), cell in cells.items():
                lines.append(
                    json.dumps(
                        {
                            "metric_id": metric,
                            "task": task,
                            "language": language,
                            "pc": cell.pc,
                            "sc": cell.sc,
                            "kc": cell.kc,
                            "n_used": cell.n_used,
                            "dimension": self.dimension,
                            "mode": self.mode,
                            "oracle": _is_oracle_metric(metric),
                        },
                        ensure_ascii=False,
                    )
                )
        return "\n".join(lines) + "\n"

    def to_delimited(self, sep: str = "\t") -> str:
        header = ["metric"]
        for task, language in self.groups:
            for coef in ("pc", "sc", "kc"):
                header.append(f"{task}:{language}:{coef}")
        out = [sep.join(header)]
        for metric, cells in self.rows.items():
            row = [metric]
            for group in self.groups:
                cell = cells.get(group)
                for value in (
                    (cell.pc, cell.sc, cell.kc) if cell else (None, None, None)
                ):
                    row.append("" if value is None else f"{value:.4f}")
            out.append(sep.join(row))
        return "\n".join(out) + "\n"

    def to_text(self) -> str:
        """Aligned table: one metric per row, PC/SC/KC per (task, language).

        Tuned ensemble rows carry an ``(oracle)`` tag: their weights were fit
        on target data, so they are not comparable to reference-blind metrics.
        """
        display = {
            m: f"{m} (oracle)" if _is_oracle_metric(m) else m for m in self.rows
        }
        name_width = max([len("metric")] + [len(d) for d in display.values()]) + 2
        group_width = 3 * 8
        lines = []
        title = f"{self.dimension} ({self.mode.replace('_', '-')})"
        lines.append(title)
        head1 = " " * name_width
        head2 = "metric".ljust(name_width)
        for task, language in self.groups:
            head1 += f"{task}/{language}".center(group_width)
            head2 += "".join(c.rjust(8) for c in ("PC", "SC", "KC"))
        lines.append(head1)
        lines.append(head2)
        lines.append("-" * len(head2))
        for metric, cells in self.rows.items():
            row = display[metric].ljust(name_width)
            for group in self.groups:
                cell = cells.get(group)
                values = (cell.pc, cell.sc, cell.kc) if cell else (None, None, None)
                row += "".join(
                    ("-".rjust(8) if v is None else f"{v:8.2f}") for v in values
                )
            lines.append(row)
        return "\n".join(lines) + "\n"


def build_report(
    table: ScoreTable,
    dataset: Dataset,
    dimension: str,
    mode: str,
    metrics: Sequence[str] | None = None,
) -> CorrelationReport:
    """Correlate each metric column with human ratings per (task, language)."""
    human = dataset.human_column(dimension)
    if all(h is None for h in human):
        raise ValueError(f"no human ratings for dimension {dimension!r}")
    if metrics is None:
        metrics = [
            m for m, meta in table.meta.items() if meta.dimension == dimension
        ]
    if not metrics:
        raise ValueError(f"no metric columns for dimension {dimension!r}")

    groups: list[tuple[str, str]] = []
    group_rows: dict[tuple[str, str], list[int]] = {}
    for idx, inst in enumerate(dataset.instances):
        key = (inst.task, inst.language)
        if key not in group_rows:
            groups.append(key)
            group_rows[key] = []
        group_rows[key].append(idx)

    report = CorrelationReport(dimension=dimension, mode=mode, groups=[])
    kept_groups = []
    for group in groups:
        rows = group_rows[group]
        if not any(human[i] is not None for i in rows):
            logger.warning("group %s has no human ratings; omitted", group)
            continue
        kept_groups.append(group)
    report.groups = kept_groups

    for metric in metrics:
        col = table.column(metric)
        cells: dict[tuple[str, str], CorrelationCell] = {}
        for group in kept_groups:
            rows = group_rows[group]
            x = [col[i] for i in rows]
            y = [human[i] for i in rows]
            xv, yv = pairwise_complete(x, y)
            cells[group] = CorrelationCell(
                pc=pearson(x, y),
                sc=spearman(x, y),
                kc=kendall_tau_b(x, y),
                n_used=len(xv),
            )
        report.rows[metric] = cells
    return report


def pairwise_matrix(
    table: ScoreTable, dimension: str | None = None
) -> tuple[list[str], list[list[float | None]]]:
    """Symmetric metric-vs-metric Pearson matrix (plot-ready data)."""
    metrics = [
        m
        for m, meta in table.meta.items()
        if dimension is None or meta.dimension == dimension
    ]
    if len(metrics) < 2:
        raise ValueError("need at least 2 metric columns for a pairwise matrix")
    size = len(metrics)
    matrix: list[list[float | None]] = [[None] * size for _ in range(size)]
    for i in range(size):
        matrix[i][i] = 1.0
        for j in range(i + 1, size):
            r = pearson(table.column(metrics[i]), table.column(metrics[j]))
            matrix[i][j] = r
            matrix[j][i] = r
    return metrics, matrix


def histogram_export(table: ScoreTable, bins: int = 10) -> list[dict]:
    """Per-metric binned value counts (bin edges included) for plotting."""
    out = []
    for metric in table.metric_ids:
        values = [v for v in table.column(metric) if v is not None]
        if not values:
            out.append({"metric_id": metric, "bin_edges": [], "counts": []})
            continue
        counts, edges = np.histogram(np.asarray(values), bins=bins)
        out.append(
            {
                "metric_id": metric,
                "bin_edges": [float(e) for e in edges],
                "counts": [int(c) for c in counts],
            }
        )
    return out
