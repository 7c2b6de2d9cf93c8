"""Central metric registry: dimension, orientation, modes and normalization.

The built-in table below is the documented default; configs may register
additional metrics (e.g. judge columns for new models) or override entries.
Normalization maps every column to oriented values in [eps, 1] so weighted
geometric means stay finite: a single zero would annihilate an ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import ColumnMeta, ScoreTable

NORM_EPS = 1e-6

BOTH_MODES = ("reference_free", "reference_based")


@dataclass(frozen=True)
class MetricDescriptor:
    metric_id: str
    dimension: str
    orientation: str
    modes: tuple[str, ...] = BOTH_MODES
    normalization: str = "minmax_per_dataset"  # or "fixed_bounds" / "none"
    bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.normalization not in ("minmax_per_dataset", "fixed_bounds", "none"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.normalization == "fixed_bounds":
            if self.bounds is None or not (self.bounds[0] < self.bounds[1]):
                raise ValueError("fixed_bounds requires finite lo < hi")

    def column_meta(self, mode: str) -> ColumnMeta:
        return ColumnMeta(self.dimension, self.orientation, mode)


def _d(metric_id, dimension, orientation, **kw) -> MetricDescriptor:
    return MetricDescriptor(metric_id, dimension, orientation, **kw)


# Engine-computed metrics. Distribution cosine is lower-better for style:
# staying similar to the source distribution means the transfer failed.
DEFAULT_DESCRIPTORS: tuple[MetricDescriptor, ...] = (
    _d("sentence_accuracy", "style_accuracy", "higher_better"),
    _d("classifier_confidence", "style_accuracy", "higher_better"),
    _d("emd", "style_accuracy", "higher_better"),
    _d("kl", "style_accuracy", "higher_better"),
    _d("js", "style_accuracy", "higher_better"),
    _d("style_cosine", "style_accuracy", "lower_better"),
    _d("bleu", "content_preservation", "higher_better"),
    _d("masked_bleu", "content_preservation", "higher_better"),
    _d("rouge2", "content_preservation", "higher_better"),
    _d("rouge_l", "content_preservation", "higher_better"),
    _d("meteor", "content_preservation", "higher_better"),
    _d("ter", "content_preservation", "lower_better"),
    _d("pinc", "content_preservation", "lower_better"),
    _d("cosine", "content_preservation", "higher_better"),
    _d("masked_cosine", "content_preservation", "higher_better"),
    _d("wmd", "content_preservation", "lower_better"),
    _d("bertscore", "content_preservation", "higher_better"),
    _d("bertscore_idf", "content_preservation", "higher_better"),
    _d("ted", "content_preservation", "lower_better"),
    _d("smatch_dep", "content_preservation", "higher_better"),
    _d("smatch_amr", "content_preservation", "higher_better"),
    # ingested neural scores
    _d("bleurt", "content_preservation", "higher_better"),
    _d("s3bert", "content_preservation", "higher_better"),
    _d("ppl_gpt2", "fluency", "lower_better"),
    _d("ppl_mgpt", "fluency", "lower_better"),
    _d("ppl_gpt2_ft", "fluency", "lower_better"),
    _d("ppl_mgpt_ft", "fluency", "lower_better"),
    # ensembles / aggregates
    _d("hybrid_simulation_style", "style_accuracy", "higher_better"),
    _d("hybrid_learned_style", "style_accuracy", "higher_better"),
    _d("hybrid_simulation_content", "content_preservation", "higher_better"),
    _d("hybrid_learned_content", "content_preservation", "higher_better"),
    _d("hybrid_simulation_fluency", "fluency", "higher_better"),
    _d("hybrid_learned_fluency", "fluency", "higher_better"),
    _d("overall_existing", "overall", "higher_better"),
    _d("overall_ours1", "overall", "higher_better"),
    _d("overall_ours2", "overall", "higher_better"),
)

_JUDGE_DIMENSIONS = {
    "style_likert": "style_accuracy",
    "style_binary": "style_accuracy",
    "content_likert": "content_preservation",
    "fluency_likert": "fluency",
    "overall_likert": "overall",
}


class MetricRegistry:
    def __init__(self, descriptors=DEFAULT_DESCRIPTORS):
        self._by_id: dict[str, MetricDescriptor] = {}
        for desc in descriptors:
            self.register(desc)

    def register(self, desc: MetricDescriptor, replace: bool = False) -> None:
        if desc.metric_id in self._by_id and not replace:
            raise ValueError(f"metric {desc.metric_id!r} already registered")
        self._by_id[desc.metric_id] = desc

    def register_judge_metric(self, model_key: str, template_id: str) -> str:
        """Register (idempotently) the column for one judge model+template."""
        if template_id not in _JUDGE_DIMENSIONS:
            raise ValueError(f"unknown judge template {template_id!r}")
        metric_id = f"{model_key}_{template_id}"
        if metric_id not in self._by_id:
            self.register(
                MetricDescriptor(
                    metric_id, _JUDGE_DIMENSIONS[template_id], "higher_better"
                )
            )
        return metric_id

    def get(self, metric_id: str) -> MetricDescriptor:
        if metric_id not in self._by_id:
            raise KeyError(f"unregistered metric {metric_id!r}")
        return self._by_id[metric_id]

    def __contains__(self, metric_id: str) -> bool:
        return metric_id in self._by_id

    @property
    def metric_ids(self) -> list[str]:
        return list(self._by_id)

    def for_dimension(self, dimension: str) -> list[str]:
        return [m for m, d in self._by_id.items() if d.dimension == dimension]


def orient_and_normalize(
    table: ScoreTable, registry: MetricRegistry, eps: float = NORM_EPS
) -> ScoreTable:
    """Map every column to oriented values in [eps, 1].

    Lower-better columns are negated first; min-max runs over the dataset's
    non-null values (all systems pooled, keeping cross-system comparability);
    constant columns map to 0.5. Normalization is strictly monotone on
    non-constant columns, so rank correlations are unchanged by it.
    """
    out = ScoreTable(table.instance_ids)
    for metric in table.metric_ids:
        desc = registry.get(metric)
        meta = table.meta[metric]
        values = table.column(metric)
        flip = desc.orientation == "lower_better"
        oriented = [None if v is None else (-v if flip else v) for v in values]
        present = [v for v in oriented if v is not None]
        normalized: list[float | None]
        if not present:
            normalized = list(oriented)
        elif desc.normalization == "none":
            normalized = [
                None if v is None else min(1.0, max(eps, v)) for v in oriented
            ]
        else:
            if desc.normalization == "fixed_bounds":
                lo, hi = desc.bounds
                if flip:
                    lo, hi = -hi, -lo
            else:
                lo, hi = min(present), max(present)
            if hi == lo:
                normalized = [None if v is None else 0.5 for v in oriented]
            else:
                normalized = [
                    None if v is None else min(1.0, max(eps, (v - lo) / (hi - lo)))
                    for v in oriented
                ]
        out.add_column(
            metric,
            normalized,
            ColumnMeta(meta.dimension, "higher_better", meta.mode),
        )
    return out
