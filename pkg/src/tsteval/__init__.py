"""tsteval: evaluation engine and meta-evaluation harness for text style transfer."""

from .corpus import (
    Dataset,
    DataError,
    EvaluationInstance,
    ScoreTable,
    SideArtifacts,
    StyleDistribution,
    TokenAnnotation,
    load_dataset,
    load_side_artifacts,
    save_dataset,
)
from .registry import MetricDescriptor, MetricRegistry, orient_and_normalize

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DataError",
    "EvaluationInstance",
    "ScoreTable",
    "SideArtifacts",
    "StyleDistribution",
    "TokenAnnotation",
    "load_dataset",
    "load_side_artifacts",
    "save_dataset",
    "MetricDescriptor",
    "MetricRegistry",
    "orient_and_normalize",
    "__version__",
]
