#!/usr/bin/env python3
"""Write the published ensemble configurations as model-file fixtures.

These are the tabulated hybrid selections for English sentiment transfer:
the simulation-tuned content and style triples, and the forest-learned
style selection (importances renormalized onto the simplex).
"""

from pathlib import Path

from tsteval.ensemble import HybridModel

OUT = Path(__file__).resolve().parents[1] / "data" / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    HybridModel(
        dimension="content_preservation",
        metric_ids=("cosine", "bleurt", "bertscore"),
        weights=(0.5, 0.3, 0.2),
        provenance="simulation",
    ).save(OUT / "hybrid_simulation_content_sentiment_en.model")

    HybridModel(
        dimension="style_accuracy",
        metric_ids=("js", "classifier_confidence", "kl"),
        weights=(0.6, 0.25, 0.15),
        provenance="simulation",
    ).save(OUT / "hybrid_simulation_style_sentiment_en.model")

    importances = {"kl": 0.34, "js": 0.33, "classifier_confidence": 0.21}
    total = sum(importances.values())
    HybridModel(
        dimension="style_accuracy",
        metric_ids=tuple(importances),
        weights=tuple(v / total for v in importances.values()),
        provenance="learned",
    ).save(OUT / "hybrid_learned_style_sentiment_en.model")

    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
