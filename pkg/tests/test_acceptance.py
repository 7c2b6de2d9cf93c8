"""Acceptance suite: one test per acceptance criterion, one PASS line each.

Oracle-equivalence suites run against the independent brute-force oracles
in tests/oracles.py; fixture and determinism criteria run end to end on
the shipped synthetic dataset. The per-module invariant batteries live in
the test_<module>.py files and run as part of the same pytest invocation.
"""

import json
import shutil
import time

import numpy as np
import pytest

from helpers import mutated_graph_pair, random_distribution, random_tree
from oracles import (
    emd_lp,
    exhaustive_smatch,
    exhaustive_ted,
    naive_kendall_tau_b,
    naive_pearson,
    naive_spearman,
    wmd_permutations,
)
from test_ensemble import make_synthetic
from tsteval.cli import main
from tsteval.corpus import EvaluationInstance, ScoreTable
from tsteval.embedding import EmbeddedSentence, wmd
from tsteval.ensemble import (
    HybridModel,
    apply_hybrid,
    fit_forest_arrays,
    fit_hybrid_learned,
    fit_hybrid_simulation,
    in_tuning_split,
    resolve_overall_preset,
    simplex_grid,
)
from tsteval.judge import TEMPLATES, render_prompt
from tsteval.metaeval import kendall_tau_b, pearson, spearman
from tsteval.overlap import bleu, meteor, pinc, rouge_2, rouge_l, ter
from tsteval.registry import MetricRegistry
from tsteval.structural import smatch, tree_edit_distance
from tsteval.style import emd


def ok(name: str) -> None:
    print(f"\n[ACCEPTANCE] {name}: PASS")


def test_criterion_1_ted_oracle_equivalence():
    rng = np.random.default_rng(424242)
    start = time.monotonic()
    for _ in range(200):
        t1 = random_tree(rng, max_nodes=8)
        t2 = random_tree(rng, max_nodes=8)
        assert tree_edit_distance(t1, t2) == exhaustive_ted(t1, t2)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"TED suite took {elapsed:.1f}s"
    ok(f"1 TED == exhaustive-mapping oracle, 200 pairs <= 8 nodes ({elapsed:.1f}s)")


def test_criterion_2_smatch_oracle_equivalence():
    rng = np.random.default_rng(515151)
    start = time.monotonic()
    for _ in range(200):
        g1, g2 = mutated_graph_pair(rng, max_vars=6)
        got = smatch(g1, g2, restarts=4, seed=7)
        _, _, want_f = exhaustive_smatch(g1, g2)
        assert got.f1 == want_f
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"smatch suite took {elapsed:.1f}s"
    ok(f"2 smatch hill-climb == exhaustive alignment, 200 pairs <= 6 vars ({elapsed:.1f}s)")


def test_criterion_3_wmd_oracle_equivalence():
    rng = np.random.default_rng(616161)
    start = time.monotonic()
    for _ in range(200):
        n = int(rng.integers(1, 6))
        x = rng.normal(size=(n, 4))
        y = rng.normal(size=(n, 4))
        got = wmd(
            EmbeddedSentence([f"a{i}" for i in range(n)], x),
            EmbeddedSentence([f"b{i}" for i in range(n)], y),
        )
        assert not got.approximate
        assert abs(got.value - wmd_permutations(x, y)) <= 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"WMD suite took {elapsed:.1f}s"
    ok(f"3 exact WMD == permutation brute force, 200 uniform pairs <= 5 tokens ({elapsed:.1f}s)")


def test_criterion_4_emd_closed_form_vs_lp():
    rng = np.random.default_rng(717171)
    for _ in range(500):
        k = int(rng.integers(2, 6))
        p = random_distribution(rng, k)
        q = random_distribution(rng, k)
        assert abs(emd(p, q) - emd_lp(p, q)) <= 1e-9
    ok("4 EMD closed form == transport LP, 500 trials K <= 5")


def test_criterion_5_correlation_oracles():
    rng = np.random.default_rng(818181)
    for _ in range(500):
        n = int(rng.integers(3, 51))
        x = rng.integers(0, max(2, n // 2), size=n).astype(float)
        y = (
            x * rng.choice([-1.0, 1.0]) + rng.integers(0, 3, size=n)
            if rng.random() < 0.5
            else rng.integers(0, max(2, n // 2), size=n).astype(float)
        )
        for ours, oracle in (
            (pearson, naive_pearson),
            (spearman, naive_spearman),
            (kendall_tau_b, naive_kendall_tau_b),
        ):
            got = ours(x, y)
            want = oracle(list(x), list(y))
            if want is None:
                assert got is None
            else:
                assert abs(got - want) <= 1e-9
        assert kendall_tau_b(x, y, method="fast") == kendall_tau_b(x, y, method="n2")
    ok("5 pearson/spearman/kendall == naive oracles, 500 vectors; fast == n2 exactly")


def test_criterion_6_overlap_golden_file(golden_dir):
    cases = json.loads((golden_dir / "overlap_golden.json").read_text())
    assert len(cases) == 10
    for case in cases:
        cand, ref = case["candidate"], case["reference"]
        got = {
            "bleu": bleu(cand, ref),
            "rouge2": rouge_2(cand, ref),
            "rouge_l": rouge_l(cand, ref),
            "meteor": meteor(cand, ref),
            "ter": ter(cand, ref),
            "ter_noshift": ter(cand, ref, enable_shifts=False),
            "pinc": pinc(ref, cand),
        }
        for metric, want in case["expected"].items():
            assert abs(got[metric] - want) <= 1e-9, (case["name"], metric)
    ok("6 overlap metrics match the 10-case hand-oracle golden file")


def test_criterion_ensemble_behavior():
    table, human = make_synthetic(n=200, seed=11, noise=0.1)
    tuning = [i for i in table.instance_ids if in_tuning_split(i)]
    holdout = [i for i in table.instance_ids if not in_tuning_split(i)]

    x = np.array([[table.value(i, m) for m in table.metric_ids] for i in tuning])
    y = np.array([human[i] for i in tuning])
    forest = fit_forest_arrays(x, y, table.metric_ids, n_trees=100, seed=3)
    assert forest.top_features(1)[0][0] == "metric_a"

    learned = fit_hybrid_learned(forest, "content_preservation")
    human_holdout = [human[i] for i in holdout]
    best_single = max(
        abs(pearson([table.value(i, m) for i in holdout], human_holdout) or 0.0)
        for m in table.metric_ids
    )
    hybrid = [apply_hybrid(learned, table.row(i)) for i in holdout]
    r = pearson(hybrid, human_holdout)
    assert r >= best_single - 0.02

    sim = fit_hybrid_simulation(table, human, "content_preservation", grid_step=0.1)
    idx = [i for i, iid in enumerate(table.instance_ids) if iid in set(tuning)]
    cols = np.array([[table.column(m)[i] for m in sim.metric_ids] for i in idx])
    ys = [human[table.instance_ids[i]] for i in idx]
    best_r = pearson(np.exp(np.log(cols) @ np.asarray(sim.weights)), ys)
    for weights in simplex_grid(3, 0.1):
        r = pearson(np.exp(np.log(cols) @ np.asarray(weights)), ys)
        assert r is None or r <= best_r + 1e-12
    ok("ensemble: learned ranks signal first; holdout PC >= best single - 0.02; grid optimum re-verified")


def test_criterion_published_fixtures(repo_root, tmp_path):
    fixtures = repo_root / "data" / "fixtures"
    sim = HybridModel.load(fixtures / "hybrid_simulation_content_sentiment_en.model")
    assert sim.metric_ids == ("cosine", "bleurt", "bertscore")
    assert sim.weights == (0.5, 0.3, 0.2)
    got = apply_hybrid(sim, {"cosine": 0.6, "bleurt": 0.8, "bertscore": 0.7})
    # independent arithmetic: 0.6^0.5 * 0.8^0.3 * 0.7^0.2
    assert abs(got - 0.6745625541886651) <= 1e-9

    learned = HybridModel.load(fixtures / "hybrid_learned_style_sentiment_en.model")
    assert set(learned.metric_ids) == {"kl", "js", "classifier_confidence"}
    copy = tmp_path / "roundtrip.model"
    learned.save(copy)
    assert HybridModel.load(copy) == learned

    registry = MetricRegistry()
    for task, languages in (
        ("sentiment_transfer", ("en", "hi", "bn")),
        ("detoxification", ("en", "hi")),
    ):
        for language in languages:
            for preset in ("existing", "ours1", "ours2"):
                triple = resolve_overall_preset(task, language, preset)
                assert set(triple) == {"style", "content", "fluency"}
                assert all(metric in registry for metric in triple.values())
    ok("published fixtures: tabulated hybrid weights apply & round-trip; preset table resolves")


def test_criterion_prompt_fidelity(golden_dir):
    def instance(direction):
        return EvaluationInstance(
            instance_id="ex",
            language="en",
            task="sentiment_transfer",
            direction=direction,
            system_id="sys",
            source_text="so he can charge a bloody fortune for them.",
            generated_text="so he can charge a fair amount of money for them.",
            reference_text=None,
            target_style_label=1,
            human_ratings={},
        )

    for template_id, direction in (
        ("style_likert", "neg→pos"),
        ("style_binary", "pos→neg"),
        ("content_likert", "neg→pos"),
        ("fluency_likert", "neg→pos"),
    ):
        rendered = render_prompt(TEMPLATES[template_id], instance(direction))
        golden = (golden_dir / "prompts" / f"{template_id}.txt").read_bytes()
        assert rendered.encode("utf-8") == golden, template_id
    ok("prompt fidelity: rendered templates byte-match the transcribed goldens")


def test_criterion_end_to_end_determinism(tmp_path, synthetic_dir):
    workdir = tmp_path / "synthetic"
    shutil.copytree(synthetic_dir, workdir)
    cfg = workdir / "config.json"
    start = time.monotonic()
    assert main(["score", "--config", str(cfg)]) == 3  # two bleurt nulls shipped
    assert main(["correlate", "--config", str(cfg)]) == 0
    elapsed = time.monotonic() - start
    outputs = sorted(p.name for p in (workdir / "out").iterdir())
    first = {n: (workdir / "out" / n).read_bytes() for n in outputs}
    assert main(["score", "--config", str(cfg)]) == 3
    assert main(["correlate", "--config", str(cfg)]) == 0
    for name in outputs:
        assert (workdir / "out" / name).read_bytes() == first[name], name
    table = ScoreTable.load(workdir / "out" / "scores.jsonl")
    assert len(table) == 50 and len(table.metric_ids) == 27
    assert elapsed < 60.0, f"end-to-end run took {elapsed:.1f}s"
    ok(f"end-to-end: score+correlate byte-identical across reruns, {elapsed:.1f}s < 60s")
