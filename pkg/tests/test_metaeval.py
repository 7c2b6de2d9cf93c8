import json

import numpy as np
import pytest

from oracles import naive_kendall_tau_b, naive_pearson, naive_spearman
from tsteval.corpus import ColumnMeta, ScoreTable, load_dataset
from tsteval.metaeval import (
    average_ranks,
    build_report,
    histogram_export,
    kendall_tau_b,
    pairwise_complete,
    pairwise_matrix,
    pearson,
    spearman,
)


def random_vectors_with_ties(rng, n):
    x = rng.integers(0, max(2, n // 2), size=n).astype(float)
    y = x * rng.choice([-1.0, 1.0]) + rng.integers(0, 3, size=n)
    if rng.random() < 0.5:
        y = rng.integers(0, max(2, n // 2), size=n).astype(float)
    return x, y


class TestPearson:
    def test_positive_affine(self):
        x = [1.0, 2.0, 3.0, 5.0]
        assert pearson(x, [2 * v + 3 for v in x]) == pytest.approx(1.0)

    def test_negation(self):
        x = [1.0, 4.0, 2.0]
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)

    def test_worked_example(self):
        assert pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)

    def test_constant_gives_none(self):
        assert pearson([1, 1, 1, 1], [1, 2, 3, 4]) is None

    def test_too_few_pairs(self):
        assert pearson([1, 2], [3, 4]) is None

    def test_affine_sign_property(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            x = rng.normal(size=10)
            y = rng.normal(size=10)
            a = float(rng.uniform(-4, 4))
            if a == 0:
                continue
            b = float(rng.uniform(-3, 3))
            r1 = pearson(x, y)
            r2 = pearson(a * x + b, y)
            assert r2 == pytest.approx(np.sign(a) * r1, abs=1e-9)


class TestSpearman:
    def test_monotone_increasing(self):
        x = [1.0, 2.0, 5.0, 9.0]
        assert spearman(x, [np.exp(v) for v in x]) == pytest.approx(1.0)

    def test_monotone_decreasing(self):
        x = [1.0, 2.0, 5.0, 9.0]
        assert spearman(x, [-(v**3) for v in x]) == pytest.approx(-1.0)

    def test_tied_ranks_worked_example(self):
        got = spearman([1, 2, 2, 4], [1, 3, 2, 4])
        want = pearson([1.0, 2.5, 2.5, 4.0], [1.0, 3.0, 2.0, 4.0])
        assert got == pytest.approx(want, abs=1e-12)

    def test_monotone_transform_invariance_exact(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            x, y = random_vectors_with_ties(rng, int(rng.integers(3, 20)))
            base = spearman(x, y)
            transformed = spearman(np.exp(x / 3), y)
            if base is None:
                assert transformed is None
            else:
                assert transformed == base


class TestKendall:
    def test_identical_orderings(self):
        assert kendall_tau_b([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_reversed(self):
        assert kendall_tau_b([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_worked_example(self):
        assert kendall_tau_b([1, 2, 3], [1, 3, 2]) == pytest.approx(1 / 3)

    def test_all_tied_gives_none(self):
        assert kendall_tau_b([1, 1, 1], [1, 2, 3]) is None

    def test_fast_path_equals_n2_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            x, y = random_vectors_with_ties(rng, int(rng.integers(3, 51)))
            slow = kendall_tau_b(x, y, method="n2")
            fast = kendall_tau_b(x, y, method="fast")
            assert slow == fast

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            x, y = random_vectors_with_ties(rng, int(rng.integers(3, 30)))
            base = kendall_tau_b(x, y)
            transformed = kendall_tau_b(x, 3 * y + 1)
            assert base == transformed


def test_all_three_match_naive_oracles():
    rng = np.random.default_rng(4)
    for _ in range(500):
        n = int(rng.integers(3, 51))
        x, y = random_vectors_with_ties(rng, n)
        for ours, oracle in [
            (pearson, naive_pearson),
            (spearman, naive_spearman),
            (kendall_tau_b, naive_kendall_tau_b),
        ]:
            got = ours(x, y)
            want = oracle(list(x), list(y))
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-9)


def test_self_correlation_is_one():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        x = rng.normal(size=10)
        assert pearson(x, x) == pytest.approx(1.0)
        assert spearman(x, x) == pytest.approx(1.0)
        assert kendall_tau_b(x, x) == pytest.approx(1.0)


def test_pairwise_complete_drops_nones():
    x = [1.0, None, 3.0, float("nan"), 5.0]
    y = [1.0, 2.0, None, 4.0, 5.0]
    xs, ys = pairwise_complete(x, y)
    assert list(xs) == [1.0, 5.0]
    assert list(ys) == [1.0, 5.0]


def test_average_ranks():
    assert list(average_ranks(np.array([3.0, 1.0, 3.0]))) == [2.5, 1.0, 2.5]


def _table_with_dataset(synthetic_dir):
    dataset = load_dataset(synthetic_dir / "dataset.jsonl")
    table = ScoreTable(dataset.instance_ids)
    meta = ColumnMeta("style_accuracy", "higher_better", "reference_free")
    human = dataset.human_column("style_accuracy")
    table.add_column("mirror", list(human), meta)
    rng = np.random.default_rng(0)
    table.add_column("noise", list(rng.normal(size=len(dataset))), meta)
    inverse = [None if h is None else -h for h in human]
    table.add_column(
        "penalty",
        inverse,
        ColumnMeta("style_accuracy", "lower_better", "reference_free"),
    )
    return dataset, table


class TestBuildReport:
    def test_perfect_metric_row(self, synthetic_dir):
        dataset, table = _table_with_dataset(synthetic_dir)
        report = build_report(table, dataset, "style_accuracy", "reference_free")
        for cell in report.rows["mirror"].values():
            assert cell.pc == pytest.approx(1.0)
            assert cell.sc == pytest.approx(1.0)
            assert cell.kc == pytest.approx(1.0)

    def test_raw_sign_preserved_for_lower_better(self, synthetic_dir):
        dataset, table = _table_with_dataset(synthetic_dir)
        report = build_report(table, dataset, "style_accuracy", "reference_free")
        for cell in report.rows["penalty"].values():
            assert cell.pc == pytest.approx(-1.0)

    def test_group_structure(self, synthetic_dir):
        dataset, table = _table_with_dataset(synthetic_dir)
        report = build_report(table, dataset, "style_accuracy", "reference_free")
        assert set(report.groups) == {
            ("sentiment_transfer", "en"),
            ("sentiment_transfer", "hi"),
            ("sentiment_transfer", "bn"),
            ("detoxification", "en"),
            ("detoxification", "hi"),
        }
        assert report.mode == "reference_free"

    def test_renderings(self, synthetic_dir):
        dataset, table = _table_with_dataset(synthetic_dir)
        report = build_report(table, dataset, "style_accuracy", "reference_free")
        jsonl = report.to_jsonl()
        rows = [json.loads(line) for line in jsonl.strip().splitlines()]
        assert len(rows) == 3 * len(report.groups)
        assert all(rows[0].get("oracle") is False for _ in [0])
        tsv = report.to_delimited()
        assert tsv.splitlines()[0].startswith("metric\t")
        text = report.to_text()
        assert "mirror" in text and "PC" in text

    def test_oracle_columns_labeled(self, synthetic_dir):
        dataset, table = _table_with_dataset(synthetic_dir)
        table.add_column(
            "hybrid_simulation_style",
            list(table.column("mirror")),
            ColumnMeta("style_accuracy", "higher_better", "reference_free"),
        )
        report = build_report(table, dataset, "style_accuracy", "reference_free")
        assert "hybrid_simulation_style (oracle)" in report.to_text()
        rows = [json.loads(line) for line in report.to_jsonl().strip().splitlines()]
        flags = {r["metric_id"]: r["oracle"] for r in rows}
        assert flags["hybrid_simulation_style"] is True
        assert flags["mirror"] is False

    def test_no_ratings_errors(self, synthetic_dir):
        dataset, table = _table_with_dataset(synthetic_dir)
        for inst in dataset.instances:
            inst.human_ratings.clear()
        with pytest.raises(ValueError, match="no human ratings"):
            build_report(table, dataset, "style_accuracy", "reference_free")


class TestPairwiseMatrix:
    def test_symmetry_and_diagonal(self, synthetic_dir):
        _, table = _table_with_dataset(synthetic_dir)
        metrics, matrix = pairwise_matrix(table)
        n = len(metrics)
        for i in range(n):
            assert matrix[i][i] == 1.0
            for j in range(n):
                assert matrix[i][j] == matrix[j][i]

    def test_duplicate_column_fully_correlated(self, synthetic_dir):
        _, table = _table_with_dataset(synthetic_dir)
        table.add_column(
            "mirror2",
            list(table.column("mirror")),
            ColumnMeta("style_accuracy", "higher_better", "reference_free"),
        )
        metrics, matrix = pairwise_matrix(table)
        i, j = metrics.index("mirror"), metrics.index("mirror2")
        assert matrix[i][j] == pytest.approx(1.0)

    def test_needs_two_metrics(self):
        table = ScoreTable(["a", "b", "c"])
        table.add_column(
            "only",
            [1.0, 2.0, 3.0],
            ColumnMeta("fluency", "lower_better", "reference_free"),
        )
        with pytest.raises(ValueError, match="at least 2"):
            pairwise_matrix(table)


def test_histogram_export(synthetic_dir):
    _, table = _table_with_dataset(synthetic_dir)
    records = histogram_export(table, bins=7)
    by_metric = {rec["metric_id"]: rec for rec in records}
    mirror = by_metric["mirror"]
    assert len(mirror["counts"]) == 7
    assert len(mirror["bin_edges"]) == 8
    non_null = sum(1 for v in table.column("mirror") if v is not None)
    assert sum(mirror["counts"]) == non_null
