"""Edit distance, ranking metrics, reports, truth tables, and sweeps."""

from __future__ import annotations

import csv

import numpy as np
import pytest

from scriptura.decoding import CounterpartSets, DecodedEntry
from scriptura.evaluation import (
    compute_report,
    levenshtein,
    load_truth_tsv,
    reciprocal_rank,
    sweep,
    time_call,
    write_sweep_csv,
    write_truth_tsv,
)
from scriptura.imaging import WordImage
from scriptura.pipeline import TranscriptionEngine, WordResult

from helpers import (
    all_strings,
    dato_classifier,
    dato_lm,
    dato_params,
    dato_word_image,
    recursive_levenshtein,
)


def _result(word_id, *texts):
    entries = tuple(DecodedEntry(t, -float(k), False) for k, t in enumerate(texts))
    return WordResult(word_id, 50, entries, 1.0, not entries)


@pytest.fixture()
def mixed_results():
    """Truth at rank 1, rank 2, and absent; reciprocal ranks 1, 1/2, 0."""
    results = [
        _result("w1", "dato", "dito"),
        _result("w2", "dato", "dito"),
        _result("w3"),
    ]
    truth = {"w1": "dato", "w2": "dito", "w3": "nemo"}
    return results, truth


class TestLevenshtein:
    def test_worked_example(self):
        assert levenshtein("asseritis", "afferitis") == 2

    def test_identities(self):
        assert levenshtein("", "") == 0
        assert levenshtein("abc", "") == 3
        assert levenshtein("", "abc") == 3
        assert levenshtein("abc", "abc") == 0

    def test_matches_the_recursion_exhaustively(self):
        strings = all_strings("ab", 3)
        for a in strings:
            for b in strings:
                assert levenshtein(a, b) == recursive_levenshtein(a, b)

    def test_matches_the_recursion_on_random_pairs(self):
        rng = np.random.default_rng(61)
        for _ in range(200):
            a = "".join(rng.choice(list("abcd"), size=rng.integers(0, 9)))
            b = "".join(rng.choice(list("abcd"), size=rng.integers(0, 9)))
            assert levenshtein(a, b) == recursive_levenshtein(a, b)

    def test_metric_properties(self):
        rng = np.random.default_rng(62)
        for _ in range(100):
            a, b, c = (
                "".join(rng.choice(list("abc"), size=rng.integers(0, 7)))
                for _ in range(3)
            )
            assert levenshtein(a, b) == levenshtein(b, a)
            assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


class TestReciprocalRank:
    def test_rank_positions(self):
        result = _result("w", "aa", "bb", "cc")
        assert reciprocal_rank(result, "aa") == 1.0
        assert reciprocal_rank(result, "bb") == 0.5
        assert reciprocal_rank(result, "cc") == pytest.approx(1 / 3)
        assert reciprocal_rank(result, "zz") == 0.0

    def test_empty_readings_score_zero(self):
        assert reciprocal_rank(_result("w"), "aa") == 0.0


class TestComputeReport:
    def test_mrr_of_the_mixed_fixture_is_a_half(self, mixed_results):
        report = compute_report(*mixed_results)
        assert report.mrr == pytest.approx(0.5)
        assert report.n_words == 3

    def test_m_precision_values_and_monotonicity(self, mixed_results):
        report = compute_report(*mixed_results)
        assert report.m_precision[1] == pytest.approx(1 / 3)
        assert report.m_precision[3] == pytest.approx(2 / 3)
        precisions = [report.m_precision[m] for m in sorted(report.m_precision)]
        assert precisions == sorted(precisions)

    def test_histograms_carry_unit_mass(self, mixed_results):
        report = compute_report(*mixed_results)
        assert sum(report.rank_histogram.values()) == pytest.approx(1.0)
        assert sum(report.ed_histogram.values()) == pytest.approx(1.0)
        assert report.rank_histogram == pytest.approx({1: 1 / 3, 2: 1 / 3, -1: 1 / 3})
        assert report.ed_histogram == pytest.approx({0: 0.5, 1: 0.5})

    def test_untranscribed_words_skip_the_distance_histogram(self):
        results = [_result("w1")]
        report = compute_report(results, {"w1": "dato"})
        assert report.ed_histogram == {}
        assert report.rank_histogram == {-1: 1.0}

    def test_timing_defaults_to_the_results_and_can_be_overridden(self, mixed_results):
        results, truth = mixed_results
        assert compute_report(results, truth).mwpt_ms == pytest.approx(1.0)
        assert compute_report(results, truth, timings_ms=[2.0, 4.0, 6.0]).mwpt_ms == pytest.approx(4.0)

    def test_errors(self, mixed_results):
        results, truth = mixed_results
        with pytest.raises(ValueError, match="no results"):
            compute_report([], truth)
        with pytest.raises(KeyError, match="w1"):
            compute_report(results, {"w2": "dito", "w3": "nemo"})

    def test_json_dict_stringifies_keys(self, mixed_results):
        raw = compute_report(*mixed_results).to_json_dict()
        assert set(raw["rank_histogram"]) == {"-1", "1", "2"}
        assert set(raw["m_precision"]) == {"1", "3", "5", "10"}


class TestTruthTSV:
    def test_round_trip_sorted_by_word_id(self, tmp_path):
        truth = {"b_000_000": "dito", "a_000_000": "dato"}
        path = tmp_path / "truth.tsv"
        write_truth_tsv(truth, path)
        assert path.read_text().splitlines()[0].startswith("a_000_000\t")
        assert load_truth_tsv(path) == truth

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "truth.tsv"
        path.write_text("w1\tdato\n\nw2\tdito\n")
        assert load_truth_tsv(path) == {"w1": "dato", "w2": "dito"}

    def test_malformed_rows_raise_with_the_line_number(self, tmp_path):
        path = tmp_path / "truth.tsv"
        path.write_text("w1\tdato\nw2 dito\n")
        with pytest.raises(ValueError, match="row 2"):
            load_truth_tsv(path)


class TestSweep:
    @pytest.fixture()
    def fixture_run(self, alphabet):
        engine = TranscriptionEngine(
            classifier=dato_classifier(alphabet),
            lm=dato_lm(),
            counterparts=CounterpartSets.default(),
            params=dato_params(),
        )
        words = [WordImage(dato_word_image(), "fix", 0, 0)]
        truth = {"fix_000_000": "dato"}
        return engine, words, truth

    def test_rows_follow_grid_order_with_metrics(self, fixture_run):
        engine, words, truth = fixture_run
        rows = sweep({"beta": [0.0, 1.0], "eta": [0.1]}, words, truth, engine)
        assert [(r["beta"], r["eta"]) for r in rows] == [(0.0, 0.1), (1.0, 0.1)]
        assert rows[0]["mrr"] == pytest.approx(1.0)
        assert rows[0]["top1"] == pytest.approx(1.0)
        assert rows[0]["untranscribed"] == 0.0
        assert rows[1]["mrr"] == 0.0
        assert rows[1]["untranscribed"] == 1.0

    def test_gram_order_axis_clamps_the_model(self, fixture_run):
        engine, words, truth = fixture_run
        rows = sweep({"q": [2, 3]}, words, truth, engine)
        assert len(rows) == 2
        for row in rows:
            assert 0.0 <= row["mrr"] <= 1.0
            assert row["mwpt_ms"] >= 0.0

    def test_unknown_axis_is_rejected(self, fixture_run):
        engine, words, truth = fixture_run
        with pytest.raises(ValueError, match="axis"):
            sweep({"sigma": [10]}, words, truth, engine)

    def test_csv_round_trip(self, fixture_run, tmp_path):
        engine, words, truth = fixture_run
        rows = sweep({"beta": [0.0]}, words, truth, engine)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        with open(path, newline="") as fh:
            back = list(csv.DictReader(fh))
        assert len(back) == 1
        assert float(back[0]["mrr"]) == pytest.approx(rows[0]["mrr"])
        assert list(back[0]) == list(rows[0])

    def test_empty_table_is_an_error(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            write_sweep_csv([], tmp_path / "sweep.csv")


class TestTimeCall:
    def test_returns_elapsed_and_result(self):
        ms, value = time_call(lambda x: x + 1, 41)
        assert value == 42
        assert ms >= 0.0
