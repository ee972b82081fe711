"""Tests for purity, NMI, and cluster counting."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from appcluster import cluster_count, nmi, purity
from oracles import contingency_nmi, contingency_purity


class TestPurity:
    def test_perfect(self):
        assert purity([0, 0, 1, 1], ["a", "a", "b", "b"]) == 1.0

    def test_single_cluster_majority(self):
        # one cluster, majority class covers 3 of 4 objects
        assert purity([7, 7, 7, 7], ["a", "a", "a", "b"]) == 0.75

    def test_textbook_three_clusters(self):
        # classic 17-point example: majorities of sizes 5, 4, 3
        pred = [0] * 6 + [1] * 6 + [2] * 5
        gold = (["x"] * 5 + ["o"]) + (["o"] * 4 + ["x", "d"]) + (
            ["d"] * 3 + ["x", "x"])
        assert purity(pred, gold) == pytest.approx((5 + 4 + 3) / 17)

    def test_singletons_always_pure(self):
        gold = ["a", "b", "a", "c"]
        assert purity(range(4), gold) == 1.0

    def test_label_names_irrelevant(self):
        pred = [0, 0, 1, 1, 2]
        gold = [3, 3, 1, 1, 0]
        relab = ["p" + str(v) for v in pred]
        assert purity(pred, gold) == purity(relab, gold)

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            pred = rng.integers(0, 5, n).tolist()
            gold = rng.integers(0, 4, n).tolist()
            assert purity(pred, gold) == pytest.approx(
                contingency_purity(pred, gold), abs=1e-12)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            purity([0, 1], [0, 1, 2])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            purity([], [])


class TestNmi:
    def test_identical_partitions(self):
        assert nmi([0, 0, 1, 1, 2], [5, 5, 9, 9, 1]) == pytest.approx(1.0)

    def test_independent_partitions(self):
        # pred splits rows, gold splits columns of a 2x2 grid: MI is zero
        pred = [0, 0, 1, 1]
        gold = ["a", "b", "a", "b"]
        assert nmi(pred, gold) == 0.0

    def test_both_trivial(self):
        assert nmi([0, 0, 0], ["x", "x", "x"]) == 1.0

    def test_one_trivial(self):
        # a single predicted cluster carries no information
        assert nmi([0, 0, 0, 0], ["a", "a", "b", "b"]) == 0.0

    def test_hand_computed_value(self):
        # pred {0,1|2,3}, gold {a,a,a,b}: worked from the definition
        pred = [0, 0, 1, 1]
        gold = ["a", "a", "a", "b"]
        h_pred = math.log(2)
        h_gold = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
        mi = 0.5 * math.log(0.5 / (0.5 * 0.75)) \
            + 0.25 * math.log(0.25 / (0.5 * 0.75)) \
            + 0.25 * math.log(0.25 / (0.5 * 0.25))
        expected = mi / ((h_pred + h_gold) / 2)
        assert nmi(pred, gold) == pytest.approx(expected, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            a = rng.integers(0, 4, n).tolist()
            b = rng.integers(0, 3, n).tolist()
            assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)

    def test_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n = int(rng.integers(1, 25))
            a = rng.integers(0, 6, n).tolist()
            b = rng.integers(0, 6, n).tolist()
            v = nmi(a, b)
            assert 0.0 <= v <= 1.0 + 1e-12

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            pred = rng.integers(0, 5, n).tolist()
            gold = rng.integers(0, 4, n).tolist()
            assert nmi(pred, gold) == pytest.approx(
                contingency_nmi(pred, gold), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=1, max_size=25), st.data())
    def test_relabeling_invariance(self, pred, data):
        gold = data.draw(st.lists(st.integers(0, 2), min_size=len(pred),
                                  max_size=len(pred)))
        shifted = [p + 100 for p in pred]
        assert nmi(pred, gold) == pytest.approx(nmi(shifted, gold), abs=1e-12)


class TestClusterCount:
    def test_basic(self):
        assert cluster_count([0, 0, 3, 3, 7]) == 3

    def test_strings(self):
        assert cluster_count(["a", "b", "a"]) == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cluster_count([])
