"""Golden metric values from the worked examples plus randomized invariants."""

import math
import random

import pytest

from adaptive_merkle import (
    AdaptiveTree,
    ProbabilityError,
    TreeConfig,
    avg_path_length,
    discrepancy_report,
    entropy,
)
from adaptive_merkle.metrics import elemental_discrepancy
from adaptive_merkle.workload import normalize_distribution, demo16_distribution

from helpers import dyadic_distribution, random_full_tree, random_tree

TOL = 1e-9


class TestAvgPathLength:
    def test_three_leaf_example(self):
        assert avg_path_length([(0.5, 1), (0.25, 2), (0.25, 2)]) == pytest.approx(1.5, abs=TOL)

    def test_constant_depth(self):
        stats = [(1 / 8, 3)] * 8
        assert avg_path_length(stats) == pytest.approx(3.0, abs=TOL)

    def test_second_iteration_winner(self):
        # depths for the winning layout: A=1, C=2, B=3, D=3
        stats = [(0.5, 1), (0.25, 2), (0.125, 3), (0.125, 3)]
        assert avg_path_length(stats) == pytest.approx(1.75, abs=TOL)

    def test_sum_violation(self):
        with pytest.raises(ProbabilityError):
            avg_path_length([(0.5, 1), (0.3, 1)])


class TestEntropy:
    def test_demo16_binary(self):
        probs = [p for _, p in normalize_distribution(demo16_distribution())]
        assert entropy(probs, 2) == pytest.approx(3.46, abs=0.01)

    def test_uniform_is_one(self):
        for m in (2, 3, 4, 16):
            assert entropy([1 / m] * m, m) == pytest.approx(1.0, abs=TOL)

    def test_quaternary_dyadic(self):
        assert entropy([0.5, 0.125, 0.25, 0.125], 4) == pytest.approx(0.875, abs=TOL)

    def test_base_2_is_shannon_bits(self):
        probs = [0.3, 0.2, 0.5]
        expected = -sum(p * math.log2(p) for p in probs)
        assert entropy(probs, 2) == pytest.approx(expected, abs=TOL)

    def test_zero_terms_ignored(self):
        assert entropy([1.0, 0.0, 0.0], 2) == pytest.approx(0.0, abs=TOL)

    def test_sum_violation(self):
        with pytest.raises(ProbabilityError):
            entropy([0.6, 0.6], 2)


class TestDiscrepancyReport:
    def test_example_1_1_per_leaf(self, binary_demo_tree):
        report = discrepancy_report(binary_demo_tree)
        expected = {"A": 0.0, "B": 0.25, "C": 0.0, "D": 0.0, "E": 0.0, "F": 0.125, "G": 0.0, "H": -0.125}
        assert report.delta_by_key() == pytest.approx(expected, abs=TOL)
        assert report.delta == pytest.approx(0.25, abs=TOL)

    def test_figure_24_per_leaf(self, quad_demo_tree):
        report = discrepancy_report(quad_demo_tree)
        expected = {"A": 0.25, "B": 0.25, "C": -0.0625, "D": -0.0625, "E": 0.0, "F": 0.0}
        assert report.delta_by_key() == pytest.approx(expected, abs=TOL)
        assert report.delta == pytest.approx(0.375, abs=TOL)

    def test_dyadic_tree_zero_delta(self):
        rng = random.Random(3)
        tree = random_full_tree(rng, 5, 2)
        tree.set_probabilities(dyadic_distribution(rng, tree))
        assert discrepancy_report(tree).delta == pytest.approx(0.0, abs=TOL)

    def test_json_shape(self, quad_demo_tree):
        data = discrepancy_report(quad_demo_tree).to_json_dict()
        assert set(data) == {"k_A", "H", "delta", "per_leaf"}
        assert set(data["per_leaf"][0]) == {"key", "p", "l", "delta_i"}

    def test_sum_violation(self, quad_demo_tree):
        quad_demo_tree.probabilities["A"] = 0.9
        with pytest.raises(ProbabilityError):
            discrepancy_report(quad_demo_tree)


class TestMetricsInvariants:
    def test_additivity_and_entropy_bound(self):
        # delta == k_A - H == sum(delta_i), and delta >= 0, on 1000 random trees
        rng = random.Random(1234)
        for _ in range(1000):
            tree = random_tree(rng, rng.randint(1, 24), rng.choice([2, 3, 4, 16]))
            report = discrepancy_report(tree)
            assert report.delta == pytest.approx(report.k_a - report.entropy, abs=TOL)
            assert report.delta == pytest.approx(sum(s.delta_i for s in report.per_leaf), abs=TOL)
            assert report.delta >= -TOL

    def test_zero_delta_characterization(self):
        rng = random.Random(99)
        for m in (2, 3, 4):
            for _ in range(50):
                tree = random_full_tree(rng, rng.randint(1, 5), m)
                tree.set_probabilities(dyadic_distribution(rng, tree))
                report = discrepancy_report(tree)
                assert report.delta == pytest.approx(0.0, abs=TOL)
                for stats in report.per_leaf:
                    assert stats.l == pytest.approx(-math.log(stats.p, m), abs=1e-6)
        # and conversely: a leaf off its ideal depth forces delta > 0
        tree = random_full_tree(random.Random(7), 4, 2)
        probs = dyadic_distribution(random.Random(7), tree)
        depths = tree.depths()
        shallow = min(probs, key=lambda k: depths[k])
        deep = max(probs, key=lambda k: depths[k])
        if depths[shallow] != depths[deep]:
            tree.swap_leaves(shallow, deep)
            tree.set_probabilities(probs)
            assert discrepancy_report(tree).delta > TOL

    def test_zero_probability_leaf_contributes_zero(self):
        assert elemental_discrepancy(0.0, 5, 2) == 0.0
