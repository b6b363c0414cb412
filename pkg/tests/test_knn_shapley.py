from fractions import Fraction

import numpy as np
import pytest

from aser.knn_shapley import (
    exact_shapley_bruteforce,
    knn_sv_matrix,
    knn_sv_single,
    knn_utility,
)

from .conftest import random_instance

A, B = 0, 1
LINE = np.array([[1.0], [2.0], [3.0]])  # distances 1, 2, 3 from the origin
ORIGIN = np.array([0.0])


class TestUtility:
    def test_empty_subset(self):
        assert knn_utility(np.empty((0, 1)), [], ORIGIN, A, 2) == 0.0

    def test_two_points(self):
        assert knn_utility(LINE[:2], [A, B], ORIGIN, A, 2) == 0.5

    def test_fewer_points_than_k(self):
        assert knn_utility(LINE[:1], [A], ORIGIN, A, 3) == pytest.approx(1 / 3)

    def test_k_zero(self):
        with pytest.raises(ValueError):
            knn_utility(LINE, [A, A, A], ORIGIN, A, 0)

    def test_tie_goes_to_lower_index(self):
        X = np.array([[1.0], [-1.0]])
        assert knn_utility(X, [A, B], ORIGIN, A, 1) == 1.0
        assert knn_utility(X, [B, A], ORIGIN, A, 1) == 0.0


class TestBruteForce:
    def test_two_candidates_k1(self):
        # v({})=0, v({1})=1, v({2})=0, v({1,2})=1
        assert list(exact_shapley_bruteforce(LINE[:2], [A, B], ORIGIN, A, 1)) == [1.0, 0.0]

    def test_single_matching(self):
        assert list(exact_shapley_bruteforce(LINE[:1], [A], ORIGIN, A, 1)) == [1.0]

    def test_fewer_candidates_than_k(self):
        # a lone player earns v({1}) = 1/K
        assert list(exact_shapley_bruteforce(LINE[:1], [A], ORIGIN, A, 2)) == [0.5]
        assert list(knn_sv_single(LINE[:1], [A], ORIGIN, A, 2)) == [0.5]

    def test_guard(self):
        X = np.arange(21.0)[:, None]
        with pytest.raises(ValueError):
            exact_shapley_bruteforce(X, np.zeros(21), ORIGIN, A, 1)


class TestRecursion:
    def test_worked_fixture(self):
        oracle = exact_shapley_bruteforce(LINE, [A, B, A], ORIGIN, A, 2)
        np.testing.assert_allclose(oracle, [1 / 3, -1 / 6, 1 / 3], atol=1e-15)
        exact = knn_sv_single(LINE, [A, B, A], ORIGIN, A, 2, exact=True)
        assert exact == [Fraction(1, 3), Fraction(-1, 6), Fraction(1, 3)]
        np.testing.assert_allclose(knn_sv_single(LINE, [A, B, A], ORIGIN, A, 2), oracle, atol=1e-15)

    def test_results_are_in_input_order(self):
        X = LINE[[2, 0, 1]]
        sv = knn_sv_single(X, [A, A, B], ORIGIN, A, 2, exact=True)
        assert sv == [Fraction(1, 3), Fraction(1, 3), Fraction(-1, 6)]

    def test_symmetric_pair(self):
        assert list(knn_sv_single(LINE[:2], [A, A], ORIGIN, A, 1)) == [0.5, 0.5]

    @pytest.mark.parametrize("K", [1, 3])
    def test_single_mismatch(self, K):
        assert list(knn_sv_single(LINE[:1], [B], ORIGIN, A, K)) == [0.0]

    def test_empty_candidates(self):
        with pytest.raises(ValueError):
            knn_sv_single(np.empty((0, 1)), [], ORIGIN, A, 1)

    def test_matches_bruteforce_on_ties(self):
        # duplicated points exercise the tie-break path in both routes
        X = np.array([[1.0], [1.0], [-1.0], [2.0], [2.0]])
        y = [B, A, A, B, A]
        for K in (1, 2, 3):
            np.testing.assert_allclose(
                knn_sv_single(X, y, ORIGIN, A, K),
                exact_shapley_bruteforce(X, y, ORIGIN, A, K),
                atol=1e-12,
            )

    def test_exact_and_float_agree(self):
        gen = np.random.default_rng(3)
        for _ in range(50):
            X, y, x_ev, y_ev, K = random_instance(gen, n_max=12)
            exact = np.array([float(f) for f in knn_sv_single(X, y, x_ev, y_ev, K, exact=True)])
            np.testing.assert_allclose(knn_sv_single(X, y, x_ev, y_ev, K), exact, atol=1e-14)


class TestMatrix:
    def test_single_column(self):
        gen = np.random.default_rng(0)
        X, y = gen.normal(size=(6, 2)), gen.integers(0, 2, 6)
        x_ev = gen.normal(size=2)
        m = knn_sv_matrix(X, y, x_ev[None], [1], 3)
        assert m.values.shape == (6, 1)
        np.testing.assert_array_equal(m.values[:, 0], knn_sv_single(X, y, x_ev, 1, 3))

    def test_columns_are_independent_recursions(self):
        gen = np.random.default_rng(1)
        X, y = gen.normal(size=(9, 3)), gen.integers(0, 3, 9)
        Xe, ye = gen.normal(size=(4, 3)), gen.integers(0, 3, 4)
        m = knn_sv_matrix(X, y, Xe, ye, 2)
        for j in range(4):
            np.testing.assert_array_equal(m.values[:, j], knn_sv_single(X, y, Xe[j], ye[j], 2))
        np.testing.assert_allclose(m.average(), m.values.mean(axis=1))

    def test_duplicated_eval_point(self):
        m = knn_sv_matrix(LINE, [A, B, A], np.zeros((2, 1)), [A, A], 2)
        np.testing.assert_allclose(m.average(), [1 / 3, -1 / 6, 1 / 3], atol=1e-15)

    def test_all_same_label_positive(self):
        gen = np.random.default_rng(2)
        m = knn_sv_matrix(gen.normal(size=(10, 2)), np.zeros(10), gen.normal(size=(5, 2)), np.zeros(5), 3)
        assert np.all(m.average() > 0)

    def test_empty_eval(self):
        with pytest.raises(ValueError):
            knn_sv_matrix(LINE, [A, A, A], np.empty((0, 1)), [], 1)


def test_efficiency_and_bounds():
    gen = np.random.default_rng(11)
    for _ in range(200):
        X, y, x_ev, y_ev, K = random_instance(gen, n_max=30)
        sv = knn_sv_single(X, y, x_ev, y_ev, K)
        assert abs(sv.sum() - knn_utility(X, y, x_ev, y_ev, K)) <= 1e-12
        assert np.all(np.abs(sv) <= 1.0)
        order = np.argsort(np.linalg.norm(X - x_ev, axis=1), kind="stable")
        for m, i in enumerate(order, start=1):
            if m >= 2:
                assert abs(sv[i]) < 1 / (m - 1)
