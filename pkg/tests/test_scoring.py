import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from aser.knn_shapley import ShapleyMatrix
from aser.scoring import asv, asv_mu, dist_mu_score, dist_score

MEM = [[0.1, 0.3, -0.2]]
INP = [[-0.4, 0.0]]


def test_asv_examples():
    assert asv(MEM, INP)[0] == pytest.approx(0.7, abs=1e-12)
    assert asv(np.zeros((2, 3)), np.zeros((2, 2))).tolist() == [0.0, 0.0]
    assert asv([[0.5]], [[0.5]])[0] == 0.0


def test_asv_mu_examples():
    assert asv_mu(MEM, INP)[0] == pytest.approx(0.2 / 3 + 0.2, abs=1e-12)
    m = np.random.default_rng(0).normal(size=(4, 3))
    assert np.all(asv_mu(m, m) == 0.0)
    assert asv_mu(np.full((3, 4), 0.25), np.full((3, 2), -0.5)).tolist() == [0.75] * 3


def test_accepts_shapley_matrix():
    assert asv(ShapleyMatrix(np.array(MEM)), ShapleyMatrix(np.array(INP)))[0] == pytest.approx(0.7)


def test_candidate_mismatch():
    with pytest.raises(ValueError):
        asv(np.zeros((2, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        asv_mu(np.zeros((2, 3)), np.zeros((3, 3)))


matrices = st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, (n, 3), elements=st.floats(-1, 1)),
        arrays(np.float64, (n, 2), elements=st.floats(-1, 1)),
        st.floats(-0.5, 0.5),
        st.permutations(range(n)),
    )
)


@given(matrices)
@settings(max_examples=100)
def test_shift_invariance_and_equivariance(case):
    a, b, c, perm = case
    for fn in (asv, asv_mu):
        s = fn(a, b)
        np.testing.assert_allclose(fn(a + c, b + c), s, atol=1e-12)
        np.testing.assert_array_equal(fn(a[perm], b[perm]), s[perm])


def test_one_by_one_agree():
    assert asv([[0.3]], [[-0.1]])[0] == asv_mu([[0.3]], [[-0.1]])[0]


def _pts(*xs, labels):
    return np.array(xs, dtype=float).reshape(len(xs), -1), np.array(labels)


class TestDistance:
    def test_min_example(self):
        cand = _pts([0.0], labels=[0])
        sub = _pts([2.0], [-5.0], labels=[0, 1])
        batch = _pts([1.0], [3.0], labels=[1, 1])
        assert dist_score(cand, sub, batch)[0] == -3.0

    def test_coincident(self):
        cand = _pts([1.0, 1.0], labels=[0])
        sub = _pts([1.0, 1.0], labels=[0])
        assert dist_score(cand, sub, sub)[0] == 0.0

    def test_absent_class_falls_back(self):
        cand = _pts([0.0], labels=[2])
        sub = _pts([4.0], [6.0], labels=[0, 1])
        batch = _pts([1.0], labels=[0])
        assert dist_score(cand, sub, batch)[0] == -5.0

    def test_mean_example(self):
        cand = _pts([0.0], labels=[0])
        sub = _pts([2.0], [-3.5], [100.0], labels=[0, 0, 1])
        batch = _pts([1.0], [-4.0], labels=[1, 1])
        assert dist_mu_score(cand, sub, batch)[0] == -5.25

    def test_mean_all_zero(self):
        cand = _pts([0.0], labels=[0])
        assert dist_mu_score(cand, cand, cand)[0] == 0.0

    def test_mean_absent_class(self):
        cand = _pts([0.0], labels=[2])
        sub = _pts([2.0], [4.0], labels=[0, 1])
        batch = _pts([1.0], [-3.0], labels=[0, 0])
        assert dist_mu_score(cand, sub, batch)[0] == -5.0

    def test_empty_batch(self):
        cand = _pts([0.0], labels=[0])
        with pytest.raises(ValueError):
            dist_score(cand, cand, (np.empty((0, 1)), np.empty(0)))

    def test_nonpositive_and_equivariant(self):
        gen = np.random.default_rng(4)
        Xc, yc = gen.normal(size=(7, 3)), gen.integers(0, 3, 7)
        sub = (gen.normal(size=(5, 3)), gen.integers(0, 3, 5))
        batch = (gen.normal(size=(4, 3)), gen.integers(0, 3, 4))
        perm = gen.permutation(7)
        for fn in (dist_score, dist_mu_score):
            s = fn((Xc, yc), sub, batch)
            assert np.all(s <= 0)
            np.testing.assert_array_equal(fn((Xc[perm], yc[perm]), sub, batch), s[perm])
