import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtpgd.lowrank import greedy_rank_one, separated_norm


class TestGreedyRankOne:
    def test_exhausts_rank(self, rng):
        M = rng.normal(size=(30, 3)) @ rng.normal(size=(3, 25))
        left, right, trace = greedy_rank_one(M, tol=1e-14)
        assert left.shape[1] <= 3
        assert np.linalg.norm(M - left @ right.T) <= 1e-12 * np.linalg.norm(M)

    def test_unit_right_vectors(self, rng):
        _, right, _ = greedy_rank_one(rng.normal(size=(8, 6)), tol=1e-3)
        assert np.allclose(np.linalg.norm(right, axis=0), 1.0)

    def test_trace_monotone_and_matches(self, rng):
        M = rng.normal(size=(12, 9))
        left, right, trace = greedy_rank_one(M, tol=0.0)
        assert np.all(np.diff(trace) <= 1e-15)
        for k in range(left.shape[1]):
            res = np.linalg.norm(M - left[:, :k + 1] @ right[:, :k + 1].T) / np.linalg.norm(M)
            assert trace[k] == pytest.approx(res, abs=1e-13)

    def test_first_term_is_dominant_singular_pair(self, rng):
        M = rng.normal(size=(15, 10))
        left, right, _ = greedy_rank_one(M, tol=0.5, max_terms=1)
        s = np.linalg.svd(M, compute_uv=False)
        assert np.linalg.norm(left[:, 0]) == pytest.approx(s[0], rel=1e-10)

    def test_zero(self):
        left, right, trace = greedy_rank_one(np.zeros((4, 5)), tol=1e-6)
        assert left.shape == (4, 0) and right.shape == (5, 0) and trace.size == 0


class TestSeparatedNorm:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_matches_dense(self, m, seed):
        r = np.random.default_rng(seed)
        A, B = r.normal(size=(20, m)), r.normal(size=(15, m))
        assert separated_norm(A, B) == pytest.approx(np.linalg.norm(A @ B.T), rel=1e-12)

    def test_cancellation(self, rng):
        a, b = rng.normal(size=(50, 1)), rng.normal(size=(40, 1))
        d = 1e-9 * rng.normal(size=(50, 1))
        A = np.hstack([a + d, -a])
        B = np.hstack([b, b])
        exact = np.linalg.norm(d) * np.linalg.norm(b)
        assert separated_norm(A, B) == pytest.approx(exact, rel=1e-6)

    def test_empty(self):
        assert separated_norm(np.zeros((3, 0)), np.zeros((4, 0))) == 0.0
