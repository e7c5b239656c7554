import itertools

import numpy as np
import pytest

from conftest import random_pd
from gaussdag import linalg
from gaussdag.errors import DimensionMismatch, EmptySubset, NotPositiveDefinite, ParseError


def leading_minors_positive(M):
    return all(np.linalg.det(M[:k, :k]) > 0 for k in range(1, M.shape[0] + 1))


def proper_subsets(n):
    for k in range(1, n):
        yield from itertools.combinations(range(n), k)


class TestCholeskyLogdet:
    def test_identity(self):
        L, ld = linalg.cholesky_logdet(np.eye(3))
        assert ld == 0.0
        np.testing.assert_array_equal(L, np.eye(3))

    def test_two_by_two(self):
        M = np.array([[2.0, 1.0], [1.0, 2.0]])
        L, ld = linalg.cholesky_logdet(M)
        assert abs(ld - np.log(3.0)) < 1e-12
        np.testing.assert_allclose(L @ L.T, M, rtol=1e-12)

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            linalg.cholesky_logdet([[1.0, 2.0], [2.0, 1.0]])

    def test_near_singular_is_rejected(self):
        M = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]])
        with pytest.raises(NotPositiveDefinite):
            linalg.cholesky_logdet(M)

    def test_analytic_three_by_three(self):
        M = np.array([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]])
        det = (
            4 * (3 * 2 - 0.2 * 0.2)
            - 1 * (1 * 2 - 0.2 * 0.5)
            + 0.5 * (1 * 0.2 - 3 * 0.5)
        )
        assert abs(linalg.logdet(M) - np.log(det)) < 1e-12

    def test_asymmetric_rejected(self):
        with pytest.raises(DimensionMismatch):
            linalg.cholesky_logdet([[1.0, 0.5], [0.0, 1.0]])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatch):
            linalg.cholesky_logdet(np.ones((2, 3)))


class TestSchur:
    def test_identity_blocks(self):
        np.testing.assert_array_equal(linalg.schur_complement(np.eye(3), [0, 1]), np.eye(2))

    def test_two_by_two(self):
        S = linalg.schur_complement([[2.0, 1.0], [1.0, 2.0]], [0])
        np.testing.assert_allclose(S, [[1.5]], rtol=1e-15)

    def test_submatrix_inverse_examples(self):
        np.testing.assert_allclose(linalg.submatrix_inverse_marginal(np.eye(4), [1, 3]), np.eye(2))
        np.testing.assert_allclose(linalg.submatrix_inverse_marginal([[2.0, 1.0], [1.0, 2.0]], [0]), [[1.5]])
        M = random_pd(np.random.default_rng(1), 3)
        np.testing.assert_array_equal(linalg.submatrix_inverse_marginal(M, [0, 1, 2]), M)

    def test_random_4x4_against_full_inverse(self):
        M = random_pd(np.random.default_rng(2), 4)
        oracle = np.linalg.inv(np.linalg.inv(M)[np.ix_([0, 2], [0, 2])])
        np.testing.assert_allclose(linalg.schur_complement(M, [0, 2]), oracle, rtol=1e-10)

    def test_schur_identity_property(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            M = random_pd(rng, n)
            for Y in proper_subsets(n):
                a = linalg.schur_complement(M, Y)
                b = linalg.submatrix_inverse_marginal(M, Y)
                assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))

    def test_determinant_factorization(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(2, 6))
            M = random_pd(rng, n)
            b1 = tuple(sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False)))
            b2 = linalg.complement(b1, n)
            lhs = linalg.logdet(M)
            rhs = linalg.logdet(M[np.ix_(b2, b2)]) + linalg.logdet(linalg.schur_complement(M, b1))
            assert abs(lhs - rhs) < 1e-10

    def test_empty_block_rejected(self):
        with pytest.raises(EmptySubset):
            linalg.schur_complement(np.eye(2), [])

    def test_schur_of_indefinite_block(self):
        M = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 2.0], [0.0, 2.0, 1.0]])
        with pytest.raises(NotPositiveDefinite):
            linalg.schur_complement(M, [0])


class TestPositiveDefinite:
    def test_examples(self):
        assert linalg.is_positive_definite(np.eye(3))
        assert not linalg.is_positive_definite([[1.0, 2.0], [2.0, 1.0]])

    def test_leading_minor_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            A = rng.standard_normal((4, 4))
            M = 0.5 * (A + A.T) + rng.uniform(0, 3) * np.eye(4)
            assert linalg.is_positive_definite(M) == leading_minors_positive(M)


def test_solve_and_inverse(rng):
    M = random_pd(rng, 5)
    B = rng.standard_normal((5, 2))
    np.testing.assert_allclose(M @ linalg.solve_spd(M, B), B, atol=1e-10)
    Minv = linalg.inv_spd(M)
    assert np.array_equal(Minv, Minv.T)
    np.testing.assert_allclose(Minv @ M, np.eye(5), atol=1e-10)


def test_index_set():
    assert linalg.index_set([3, 1], 4) == (1, 3)
    assert linalg.complement([1, 3], 5) == (0, 2, 4)
    with pytest.raises(ValueError):
        linalg.index_set([1, 1], 3)
    with pytest.raises(IndexError):
        linalg.index_set([5], 3)


def test_read_matrix_csv(tmp_path):
    p = tmp_path / "T.csv"
    p.write_text("2,1.0000000001\n1,2\n")
    M = linalg.read_matrix_csv(p)
    assert M[0, 1] == M[1, 0]
    p.write_text("2,1.1\n1,2\n")
    with pytest.raises(ParseError):
        linalg.read_matrix_csv(p)
