from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyrank.fields import QQ, ZZ, ExtensionField, PrimeField
from polyrank.linalg import (affine_solutions, batch_rank, column_space, gaussian_binomial, is_invertible,
                             nullspace, random_invertible, rank, rref, row_space, solve, subspaces)

FIELDS = [PrimeField(2), PrimeField(3), PrimeField(5), ExtensionField(2, 2)]


def kernel_size(F, M):
    """Oracle: count x with M x = 0 by enumeration."""
    X = F.all_vectors(M.shape[1])
    return int(np.count_nonzero(~F.matmul(X, np.ascontiguousarray(M.T)).any(axis=1)))


@st.composite
def small_matrices(draw):
    F = draw(st.sampled_from(FIELDS))
    m = draw(st.integers(1, 4))
    n = draw(st.integers(1, 4))
    vals = draw(st.lists(st.integers(0, F.order - 1), min_size=m * n, max_size=m * n))
    return F, np.array(vals, dtype=np.int64).reshape(m, n)


@given(small_matrices())
def test_rank_matches_kernel_count(data):
    F, M = data
    r = rank(F, M)
    assert F.order ** (M.shape[1] - r) == kernel_size(F, M)
    assert batch_rank(F, M[None])[0] == r
    assert rank(F, M.T) == r


@given(small_matrices())
def test_nullspace_and_solve(data):
    F, M = data
    K = nullspace(F, M)
    assert len(K) == M.shape[1] - rank(F, M)
    if len(K):
        assert not F.matmul(M, np.ascontiguousarray(K.T)).any()
    rng = np.random.default_rng(0)
    x = F.random(rng, M.shape[1])
    b = F.matmul(M, x.reshape(-1, 1)).reshape(-1)
    y = solve(F, M, b)
    assert y is not None
    assert np.array_equal(F.matmul(M, y.reshape(-1, 1)).reshape(-1), b)


def test_solve_inconsistent():
    F = PrimeField(3)
    assert solve(F, [[1, 1], [2, 2]], [1, 0]) is None


def test_affine_solutions_enumerates_everything():
    F = PrimeField(3)
    A = np.array([[1, 1, 0]])
    sols = {tuple(int(v) for v in x) for x in affine_solutions(F, A, [2])}
    want = {x for x in np.ndindex(3, 3, 3) if (x[0] + x[1]) % 3 == 2}
    assert sols == want


def test_rref_over_rationals():
    R, piv = rref(QQ, [[2, 4], [1, 3]])
    assert piv == [0, 1]
    assert R.tolist() == [[1, 0], [0, 1]]
    assert rank(QQ, [[1, 2], [2, 4]]) == 1
    x = solve(QQ, [[2, 0], [0, 3]], [1, 1])
    assert list(x) == [Fraction(1, 2), Fraction(1, 3)]


def test_rref_rejects_integers():
    with pytest.raises(ValueError):
        rref(ZZ, [[1, 2]])


def test_row_and_column_space():
    F = PrimeField(2)
    M = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert len(row_space(F, M)) == 2
    C = column_space(F, M)
    assert C.shape == (2, 3)
    assert rank(F, C) == 2


def test_batch_rank_tall_and_wide():
    F = PrimeField(5)
    rng = np.random.default_rng(1)
    stack = F.random(rng, (50, 4, 2))
    assert batch_rank(F, stack).tolist() == [rank(F, M) for M in stack]
    stack = F.random(rng, (50, 2, 5))
    assert batch_rank(F, stack).tolist() == [rank(F, M) for M in stack]


@pytest.mark.parametrize("F", FIELDS, ids=repr)
@pytest.mark.parametrize("n,k", [(3, 0), (3, 1), (3, 2), (3, 3), (4, 2)])
def test_subspace_enumeration(F, n, k):
    S = subspaces(F, n, k)
    assert len(S) == gaussian_binomial(n, k, F.order)
    if k:
        assert all(rank(F, B) == k for B in S)
        # distinct RREF bases are distinct subspaces
        assert len({B.tobytes() for B in S}) == len(S)


def test_gaussian_binomial_values():
    assert gaussian_binomial(2, 1, 2) == 3
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(3, 5, 2) == 0


def test_random_invertible():
    rng = np.random.default_rng(3)
    for F in FIELDS:
        M = random_invertible(F, 3, rng)
        assert is_invertible(F, M)
    assert not is_invertible(PrimeField(2), [[1, 1], [1, 1]])
