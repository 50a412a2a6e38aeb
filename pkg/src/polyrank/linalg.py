"""Exact linear algebra over the rings in :mod:`polyrank.fields`.

Row reduction works for any field ring (finite fields and Q).  Finite fields
also get a batched rank routine that reduces a whole stack of matrices at once,
which is what the rank search spends most of its time in.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .fields import FiniteField, Ring, check_cap


def _copy(ring: Ring, M) -> np.ndarray:
    return np.array(ring.array(M), copy=True)


def rref(ring: Ring, M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    if not ring.is_field:
        raise ValueError(f"row reduction needs a field, got {ring!r}")
    R = _copy(ring, M)
    if R.ndim != 2:
        raise ValueError("expected a matrix")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(~ring.zero_mask(R[r:, c]))[0]
        if len(nz) == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = ring.mul(R[r], ring.inv(R[r, c]))
        factors = R[:, c].copy()
        factors[r] = ring.zero
        R = ring.sub(R, ring.mul(factors[:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def batch_rank(field: FiniteField, stack) -> np.ndarray:
    """Ranks of a stack of matrices (N, m, n) over a finite field."""
    A = np.array(stack, dtype=np.int64, copy=True)
    if A.ndim != 3:
        raise ValueError("expected a stack of matrices")
    if A.shape[1] > A.shape[2]:
        A = np.ascontiguousarray(np.swapaxes(A, 1, 2))
    N, m, n = A.shape
    rank = np.zeros(N, dtype=np.int64)
    if N == 0 or m == 0:
        return rank
    rows = np.arange(m)
    inv = field.inverse_table
    for c in range(n):
        mask = (A[:, :, c] != 0) & (rows[None, :] >= rank[:, None])
        has = mask.any(axis=1)
        if not has.any():
            continue
        sel = np.nonzero(has)[0]
        piv = mask[sel].argmax(axis=1)
        rr = rank[sel]
        row_p = A[sel, piv].copy()
        A[sel, piv] = A[sel, rr]
        A[sel, rr] = row_p
        scale = inv[A[sel, rr, c]]
        A[sel, rr] = field.mul(A[sel, rr], scale[:, None])
        factors = A[sel, :, c].copy()
        factors[np.arange(len(sel)), rr] = 0
        sub = A[sel]
        sub = field.sub(sub, field.mul(factors[:, :, None], A[sel, rr][:, None, :]))
        A[sel] = sub
        rank[sel] += 1
        if rank.min() == m:
            break
    return rank


def rank(ring: Ring, M) -> int:
    M = ring.array(M)
    if M.size == 0:
        return 0
    if isinstance(ring, FiniteField):
        return int(batch_rank(ring, M[None])[0])
    return len(rref(ring, M)[1])


def nullspace(ring: Ring, M) -> np.ndarray:
    """Basis of {x : M x = 0} as rows."""
    M = ring.array(M)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return _identity(ring, cols)
    R, pivots = rref(ring, M)
    free = [c for c in range(cols) if c not in pivots]
    basis = ring.zeros((len(free), cols))
    for i, f in enumerate(free):
        basis[i, f] = ring.one
        for row, pc in enumerate(pivots):
            basis[i, pc] = ring.neg(R[row, f])
    return basis


def row_space(ring: Ring, M) -> np.ndarray:
    R, pivots = rref(ring, M)
    return R[: len(pivots)]


def column_space(ring: Ring, M) -> np.ndarray:
    """Basis of the column span, returned as rows (original columns at the pivots)."""
    M = ring.array(M)
    _, pivots = rref(ring, M)
    return np.ascontiguousarray(M[:, pivots].T)


def solve(ring: Ring, A, b):
    """One solution x of A x = b, or None when the system is inconsistent."""
    A = ring.array(A)
    b = ring.array(b).reshape(-1, 1)
    cols = A.shape[1]
    R, pivots = rref(ring, np.concatenate([A, b], axis=1))
    if cols in pivots:
        return None
    x = ring.zeros(cols)
    for row, pc in enumerate(pivots):
        x[pc] = R[row, cols]
    return x


def affine_solutions(field: FiniteField, A, b, cap: int = 10**6):
    """Every solution of A x = b over a finite field, in a fixed order."""
    x0 = solve(field, A, b)
    if x0 is None:
        return
    K = nullspace(field, A)
    check_cap(field.order ** len(K), cap, "affine solution set")
    for coeffs in itertools.product(range(field.order), repeat=len(K)):
        x = x0
        for c, v in zip(coeffs, K):
            if c:
                x = field.add(x, field.mul(c, v))
        yield x


def _identity(ring: Ring, n: int) -> np.ndarray:
    I = ring.zeros((n, n))
    for i in range(n):
        I[i, i] = ring.one
    return I


identity = _identity


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@lru_cache(maxsize=None)
def _subspaces(field: FiniteField, n: int, k: int) -> np.ndarray:
    q = field.order
    if k == 0:
        return np.zeros((1, 0, n), dtype=np.int64)
    out = []
    for piv in itertools.combinations(range(n), k):
        free = [(i, c) for i in range(k) for c in range(piv[i] + 1, n) if c not in piv]
        base = np.zeros((k, n), dtype=np.int64)
        for i, c in enumerate(piv):
            base[i, c] = 1
        if not free:
            out.append(base[None])
            continue
        vals = field.all_vectors(len(free))
        block = np.repeat(base[None], len(vals), axis=0)
        ri = np.array([f[0] for f in free])
        ci = np.array([f[1] for f in free])
        block[:, ri, ci] = vals
        out.append(block)
    stack = np.concatenate(out, axis=0)
    stack.setflags(write=False)
    return stack


def subspaces(field: FiniteField, n: int, k: int, cap: int = 10**6) -> np.ndarray:
    """Every k-dimensional subspace of F^n as a stack (N, k, n) of RREF bases."""
    if not 0 <= k <= n:
        raise ValueError("subspace dimension out of range")
    check_cap(gaussian_binomial(n, k, field.order), cap, "subspace enumeration")
    return _subspaces(field, n, k)


def is_invertible(ring: Ring, M) -> bool:
    M = ring.array(M)
    return M.shape[0] == M.shape[1] and rank(ring, M) == M.shape[0]


def random_invertible(field: FiniteField, n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        M = field.random(rng, (n, n))
        if rank(field, M) == n:
            return M
