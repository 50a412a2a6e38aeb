import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyrank import corpus
from polyrank.bias import prk_lower_from_bias
from polyrank.descent import (GAUSSIAN_INTEGERS, INTEGERS, PseudoNormedRing, adjugate, apply_matrix,
                              ball_enumerate, box_counts, certified_q_upper, count_box_solutions, cramer_audit,
                              determinant, kernel_bound, linear_growth, mod_p_descent_report, polynomial_ring,
                              scaling_lemma_audit, small_kernel_vector)
from polyrank.fields import ZZ
from polyrank.forms import MultilinearForm, diagonal_form, random_form, reduce_mod_p

F2T = polynomial_ring(2)
RINGS = [INTEGERS, GAUSSIAN_INTEGERS, F2T, polynomial_ring(3)]


def zform(coeffs):
    return MultilinearForm(ZZ, ZZ.array(np.array(coeffs, dtype=object)))


def brute_box(system, R, variant, modulus=None):
    coords = range(0, R) if variant == "closed" else range(-R + 1, R)
    dims = system[0].dims
    count = 0
    for xs in itertools.product(*[list(itertools.product(coords, repeat=n)) for n in dims]):
        vals = [int(P.evaluate(*[list(x) for x in xs])) for P in system]
        if all((v % modulus if modulus else v) == 0 for v in vals):
            count += 1
    return count


# ---------------------------------------------------------------------------
# pseudo-normed rings


def test_ball_examples():
    assert sorted(ball_enumerate(INTEGERS, 2)) == [-2, -1, 0, 1, 2]
    ball = ball_enumerate(F2T, 2)
    assert sorted(ball) == sorted([((),), ((1,),), ((0, 1),), ((1, 1),)])
    assert len(ball_enumerate(PseudoNormedRing("Zm", 2, GAUSSIAN_INTEGERS.table), 1)) == 9


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.kind + str(r.q or r.m))
def test_pseudo_norm_axioms(ring):
    rng = np.random.default_rng(0)
    c = ring.mul_constant
    assert ring.phi(ring.zero) == 0 and ring.phi(ring.one) == 1
    for _ in range(1000):
        a, b = ring.random(rng, 30), ring.random(rng, 30)
        assert ring.phi(a) >= 0 and (ring.phi(a) == 0) == ring.is_zero(a)
        assert ring.phi(ring.add(a, b)) <= ring.phi(a) + ring.phi(b)
        assert ring.phi(ring.neg(a)) == ring.phi(a)
        assert ring.phi(ring.mul(a, b)) <= c * ring.phi(a) * ring.phi(b)
    assert ring.estimate_constant(samples=200) <= c


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.kind + str(r.q or r.m))
def test_ring_laws(ring):
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b, e = (ring.random(rng, 9) for _ in range(3))
        assert ring.mul(a, b) == ring.mul(b, a)
        assert ring.mul(a, ring.add(b, e)) == ring.add(ring.mul(a, b), ring.mul(a, e))
        assert ring.mul(a, ring.one) == a
        assert ring.is_zero(ring.sub(a, a))


def test_gaussian_integers_multiply():
    i = (0, 1)
    assert GAUSSIAN_INTEGERS.mul(i, i) == (-1, 0)
    assert GAUSSIAN_INTEGERS.mul((1, 1), (1, -1)) == (2, 0)


def test_ring_json_round_trip():
    for ring in RINGS:
        assert PseudoNormedRing.from_json(ring.to_json()) == ring
    with pytest.raises(ValueError):
        polynomial_ring(4)
    with pytest.raises(ValueError):
        PseudoNormedRing("Zm", 2, (((1,),),))


def test_linear_growth():
    growth = linear_growth(INTEGERS, 2, [1, 2, 4, 8])
    assert all(g <= 3 for g in growth)
    assert linear_growth(F2T, 2, [2, 4]) == [Fraction(2), Fraction(2)]


# ---------------------------------------------------------------------------
# box counts and the scaling gate


def test_box_count_examples():
    assert count_box_solutions([zform([1])], 5, "closed") == 1
    xy = zform([[1]])
    assert count_box_solutions([xy], 3, "closed") == 5
    Z = zform([[0, 0], [0, 0]])
    assert count_box_solutions([Z], 3, "closed") == 3 ** 4
    res = box_counts([xy], 2, 2)
    assert (res.N, res.N_prime) == (7, 5)
    rep = scaling_lemma_audit([xy], 2, 2)
    assert rep.verdict == "holds" and rep.lhs == 7 and rep.rhs == 20


def test_linear_system_scaling():
    rep = scaling_lemma_audit([zform([2, 3])], 3, 2)
    assert rep.verdict == "holds"


@pytest.mark.parametrize("seed", range(8))
def test_box_count_matches_brute_force(seed):
    system, R, L, modulus = corpus.scaling_instance(seed)
    R = min(R, 3)
    for variant in ("closed", "symmetric"):
        assert count_box_solutions(system, R, variant, modulus) == brute_box(system, R, variant, modulus)


def test_scaling_fuzz_bilinear_mod_p():
    rng = np.random.default_rng(5)
    for seed in range(100):
        dims = (int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        P = random_form(ZZ, 2, dims, seed=seed)
        p = int(rng.choice([2, 3, 5, 7]))
        R, L = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        assert scaling_lemma_audit([P], R, L, p).verdict == "holds"


# ---------------------------------------------------------------------------
# determinants and the Cramer construction


def test_small_kernel_examples():
    assert small_kernel_vector([[2, 4]]) == [-4, 2]
    assert small_kernel_vector([[0, 0, 0]]) == [1, 0, 0]
    assert kernel_bound(2, 4) >= 4


def test_small_kernel_rejects_full_rank():
    with pytest.raises(ValueError):
        small_kernel_vector([[1, 0], [0, 1]])


def test_determinant_and_adjugate():
    M = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    assert determinant(M) == int(round(np.linalg.det(np.array(M))))
    A = adjugate(M)
    prod = [[sum(M[i][k] * A[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert prod == [[determinant(M) if i == j else 0 for j in range(3)] for i in range(3)]


@pytest.mark.parametrize("seed", range(100))
def test_random_2x3_kernels(seed):
    rng = np.random.default_rng(seed)
    M = rng.integers(-9, 10, size=(2, 3)).tolist()
    a = small_kernel_vector(M)
    assert any(a) and all(isinstance(x, int) for x in a)
    assert apply_matrix(M, a) == [0, 0]
    T = max(1, max(abs(x) for row in M for x in row))
    assert max(abs(x) for x in a) <= 3 ** 1.5 * T ** 2
    # cross-check against rational elimination: a spans the rational kernel when rank M = 2
    if np.linalg.matrix_rank(np.array(M)) == 2:
        cross = np.cross(np.array(M[0]), np.array(M[1]))
        assert np.linalg.matrix_rank(np.array([cross, a])) == 1


def test_cramer_over_gaussian_and_polynomial_rings():
    M = [[(1, 1), (2, 0)], [(2, 2), (4, 0)]]
    a = small_kernel_vector(M, GAUSSIAN_INTEGERS)
    assert all(GAUSSIAN_INTEGERS.is_zero(v) for v in apply_matrix(M, a, GAUSSIAN_INTEGERS))
    assert cramer_audit(M, GAUSSIAN_INTEGERS).verdict == "holds"
    t = ((0, 1),)
    M = [[t, ((1,),)]]
    a = small_kernel_vector(M, F2T)
    assert all(F2T.is_zero(v) for v in apply_matrix(M, a, F2T))
    assert cramer_audit(M, F2T).verdict == "holds"


@settings(max_examples=50)
@given(st.integers(0, 2**31))
def test_cramer_audit_fuzz(seed):
    assert cramer_audit(corpus.cramer_instance(seed)).verdict == "holds"


# ---------------------------------------------------------------------------
# mod-p descent


@pytest.mark.parametrize("d,r", [(2, 1), (2, 3), (3, 2)])
def test_descent_diagonal(d, r):
    report, rows = mod_p_descent_report(diagonal_form(ZZ, r, d), [5, 7])
    assert all(row["upper"] == r == row["lower"] for row in rows)
    assert all(row["ceiling"] == 2 ** (d - 1) * d * r >= r for row in rows)
    assert all(row["kz_holds"] and row["scaling_holds"] for row in rows)
    assert report.lhs == r and report.verdict == "consistent"


def test_descent_zero_form():
    report, rows = mod_p_descent_report(MultilinearForm.zero(ZZ, (2, 2)), [3, 5])
    assert all(row["lower"] == row["upper"] == 0 for row in rows)
    assert report.lhs == 0


def test_descent_planted_prime():
    P = zform([[[7]]])
    report, rows = mod_p_descent_report(P, [5, 7, 11])
    at7 = next(row for row in rows if row["p"] == 7)
    assert at7["upper"] == 0 and at7["ceiling"] == 0 and at7["caveat"]
    assert [row["p"] for row in rows if row["caveat"]] == [7]
    assert report.witness["flagged_primes"] == [7]


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_descent_consistency(seed):
    P = random_form(ZZ, 3, (2, 2, 2), seed=seed)
    q_upper, _ = certified_q_upper(P)
    for p in (3, 5, 7):
        assert prk_lower_from_bias(reduce_mod_p(P, p)) <= q_upper


def test_certified_q_upper_with_supplied_certificate():
    from polyrank.rank import trivial_certificate
    P = diagonal_form(ZZ, 2, 3)
    assert certified_q_upper(P, trivial_certificate(P))[0] == 2
    with pytest.raises(ValueError):
        certified_q_upper(P, trivial_certificate(diagonal_form(ZZ, 1, 3, (2, 2, 2))))
