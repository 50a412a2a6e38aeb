"""Acceptance criteria AC1..AC11, each checked at its stated tolerance and time limit.

Every test prints one ``ACn PASS|FAIL`` line; the lines are also collected
into the pytest terminal summary.  Run alone with

    pytest tests/test_acceptance.py -v
"""
import cmath
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from polyrank import cli, corpus
from polyrank.bias import bias_exact
from polyrank.descent import (INTEGERS, kernel_bound, mod_p_descent_report, scaling_lemma_audit,
                              small_kernel_vector)
from polyrank.fields import QQ, ZZ, PrimeField, finite_field
from polyrank.forms import (FormCollection, HomogeneousForm, LinearMapTuple, MultilinearForm, compose,
                            diagonal_collection, diagonal_form, polarize, random_form, random_homogeneous)
from polyrank.geometry import (birch_rank_estimate, codim_from_counts, diagonal_locus_count,
                               geometry_inequality_audit, gradient_locus_count, singular_locus_count)
from polyrank.linalg import random_invertible
from polyrank.rank import (SchmidtDecomposition, prk_upper, prk_upper_from_schmidt,
                           schmidt_from_prk_certificate, verify_certificate)
from polyrank.universality import build_system, solve_embedding, verify_embedding


def record(name, ok, elapsed, limit, detail=""):
    ok = ok and elapsed < limit
    line = f"{name} {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s / {limit}s) {detail}".rstrip()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def smallfield_corpus(count=300):
    return [corpus.smallfield_multilinear(seed) for seed in range(count)]


# ---------------------------------------------------------------------------


def test_ac1_polarization_identity():
    t0 = time.perf_counter()
    bad = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        d, s = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        Q = random_homogeneous(QQ, d, s, seed=seed)
        Pt = polarize(Q)
        for _ in range(20):
            x = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, s), rng.integers(1, 10, s))]
            if Pt.evaluate(*([x] * d)) != math.factorial(d) * Q.evaluate(x):
                bad += 1
    record("AC1", bad == 0, time.perf_counter() - t0, 10, f"mismatches={bad}")


def _schmidt_instance(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    s = int(rng.integers(2, 5))
    r = int(rng.integers(1, 4))
    terms = []
    for i in range(r):
        a = int(rng.integers(1, d))
        R = random_homogeneous(QQ, a, s, seed=int(rng.integers(0, 2**31)))
        S = random_homogeneous(QQ, d - a, s, seed=int(rng.integers(0, 2**31)))
        terms.append((R, S))
    dec = SchmidtDecomposition(terms)
    return dec.expand(QQ, d, s), dec, d, r


def test_ac2_rank_bridge():
    t0 = time.perf_counter()
    failures = []
    for seed in range(50):
        Q, dec, d, r = _schmidt_instance(seed)
        cert = prk_upper_from_schmidt(Q, dec)
        if not verify_certificate(polarize(Q), cert) or cert.rank > math.comb(d, d // 2) * r:
            failures.append((seed, "prk"))
            continue
        back = schmidt_from_prk_certificate(Q, cert)
        if not back.verify(Q) or back.length > cert.rank:
            failures.append((seed, "schmidt"))
    record("AC2", not failures, time.perf_counter() - t0, 30, f"failures={failures}")


def test_ac3_bias_slice_equality():
    t0 = time.perf_counter()
    worst = 0.0
    for P in smallfield_corpus(300):
        q = P.ring.order
        lc = singular_locus_count(P)
        lhs = bias_exact(P, method="character").value
        rhs = lc.total_points / q ** lc.ambient_dim
        worst = max(worst, abs(lhs - rhs))
    record("AC3", worst <= 1e-9, time.perf_counter() - t0, 60, f"max_abs_diff={worst:.2e}")


def _single_block_bias(q, d):
    """|E omega^{x_1 ... x_d}| by direct enumeration over F_q^d."""
    omega = cmath.exp(2j * math.pi / q)
    total = sum(omega ** (math.prod(x) % q) for x in itertools.product(range(q), repeat=d))
    return abs(total) / q ** d


def test_ac4_diagonal_bias_law():
    t0 = time.perf_counter()
    worst = 0.0
    for q in (2, 3, 5):
        for d in (2, 3):
            beta = _single_block_bias(q, d)
            if d == 2:
                worst = max(worst, abs(beta - 1 / q))
            for r in (1, 2, 3):
                b = bias_exact(diagonal_form(PrimeField(q), r, d)).value
                worst = max(worst, abs(b - beta ** r))
                if d == 2:
                    worst = max(worst, abs(b - q ** -r))
    record("AC4", worst <= 1e-9, time.perf_counter() - t0, 30, f"max_abs_diff={worst:.2e}")


def test_ac5_kz_direction():
    t0 = time.perf_counter()
    violations = 0
    for P in smallfield_corpus(300):
        cert = prk_upper(P)
        assert verify_certificate(P, cert)
        if bias_exact(P).exact < Fraction(1, P.ring.order ** cert.rank):
            violations += 1
    record("AC5", violations == 0, time.perf_counter() - t0, 60, f"violations={violations}")


def test_ac6_codim_and_diagonal_exactness():
    t0 = time.perf_counter()
    codim_bad = 0
    for P in smallfield_corpus(300):
        lc = singular_locus_count(P)
        if lc.codim_estimate > prk_upper(P).rank:
            codim_bad += 1
    exact_bad = []
    d = 3
    for q in (2, 3, 4, 5, 7):
        for rbar in (1, 2):
            for n in (1, 2):
                N = n * rbar
                if q ** (2 * N) > 6 * 10**6:
                    continue
                F = finite_field(2, 2) if q == 4 else PrimeField(q)
                coll = diagonal_collection(n, rbar, d, F)
                for c in itertools.product(range(2), repeat=n):
                    m = sum(1 for x in c if x)
                    if m == 0:
                        continue
                    P = coll.combination(c)
                    got = singular_locus_count(P).total_points
                    want = diagonal_locus_count(q, d, m, rbar, N)
                    lower = q ** (2 * N - m * rbar)
                    if got != want or got != (2 * q - 1) ** (m * rbar) * q ** (2 * (N - m * rbar)):
                        exact_bad.append((q, rbar, n, c, got, want))
                    if not lower <= got <= (d - 1) ** (m * rbar) * lower:
                        exact_bad.append((q, rbar, n, c, "sandwich"))
    record("AC6", codim_bad == 0 and not exact_bad, time.perf_counter() - t0, 60,
           f"codim_violations={codim_bad} diagonal_mismatches={exact_bad}")


def test_ac7_scaling_gate():
    t0 = time.perf_counter()
    verdicts = []
    for seed in range(200):
        system, R, L, modulus = corpus.scaling_instance(seed)
        verdicts.append(scaling_lemma_audit(system, R, L, modulus).verdict)
    code = cli.run(["audit", "scaling", "--seeds", "200", "--out", "/dev/null"])
    ok = all(v == "holds" for v in verdicts) and code == 0
    record("AC7", ok, time.perf_counter() - t0, 60,
           f"holds={verdicts.count('holds')}/200 cli_exit={code}")


def test_ac8_cramer_gate():
    t0 = time.perf_counter()
    bad = []
    for seed in range(200):
        M = corpus.cramer_instance(seed)
        a = small_kernel_vector(M)
        n = len(M[0])
        T = max(1, max(abs(x) for row in M for x in row))
        if any(sum(x * y for x, y in zip(row, a)) for row in M) or not any(a):
            bad.append((seed, "kernel"))
        if max(abs(x) for x in a) > kernel_bound(n, T, INTEGERS) or max(abs(x) for x in a) > n ** (n / 2) * T ** (n - 1):
            bad.append((seed, "bound"))
    record("AC8", not bad, time.perf_counter() - t0, 10, f"failures={bad}")


def _embedding_instances():
    """(source, targets) pairs where the source rank exceeds what the target needs."""
    out = []
    # d = 2: rank(P) >= rank(R) always suffices
    for seed in range(20):
        rng = np.random.default_rng(seed)
        F = PrimeField(int(rng.choice([2, 3])))
        dims = tuple(int(x) for x in rng.integers(2, 4, size=2))
        P = random_form(F, 2, dims, seed=seed)
        r = prk_upper(P).rank
        R = diagonal_form(F, min(r, 2), 2, (2, 2))
        out.append((FormCollection([P]), FormCollection([R])))
    # d = 3: diagonal targets D_j realized by sources of larger diagonal rank
    for seed in range(15):
        rng = np.random.default_rng(100 + seed)
        F = PrimeField(int(rng.choice([2, 3])))
        n = int(rng.integers(1, 3))
        t = 2
        rbar = t // n
        r = rbar + int(rng.integers(0, 2))
        # one change of basis per slot, shared by the whole collection
        maps = [random_invertible(F, r * n, rng) for _ in range(3)]
        members = []
        for j in range(n):
            C = np.roll(diagonal_form(F, r, 3, (r * n,) * 3).coeffs, shift=j * r, axis=(0, 1, 2))
            for i in range(3):
                C = F.matmul_axis(C, maps[i], i)
            members.append(MultilinearForm(F, C))
        targets = diagonal_collection(n, rbar, 3, F)
        out.append((FormCollection(members), targets))
    # d = 3: planted targets P o T for random T
    for seed in range(15):
        rng = np.random.default_rng(200 + seed)
        F = PrimeField(int(rng.choice([2, 3])))
        P = random_form(F, 3, (2, 2, 2), seed=300 + seed)
        T = LinearMapTuple(F, [F.random(rng, (2, 2)) for _ in range(3)])
        out.append((FormCollection([P]), FormCollection([compose(P, T)])))
    return out


def test_ac9_universality_solver():
    t0 = time.perf_counter()
    bad = []
    instances = _embedding_instances()
    for k, (src, tgt) in enumerate(instances):
        system = build_system(src, tgt)
        res = solve_embedding(system, "exhaustive")
        if not res.found or not verify_embedding(system, res.embedding):
            bad.append((k, res.status))
            continue
        # independent compose check on each member
        for P, R in zip(src.members, tgt.members):
            if compose(P, res.embedding) != R:
                bad.append((k, "compose"))
    # prk 1 source cannot reach a rank 2 target
    F = PrimeField(2)
    src = MultilinearForm(F, F.array(np.array([[1, 0], [0, 0]])))
    tgt = diagonal_form(F, 2, 2)
    res = solve_embedding(build_system(src, tgt), "exhaustive")
    impossible_ok = res.status == "not-found" and res.certified
    record("AC9", not bad and impossible_ok and len(instances) == 50, time.perf_counter() - t0, 300,
           f"instances={len(instances)} failures={bad} impossible={res.status}/certified={res.certified}")


def test_ac10_descent_pipeline():
    t0 = time.perf_counter()
    primes = (5, 7, 11, 13)
    bad = []
    for d in (2, 3):
        for r in (1, 2, 3):
            P = diagonal_form(ZZ, r, d)
            report, rows = mod_p_descent_report(P, primes)
            for row in rows:
                if not (row["lower"] == row["upper"] == r):
                    bad.append((d, r, row["p"], row["lower"], row["upper"]))
                if row["ceiling"] != 2 ** (d - 1) * d * r or row["caveat"]:
                    bad.append((d, r, row["p"], "ceiling"))
            if report.lhs != r or not report.rhs >= report.lhs or report.verdict != "consistent":
                bad.append((d, r, "q-upper", report.lhs, report.rhs))
    planted = MultilinearForm(ZZ, ZZ.array(np.full((1, 1, 1), 7)))
    _, rows = mod_p_descent_report(planted, primes)
    flagged = [row["p"] for row in rows if row["caveat"]]
    record("AC10", not bad and flagged == [7], time.perf_counter() - t0, 60,
           f"failures={bad} flagged={flagged}")


def test_ac11_geometry_audits():
    t0 = time.perf_counter()
    bad = []
    F = PrimeField(5)
    for seed in range(50):
        Q = random_homogeneous(F, 3, 3, seed=seed)
        rep = geometry_inequality_audit(Q)
        if rep.verdict == "violated-estimate" or rep.lhs["rk_B"] > rep.rhs["2rk"]:
            bad.append((seed, rep.verdict))
    s = 3
    diag = HomogeneousForm(F, 3, s, {tuple(3 if j == i else 0 for j in range(s)): 1 for i in range(s)})
    lc = gradient_locus_count(diag)
    ok_diag = lc.total_points == 1 and codim_from_counts(lc) == s and birch_rank_estimate(diag).codim_estimate == s
    record("AC11", not bad and ok_diag, time.perf_counter() - t0, 120,
           f"failures={bad} diagonal_points={lc.total_points} codim={lc.codim_estimate}")
