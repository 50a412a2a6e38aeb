"""Pseudo-normed rings, box counting, small kernel vectors and mod-p descent."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bias import bias_exact, prk_lower_from_bias, zero_slice_count
from .fields import ZZ, PrimeField, check_cap, is_prime
from .forms import MultilinearForm, reduce_mod_p
from .rank import (PartitionRankCertificate, monomial_certificate, prk_upper, prk_upper_search,
                   trivial_certificate, verify_certificate)
from .report import AuditReport

DEFAULT_CAP = 10**7

GAUSSIAN_TABLE = (((1, 0), (0, 1)), ((0, 1), (-1, 0)))


def _trim(poly, q):
    poly = [int(c) % q for c in poly]
    while poly and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


def _padd(a, b, q):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], q)


def _pmul(a, b, q):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out, q)


@dataclass(frozen=True)
class PseudoNormedRing:
    """Z, Z^m with a multiplication table, or F_q[t]^m with a table over F_q.

    ``table[i][j][k]`` is the coefficient of basis element k in b_i * b_j.
    """

    kind: str = "Z"
    m: int = 1
    table: tuple = ()
    unit: tuple = ()
    q: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Zm", "Fqt"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Fqt" and not is_prime(self.q):
            raise ValueError("F_q[t] is supported for prime q")
        if self.kind != "Z":
            table = self.table or (((1,),),)
            table = tuple(tuple(tuple(int(c) for c in row) for row in plane) for plane in table)
            if len(table) != self.m or any(len(pl) != self.m or any(len(r) != self.m for r in pl) for pl in table):
                raise ValueError("multiplication table must be m x m x m")
            object.__setattr__(self, "table", table)
            unit = tuple(self.unit) if self.unit else (1,) + (0,) * (self.m - 1)
            object.__setattr__(self, "unit", tuple(int(c) for c in unit))

    # elements ---------------------------------------------------------------
    @property
    def zero(self):
        if self.kind == "Z":
            return 0
        if self.kind == "Zm":
            return (0,) * self.m
        return ((),) * self.m

    @property
    def one(self):
        if self.kind == "Z":
            return 1
        if self.kind == "Zm":
            return self.unit
        return tuple(_trim((c,), self.q) for c in self.unit)

    def from_int(self, n: int):
        if self.kind == "Z":
            return int(n)
        if self.kind == "Zm":
            return tuple(int(n) * c for c in self.unit)
        return tuple(_trim((int(n) * c,), self.q) for c in self.unit)

    def coerce(self, x):
        if self.kind == "Z":
            return int(x)
        if isinstance(x, (int, np.integer)):
            return self.from_int(int(x))
        if self.kind == "Zm":
            return tuple(int(c) for c in x)
        return tuple(_trim(c, self.q) for c in x)

    def add(self, a, b):
        if self.kind == "Z":
            return a + b
        if self.kind == "Zm":
            return tuple(x + y for x, y in zip(a, b))
        return tuple(_padd(x, y, self.q) for x, y in zip(a, b))

    def neg(self, a):
        if self.kind == "Z":
            return -a
        if self.kind == "Zm":
            return tuple(-x for x in a)
        return tuple(_trim([-c for c in x], self.q) for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.kind == "Z":
            return a * b
        out = list(self.zero)
        for i in range(self.m):
            for j in range(self.m):
                for k in range(self.m):
                    c = self.table[i][j][k]
                    if not c:
                        continue
                    if self.kind == "Zm":
                        out[k] += c * a[i] * b[j]
                    else:
                        out[k] = _padd(out[k], _pmul(_pmul(a[i], b[j], self.q), (c,), self.q), self.q)
        return tuple(out)

    def is_zero(self, a) -> bool:
        return a == self.zero

    def phi(self, a) -> int:
        if self.kind == "Z":
            return abs(int(a))
        if self.kind == "Zm":
            return max(abs(int(c)) for c in a)
        return max((self.q ** (len(f) - 1) if f else 0) for f in a)

    # pseudo-norm constants -----------------------------------------------------
    @property
    def mul_constant(self) -> int:
        """A provable c with phi(xy) <= c phi(x) phi(y)."""
        if self.kind == "Zm":
            return max(sum(abs(self.table[i][j][k]) for i in range(self.m) for j in range(self.m))
                       for k in range(self.m))
        return 1

    def random(self, rng, R: int):
        if self.kind == "Z":
            return int(rng.integers(-R, R + 1))
        if self.kind == "Zm":
            return tuple(int(c) for c in rng.integers(-R, R + 1, size=self.m))
        deg = int(math.floor(math.log(max(R, 1), self.q) + 1e-9))
        return tuple(_trim(rng.integers(0, self.q, size=deg + 1).tolist(), self.q) for _ in range(self.m))

    def estimate_constant(self, samples: int = 1000, R: int = 20, seed=0) -> Fraction:
        rng = np.random.default_rng(seed)
        best = Fraction(0)
        for _ in range(samples):
            a, b = self.random(rng, R), self.random(rng, R)
            den = self.phi(a) * self.phi(b)
            if den:
                best = max(best, Fraction(self.phi(self.mul(a, b)), den))
        return best

    def to_json(self):
        if self.kind == "Z":
            return {"kind": "Z"}
        d = {"kind": self.kind, "m": self.m, "table": [[list(r) for r in pl] for pl in self.table],
             "one": list(self.unit)}
        if self.kind == "Fqt":
            d["q"] = self.q
        return d

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            with open(data) as fh:
                data = json.load(fh)
        kind = data.get("kind", "Z")
        if kind == "Z":
            return cls("Z")
        table = data.get("table") or [[[1]]]
        return cls(kind, int(data.get("m", len(table))), table, tuple(data.get("one", ())), int(data.get("q", 0)))


INTEGERS = PseudoNormedRing("Z")
GAUSSIAN_INTEGERS = PseudoNormedRing("Zm", 2, GAUSSIAN_TABLE, (1, 0))


def polynomial_ring(q: int, m: int = 1, table=None) -> PseudoNormedRing:
    if table is None:
        if m != 1:
            raise ValueError("a multiplication table is needed for m > 1")
        table = (((1,),),)
    return PseudoNormedRing("Fqt", m, table, (), q)


def ball_enumerate(ring: PseudoNormedRing, R: int, cap: int = 10**6) -> list:
    """Every element with phi <= R."""
    if ring.kind == "Z":
        check_cap(2 * R + 1, cap, "ball")
        return [x for x in sorted(range(-R, R + 1), key=lambda v: (abs(v), v))]
    if ring.kind == "Zm":
        check_cap((2 * R + 1) ** ring.m, cap, "ball")
        return [tuple(v) for v in itertools.product(range(-R, R + 1), repeat=ring.m)]
    q = ring.q
    if R < 1:
        return [ring.zero]
    deg = 0
    while q ** (deg + 1) <= R:
        deg += 1
    check_cap(q ** ((deg + 1) * ring.m), cap, "ball")
    polys = [_trim(c, q) for c in itertools.product(range(q), repeat=deg + 1)]
    polys.sort(key=lambda f: (len(f), tuple(reversed(f))))
    return [tuple(v) for v in itertools.product(polys, repeat=ring.m)]


def linear_growth(ring: PseudoNormedRing, C: int, radii, cap: int = 10**6) -> list:
    """|B_{CR}| / |B_R| along a ladder of radii."""
    return [Fraction(len(ball_enumerate(ring, C * R, cap)), len(ball_enumerate(ring, R, cap))) for R in radii]


# ---------------------------------------------------------------------------
# box counting


@dataclass(frozen=True)
class BoxCountResult:
    N: int | None
    N_prime: int | None
    R: int
    L: int = 1
    s: int = 0


def _system_tensors(system):
    forms = list(system) if isinstance(system, (list, tuple)) else [system]
    dims = forms[0].dims
    for f in forms:
        if f.dims != dims:
            raise ValueError("system members must share dimensions")
    return [np.asarray(f.coeffs, dtype=object).astype(np.int64) if f.ring == ZZ else
            np.asarray(f.coeffs, dtype=np.int64) for f in forms], dims


def count_box_solutions(system, R: int, variant: str = "closed", modulus: int | None = None,
                        cap: int = DEFAULT_CAP) -> int:
    """Exact number of x with every Q_i(x) = 0, x_j in [0, R) (closed) or (-R, R) (symmetric)."""
    mats, dims = _system_tensors(system)
    if variant == "closed":
        coords = np.arange(0, R, dtype=np.int64)
    elif variant == "symmetric":
        coords = np.arange(-R + 1, R, dtype=np.int64)
    else:
        raise ValueError("variant is closed or symmetric")
    s = sum(dims)
    check_cap(len(coords) ** s, cap, "box enumeration")
    boxes = [np.array(list(itertools.product(coords, repeat=n)), dtype=np.int64).reshape(-1, n) for n in dims]
    first = boxes[0]
    rest = math.prod(len(b) for b in boxes[1:])
    step = max(1, (1 << 18) // max(1, rest))
    total = 0
    for start in range(0, len(first), step):
        ok = None
        for T in mats:
            V = T
            for axis, B in enumerate(boxes):
                rows = first[start:start + step] if axis == 0 else B
                V = np.moveaxis(np.tensordot(V, rows.T, axes=([axis], [0])), -1, axis)
                if modulus:
                    V %= modulus
            z = V == 0
            ok = z if ok is None else ok & z
        total += int(np.count_nonzero(ok))
    return total


def box_counts(system, R: int, L: int = 1, modulus: int | None = None, cap: int = DEFAULT_CAP) -> BoxCountResult:
    _, dims = _system_tensors(system)
    return BoxCountResult(count_box_solutions(system, L * R, "closed", modulus, cap),
                          count_box_solutions(system, R, "symmetric", modulus, cap), R, L, sum(dims))


def scaling_lemma_audit(system, R: int, L: int, modulus: int | None = None, cap: int = DEFAULT_CAP,
                        instance_id: str = "") -> AuditReport:
    """N_{LR} <= L^s N'_R, both sides exact."""
    res = box_counts(system, R, L, modulus, cap)
    rhs = L ** res.s * res.N_prime
    verdict = "holds" if res.N <= rhs else "violated"
    return AuditReport("scaling", instance_id, res.N, rhs, verdict, {},
                       {"R": R, "L": L, "s": res.s, "N_prime": res.N_prime, "target": modulus or "Z"})


# ---------------------------------------------------------------------------
# small kernel vectors


def _det(ring, M):
    n = len(M)
    if n == 0:
        return ring.one
    if n == 1:
        return M[0][0]
    total = ring.zero
    for j in range(n):
        if ring.is_zero(M[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = ring.mul(M[0][j], _det(ring, minor))
        total = ring.add(total, term) if j % 2 == 0 else ring.sub(total, term)
    return total


def determinant(M, ring: PseudoNormedRing = INTEGERS):
    M = [[ring.coerce(x) for x in row] for row in M]
    return _det(ring, M)


def adjugate(M, ring: PseudoNormedRing = INTEGERS):
    n = len(M)
    M = [[ring.coerce(x) for x in row] for row in M]
    adj = [[ring.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            c = _det(ring, minor)
            adj[j][i] = c if (i + j) % 2 == 0 else ring.neg(c)
    return adj


def _independent(ring, rows) -> bool:
    """Rows independent over the fraction field: some maximal minor is nonzero."""
    k = len(rows)
    if k == 0:
        return True
    n = len(rows[0])
    for cols in itertools.combinations(range(n), k):
        if not ring.is_zero(_det(ring, [[r[c] for c in cols] for r in rows])):
            return True
    return False


def small_kernel_vector(M, ring: PseudoNormedRing = INTEGERS):
    """Nonzero a with M a = 0 built from the adjugate of a completed square matrix.

    Keep a maximal independent set of rows of M, append standard basis rows
    until the matrix M' is invertible, and return the column of adj(M') for
    the first appended row, so M' a = det(M') e_(j+1).
    """
    M = [[ring.coerce(x) for x in row] for row in M]
    if not M:
        raise ValueError("empty matrix")
    n = len(M[0])
    kept = []
    for row in M:
        if _independent(ring, kept + [row]):
            kept.append(row)
    if len(kept) >= n:
        raise ValueError("matrix has full column rank; no kernel")
    first_appended = len(kept)
    rows = list(kept)
    for i in range(n):
        if len(rows) == n:
            break
        e = [ring.one if j == i else ring.zero for j in range(n)]
        if _independent(ring, rows + [e]):
            rows.append(e)
    adj = adjugate(rows, ring)
    a = [adj[i][first_appended] for i in range(n)]
    if all(ring.is_zero(x) for x in a):
        raise ArithmeticError("adjugate column vanished")
    return a


def kernel_bound(n: int, T: int, ring: PseudoNormedRing = INTEGERS):
    """Bound on phi(a_i) for :func:`small_kernel_vector`."""
    T = max(T, 1)
    if ring.kind == "Z":
        return n ** (n / 2) * T ** (n - 1)
    c = ring.mul_constant
    return math.factorial(n - 1) * c ** max(n - 2, 0) * T ** (n - 1)


def apply_matrix(M, a, ring: PseudoNormedRing = INTEGERS):
    out = []
    for row in M:
        acc = ring.zero
        for x, y in zip(row, a):
            acc = ring.add(acc, ring.mul(ring.coerce(x), y))
        out.append(acc)
    return out


def cramer_audit(M, ring: PseudoNormedRing = INTEGERS, instance_id: str = "") -> AuditReport:
    a = small_kernel_vector(M, ring)
    n = len(a)
    T = max(ring.phi(ring.coerce(x)) for row in M for x in row)
    bound = kernel_bound(n, T, ring)
    ok = all(ring.is_zero(v) for v in apply_matrix(M, a, ring)) and max(ring.phi(x) for x in a) <= bound
    return AuditReport("cramer", instance_id, max(ring.phi(x) for x in a), bound,
                       "holds" if ok else "violated", {}, {"a": [list(x) if isinstance(x, tuple) else x for x in a], "T": T})


# ---------------------------------------------------------------------------
# mod-p descent


def _max_abs(P):
    return max(abs(int(c)) for c in P.coeffs.reshape(-1))


def certified_q_upper(P: MultilinearForm, certificate: PartitionRankCertificate | None = None):
    """Smallest of the available certificates for P over Q, with its source."""
    options = []
    if certificate is not None:
        if not verify_certificate(P, certificate):
            raise ValueError("supplied certificate does not reproduce P")
        options.append((certificate.rank, "supplied"))
    if P.d == 2:
        options.append((prk_upper(P).rank, "d2-elimination"))
    else:
        options.append((trivial_certificate(P).rank, "trivial-min-dim"))
        options.append((monomial_certificate(P).rank, "monomial"))
    return min(options)


def mod_p_descent_report(P: MultilinearForm, primes, budget: int = 10**6, cap: int = DEFAULT_CAP,
                         certificate: PartitionRankCertificate | None = None, instance_id: str = ""):
    """Per-prime rank bounds, the 2^{d-1} d ceiling, and the replayed counting chain.

    Returns (summary AuditReport, list of per-prime row dicts).
    """
    primes = [int(p) for p in primes]
    if not primes:
        raise ValueError("empty prime list")
    if P.ring != ZZ:
        P = MultilinearForm(ZZ, ZZ.array(P.coeffs))
    if P.d < 2:
        raise ValueError("descent needs d >= 2")
    d = P.d
    s = sum(P.dims[:-1])
    coeff = _max_abs(P)
    rows = []
    for p in primes:
        F = PrimeField(p)
        Pp = reduce_mod_p(P, p)
        bias = bias_exact(Pp, cap=cap)
        lower = prk_lower_from_bias(Pp, cap=cap)
        cert = prk_upper_search(Pp, budget)
        upper = cert.rank
        if cert.exact:
            lower = max(lower, upper)
        row = {"instance_id": instance_id, "p": p, "bias": bias.exact, "lower": lower, "upper": upper,
               "exact": cert.exact, "ceiling": 2 ** (d - 1) * d * upper,
               "below_threshold": p <= d * coeff}
        # counting chain: Z_P count >= p^{s - r}, then the scaling step with eta = 1/d
        zcount = zero_slice_count(Pp, cap)
        row["zp_count"] = zcount
        row["kz_holds"] = zcount * p ** upper >= p ** s
        Rp = math.ceil(round(p ** (1 / d), 12))
        L = math.ceil(p / Rp)
        slices = [MultilinearForm(ZZ, ZZ.array(np.take(P.coeffs, i, axis=d - 1))) for i in range(P.dims[-1])]
        try:
            n_sym_p = count_box_solutions(slices, Rp, "symmetric", p, cap)
            n_sym_z = count_box_solutions(slices, Rp, "symmetric", None, cap)
            row.update(R=Rp, L=L, N_p=zcount, Nprime_R_mod_p=n_sym_p, Nprime_R_Z=n_sym_z,
                       scaling_holds=zcount <= L ** s * n_sym_p)
        except ValueError:
            row.update(R=Rp, L=L, N_p=zcount, Nprime_R_mod_p=None, Nprime_R_Z=None, scaling_holds=None)
        rows.append(row)
    for row in rows:
        others = [r["lower"] for r in rows if r is not row]
        row["caveat"] = bool(others) and row["upper"] < max(others)
    good = [r for r in rows if not r["caveat"]]
    ceiling = min((r["ceiling"] for r in good), default=None)
    q_upper, q_source = certified_q_upper(P, certificate)
    if ceiling is None:
        verdict = "inconclusive"
    else:
        verdict = "consistent" if q_upper <= ceiling else "inconclusive"
    consistency = all(r["lower"] <= q_upper for r in rows if not r["caveat"])
    if not consistency:
        verdict = "violated"
    report = AuditReport("descent", instance_id, q_upper, ceiling, verdict, {"factor": 2 ** (d - 1) * d},
                         {"q_upper_source": q_source, "flagged_primes": [r["p"] for r in rows if r["caveat"]],
                          "primes": primes})
    return report, rows
