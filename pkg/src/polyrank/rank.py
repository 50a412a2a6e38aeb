"""Partition rank and Schmidt rank.

Certificates are explicit sums of products R(x_I) S(x_J) over complementary
slot sets I, J (0-based slot indices).  Upper bounds always come with a
certificate that :func:`verify_certificate` re-checks coefficientwise.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fields import QQ, ZZ, FiniteField, PrimeField, Ring, check_cap, extend, is_prime
from .forms import (FormCollection, HomogeneousForm, MultilinearForm, diagonal_restriction,
                    lift_to_ring, polarize, reduce_mod_p)
from .linalg import batch_rank, column_space, nullspace, rank as matrix_rank, rref, solve, subspaces
from .report import AuditReport

DEFAULT_BUDGET = 10**6


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Term:
    I: tuple
    R: MultilinearForm
    S: MultilinearForm

    def J(self, d: int) -> tuple:
        return tuple(i for i in range(d) if i not in self.I)


@dataclass
class PartitionRankCertificate:
    terms: list = field(default_factory=list)
    status: str = "certificate"  # "exact" or "upper-only" when produced by search
    nodes: int = 0

    @property
    def rank(self) -> int:
        return len(self.terms)

    def __len__(self):
        return len(self.terms)

    @property
    def exact(self) -> bool:
        return self.status == "exact"

    def __add__(self, other: "PartitionRankCertificate") -> "PartitionRankCertificate":
        return PartitionRankCertificate(list(self.terms) + list(other.terms))

    def to_json(self) -> dict:
        return {"kind": "prk-certificate", "status": self.status, "rank": self.rank,
                "terms": [{"I": list(t.I), "R": t.R.to_json(), "S": t.S.to_json()} for t in self.terms]}

    @classmethod
    def from_json(cls, data: dict) -> "PartitionRankCertificate":
        terms = [Term(tuple(t["I"]), MultilinearForm.from_json(t["R"]), MultilinearForm.from_json(t["S"]))
                 for t in data["terms"]]
        return cls(terms, data.get("status", "certificate"))


def _check_partition(I, d):
    I = tuple(I)
    if not I or len(I) >= d or len(set(I)) != len(I) or any(not 0 <= i < d for i in I):
        raise ValueError(f"{list(I)} is not a nonempty proper subset of the {d} slots")
    return I


def term_tensor(term: Term, d: int, ring: Ring) -> np.ndarray:
    """Coefficient tensor of R(x_I) S(x_J) in slot order."""
    I = _check_partition(term.I, d)
    J = term.J(d)
    R = term.R.coeffs.reshape(term.R.dims + (1,) * len(J))
    S = term.S.coeffs.reshape((1,) * len(I) + term.S.dims)
    outer = ring.mul(R, S)
    return np.transpose(outer, tuple(np.argsort(I + J)))


def expand(cert: PartitionRankCertificate, ring: Ring, dims) -> np.ndarray:
    total = ring.zeros(tuple(dims))
    for t in cert.terms:
        total = ring.add(total, term_tensor(t, len(dims), ring))
    return total


def verify_certificate(P: MultilinearForm, cert: PartitionRankCertificate) -> bool:
    """True iff the terms sum to P exactly."""
    d = P.d
    for t in cert.terms:
        I = _check_partition(t.I, d)
        J = t.J(d)
        if t.R.dims != tuple(P.dims[i] for i in I) or t.S.dims != tuple(P.dims[j] for j in J):
            raise ValueError("term shapes do not match the form")
        if t.R.ring != P.ring or t.S.ring != P.ring:
            raise ValueError("term ring does not match the form")
    total = expand(cert, P.ring, P.dims)
    return bool(np.all(total == P.coeffs))


def _basis_vector(ring, n, k):
    v = ring.zeros(n)
    v[k] = ring.one
    return v


def trivial_certificate(P: MultilinearForm) -> PartitionRankCertificate:
    """One term per coordinate of the smallest slot: prk <= min dims."""
    ring, d = P.ring, P.d
    if d < 2:
        raise ValueError("partition rank needs d >= 2")
    i = int(np.argmin(P.dims))
    terms = []
    for k in range(P.dims[i]):
        S = np.take(P.coeffs, k, axis=i)
        if ring.zero_mask(S).all():
            continue
        terms.append(Term((i,), MultilinearForm(ring, _basis_vector(ring, P.dims[i], k)),
                          MultilinearForm(ring, S)))
    return PartitionRankCertificate(terms, "upper-only")


def monomial_certificate(P: MultilinearForm) -> PartitionRankCertificate:
    """One term per nonzero coefficient."""
    ring, d = P.ring, P.d
    if d < 2:
        raise ValueError("partition rank needs d >= 2")
    terms = []
    for idx in np.argwhere(~ring.zero_mask(P.coeffs)):
        idx = tuple(int(k) for k in idx)
        R = ring.mul(_basis_vector(ring, P.dims[0], idx[0]), P.coeffs[idx])
        S = ring.zeros(P.dims[1:])
        S[idx[1:]] = ring.one
        terms.append(Term((0,), MultilinearForm(ring, R), MultilinearForm(ring, S)))
    return PartitionRankCertificate(terms, "upper-only")


def prk_exact_d2(P: MultilinearForm) -> PartitionRankCertificate:
    """Bilinear partition rank is matrix rank; M = M[:, pivots] @ RREF."""
    if P.d != 2:
        raise ValueError("prk_exact_d2 needs a bilinear form")
    ring = P.ring
    if not ring.is_field:
        raise ValueError(f"{ring!r} is not a field")
    R, piv = rref(ring, P.coeffs)
    terms = [Term((0,), MultilinearForm(ring, P.coeffs[:, c].copy()), MultilinearForm(ring, R[i].copy()))
             for i, c in enumerate(piv)]
    return PartitionRankCertificate(terms, "exact")


# ---------------------------------------------------------------------------
# search over finite fields


class _Budget(Exception):
    pass


def bipartition_sides(d: int) -> list[tuple]:
    """One side per unordered bipartition {I, J}: the side containing slot 0."""
    out = []
    rest = list(range(1, d))
    for size in range(0, d - 1):
        for extra in itertools.combinations(rest, size):
            out.append((0,) + extra)
    return out


def _class_generators(ring, dims, side, L) -> np.ndarray:
    """Columns spanning {l (x) S : l in rows of L} flattened in slot order."""
    d = len(dims)
    J = tuple(j for j in range(d) if j not in side)
    dI = tuple(dims[i] for i in side)
    dJ = tuple(dims[j] for j in J)
    nJ = math.prod(dJ)
    E = np.eye(nJ, dtype=np.int64).reshape(dJ + (nJ,))
    E = ring.array(E)
    blocks = []
    for l in L:
        lt = ring.array(l).reshape(dI + (1,) * (len(J) + 1))
        outer = ring.mul(lt, E.reshape((1,) * len(side) + E.shape))
        axes = tuple(np.argsort(side + J)) + (d,)
        blocks.append(np.transpose(outer, axes).reshape(-1, nJ))
    if not blocks:
        return ring.zeros((math.prod(dims), 0))
    return np.concatenate(blocks, axis=1)


def certificate_from_classes(P: MultilinearForm, classes) -> PartitionRankCertificate | None:
    """Solve P = sum over (side, L) of sum_l l (x) S_l; None if P is outside the span."""
    ring, dims = P.ring, P.dims
    gens = [(_class_generators(ring, dims, side, L), side, L) for side, L in classes if len(L)]
    if not gens:
        return PartitionRankCertificate([]) if P.is_zero() else None
    G = np.concatenate([g for g, _, _ in gens], axis=1)
    z = solve(ring, G, P.coeffs.reshape(-1))
    if z is None:
        return None
    terms = []
    off = 0
    for g, side, L in gens:
        J = tuple(j for j in range(P.d) if j not in side)
        dI = tuple(dims[i] for i in side)
        dJ = tuple(dims[j] for j in J)
        nJ = math.prod(dJ)
        for l in L:
            S = z[off: off + nJ]
            off += nJ
            if ring.zero_mask(S).all():
                continue
            terms.append(Term(tuple(side), MultilinearForm(ring, ring.array(l).reshape(dI)),
                              MultilinearForm(ring, S.reshape(dJ))))
    return PartitionRankCertificate(terms)


def _restrict(ring, T, B, axis):
    """Restrict slot ``axis`` of T to the row span of B (new coordinates = rows of B)."""
    return ring.matmul_axis(T, np.ascontiguousarray(B.T), axis)


def _restrict_batch(field: FiniteField, T, stack, axis):
    """Batched restriction: result[n] = T restricted along ``axis`` to stack[n]."""
    N, u, s = stack.shape
    flat = stack.reshape(N * u, s).T  # (s, N*u)
    R = field.matmul_axis(T, flat, axis)
    R = np.moveaxis(R, axis, 0).reshape((N, u) + tuple(np.delete(np.array(T.shape), axis)))
    return np.moveaxis(R, 1, axis + 1)


def _search_d2(P, budget):
    field, dims = P.ring, P.dims
    a = int(np.argmin(dims))
    M = P.coeffs if a == 0 else P.coeffs.T
    nodes = 0
    upper = dims[a]
    for r in range(upper):
        stack = subspaces(field, dims[a], dims[a] - r)
        nodes += len(stack)
        if nodes > budget:
            return None, nodes
        prod = field.matmul(stack.reshape(-1, dims[a]), M).reshape(len(stack), -1)
        hits = np.nonzero(~prod.any(axis=1))[0]
        if len(hits):
            B = stack[hits[0]]
            L = nullspace(field, B) if len(B) else np.eye(dims[a], dtype=np.int64)
            cert = certificate_from_classes(P, [((a,), L)])
            return cert, nodes
    return trivial_certificate(P), nodes


def _search_d3(P, budget):
    field, dims = P.ring, P.dims
    f = int(np.argmax(dims))
    a, b = [i for i in range(3) if i != f]
    best_rank = min(dims)
    best = None
    nodes = 0
    pairs = [(ua, ub) for ua in range(dims[a], -1, -1) for ub in range(dims[b], -1, -1)]
    pairs.sort(key=lambda t: ((dims[a] - t[0]) + (dims[b] - t[1]), -t[0]))
    complete = True
    for ua, ub in pairs:
        partial = (dims[a] - ua) + (dims[b] - ub)
        if partial >= best_rank:
            break
        if ua == 0 or ub == 0:
            # costs at least min(dims), which the trivial certificate already meets
            continue
        Sa = subspaces(field, dims[a], ua)
        Sb = subspaces(field, dims[b], ub)
        found = False
        for Ba in Sa:
            if nodes + len(Sb) > budget:
                complete = False
                break
            nodes += len(Sb)
            Ta = _restrict(field, P.coeffs, Ba, a)
            Tab = _restrict_batch(field, Ta, Sb, b)  # (N, ...) with slot b of size ub
            F = np.moveaxis(Tab, f + 1, 1).reshape(len(Sb), dims[f], ua * ub)
            ranks = batch_rank(field, F)
            k = int(np.argmin(ranks))
            if partial + ranks[k] < best_rank:
                best_rank = partial + int(ranks[k])
                best = (Ba, Sb[k], F[k])
                if best_rank == partial:
                    found = True
                    break
        if not complete:
            break
        if found:
            continue
    status = "exact" if complete else "upper-only"
    if best is None:
        cert = trivial_certificate(P)
        cert.status, cert.nodes = status, nodes
        return cert
    Ba, Bb, F = best
    La = nullspace(field, Ba) if len(Ba) else np.eye(dims[a], dtype=np.int64)
    Lb = nullspace(field, Bb) if len(Bb) else np.eye(dims[b], dtype=np.int64)
    classes = [((a,), La), ((b,), Lb), ((f,), column_space(field, F))]
    cert = certificate_from_classes(P, classes)
    if cert is None or cert.rank > best_rank:
        raise ArithmeticError("restriction witness did not produce a certificate")
    cert.status, cert.nodes = status, nodes
    return cert


def _compositions(total, bounds):
    if not bounds:
        if total == 0:
            yield ()
        return
    for first in range(min(total, bounds[0]), -1, -1):
        for rest in _compositions(total - first, bounds[1:]):
            yield (first,) + rest


def _search_generic(P, budget):
    field, dims, d = P.ring, P.dims, P.d
    sides = bipartition_sides(d)
    classes = []
    for side in sides:
        J = tuple(j for j in range(d) if j not in side)
        nI = math.prod(dims[i] for i in side)
        nJ = math.prod(dims[j] for j in J)
        # the smaller side carries the subspace
        classes.append(side if nI <= nJ else J)
    sizes = [math.prod(dims[i] for i in c) for c in classes]
    upper = trivial_certificate(P)
    target = P.coeffs.reshape(-1)
    nodes = 0
    for r in range(0, upper.rank):
        for alloc in _compositions(r, sizes):
            spaces = [subspaces(field, sizes[c], alloc[c]) for c in range(len(classes))]
            for choice in itertools.product(*spaces):
                nodes += 1
                if nodes > budget:
                    upper.status, upper.nodes = "upper-only", nodes
                    return upper
                cls = [(classes[c], choice[c]) for c in range(len(classes)) if alloc[c]]
                G = [_class_generators(field, dims, s, L) for s, L in cls]
                if G:
                    G = np.concatenate(G, axis=1)
                    if matrix_rank(field, G) != matrix_rank(field, np.concatenate([G, target[:, None]], axis=1)):
                        continue
                elif not P.is_zero():
                    continue
                cert = certificate_from_classes(P, cls)
                cert.status, cert.nodes = "exact", nodes
                return cert
    upper.status, upper.nodes = "exact", nodes
    return upper


def prk_upper_search(P: MultilinearForm, budget: int = DEFAULT_BUDGET, method: str = "auto") -> PartitionRankCertificate:
    """Certified upper bound on prk over a finite field; "exact" when the search finished."""
    if not isinstance(P.ring, FiniteField):
        raise ValueError("prk search runs over finite fields only")
    if P.is_zero():
        return PartitionRankCertificate([], "exact")
    if P.d == 1:
        raise ValueError("a nonzero linear form has no partition-rank decomposition")
    if P.d == 2 and method == "auto":
        cert, nodes = _search_d2(P, budget)
        if cert is None:
            cert = trivial_certificate(P)
            cert.status = "upper-only"
        else:
            cert.status = "exact"
        cert.nodes = nodes
    elif P.d == 3 and method == "auto":
        cert = _search_d3(P, budget)
    else:
        cert = _search_generic(P, budget)
    if not verify_certificate(P, cert):
        raise ArithmeticError("search produced an invalid certificate")
    return cert


def prk_upper(P: MultilinearForm, budget: int = DEFAULT_BUDGET) -> PartitionRankCertificate:
    """Best certificate available for any ring."""
    if P.is_zero():
        return PartitionRankCertificate([], "exact")
    if isinstance(P.ring, FiniteField):
        return prk_upper_search(P, budget)
    if P.d == 2 and P.ring.is_field:
        return prk_exact_d2(P)
    if P.d == 2 and P.ring == ZZ:
        # rank over Q; the certificate stays over Q
        return prk_exact_d2(lift_to_ring(P, QQ))
    a, b = trivial_certificate(P), monomial_certificate(P)
    return a if a.rank <= b.rank else b


# ---------------------------------------------------------------------------
# collective rank


def projective_points(field: FiniteField, n: int):
    """One representative per point of P^{n-1}: first nonzero coordinate equals 1."""
    for a in itertools.product(range(field.order), repeat=n):
        nz = [c for c in a if c]
        if nz and nz[0] == 1:
            yield a


def collective_prk(collection: FormCollection, rank_fn=None, cap: int = 4096):
    """(min over nonzero combinations of rank_fn, minimizing combination)."""
    field = collection.ring
    if not isinstance(field, FiniteField):
        raise ValueError("collective rank is enumerated over finite fields only")
    check_cap(field.order ** collection.n, cap, "combination enumeration")
    if rank_fn is None:
        rank_fn = lambda P: prk_upper_search(P).rank  # noqa: E731
    if collection.n == 1:
        return rank_fn(collection[0]), (1,)
    best, witness = None, None
    for a in projective_points(field, collection.n):
        r = rank_fn(collection.combination(a))
        if best is None or r < best:
            best, witness = r, a
            if best == 0:
                break
    return best, witness


# ---------------------------------------------------------------------------
# Schmidt rank bridges


@dataclass
class SchmidtDecomposition:
    terms: list = field(default_factory=list)  # pairs (R, S) of HomogeneousForm

    @property
    def length(self) -> int:
        return len(self.terms)

    def __len__(self):
        return len(self.terms)

    def expand(self, ring, d, s) -> HomogeneousForm:
        total = HomogeneousForm(ring, d, s, {})
        for R, S in self.terms:
            total = total + R * S
        return total

    def verify(self, Q: HomogeneousForm) -> bool:
        for R, S in self.terms:
            if R.d < 1 or S.d < 1 or R.d + S.d != Q.d:
                return False
        return self.expand(Q.ring, Q.d, Q.s) == Q

    def to_json(self) -> dict:
        return {"kind": "schmidt", "terms": [{"R": R.to_json(), "S": S.to_json()} for R, S in self.terms]}


def _check_char(ring, d):
    char = ring.characteristic
    if char != 0 and char <= d:
        raise ValueError(f"characteristic {char} is too small for degree {d}")


def prk_upper_from_schmidt(Q: HomogeneousForm, decomposition) -> PartitionRankCertificate:
    """Certificate for polarize(Q) from Q = sum R_i S_i.

    Each product contributes sum over |J| = deg R of R~(x_J) S~(x_{J^c}).
    """
    _check_char(Q.ring, Q.d)
    terms_in = decomposition.terms if isinstance(decomposition, SchmidtDecomposition) else list(decomposition)
    d = Q.d
    terms = []
    for R, S in terms_in:
        if R.d < 1 or S.d < 1 or R.d + S.d != d:
            raise ValueError("decomposition factors need positive degrees summing to d")
        Rt, St = polarize(R), polarize(S)
        for J in itertools.combinations(range(d), R.d):
            terms.append(Term(J, Rt, St))
    cert = PartitionRankCertificate(terms)
    Pt = polarize(Q)
    if not verify_certificate(Pt, cert):
        raise ValueError("the decomposition does not reproduce Q")
    if Pt.d >= 2 and not Pt.is_zero():
        triv = trivial_certificate(Pt)
        if triv.rank < cert.rank:
            triv.status = "certificate"
            return triv
    return cert


def schmidt_from_prk_certificate(Q: HomogeneousForm, cert: PartitionRankCertificate) -> SchmidtDecomposition:
    """Plug the diagonal into a certificate for polarize(Q) and divide by d!."""
    _check_char(Q.ring, Q.d)
    ring = Q.ring
    work = QQ if ring == ZZ else ring
    Qw = Q.change_ring(work) if work != ring else Q
    inv = work.inv(work.from_int(math.factorial(Q.d)))
    out = []
    for t in cert.terms:
        R = t.R if t.R.ring == work else lift_to_ring(t.R, work)
        S = t.S if t.S.ring == work else lift_to_ring(t.S, work)
        Rd, Sd = diagonal_restriction(R), diagonal_restriction(S)
        if Rd.is_zero() or Sd.is_zero():
            continue
        out.append((Rd.scale(inv), Sd))
    dec = SchmidtDecomposition(out)
    if not dec.verify(Qw):
        raise ValueError("certificate does not match polarize(Q)")
    return dec


def schmidt_upper_from_prk(Q: HomogeneousForm, budget: int = DEFAULT_BUDGET):
    """(length, decomposition) of a Schmidt decomposition read off a prk certificate of Q~."""
    if Q.is_zero():
        return 0, SchmidtDecomposition([])
    if Q.d < 2:
        raise ValueError("a nonzero linear form has no Schmidt decomposition")
    Pt = polarize(Q)
    cert = prk_upper(Pt, budget)
    dec = schmidt_from_prk_certificate(Q, cert)
    return dec.length, dec


# ---------------------------------------------------------------------------
# bounds and constants


@dataclass
class RankBounds:
    lower: int
    lower_source: str
    upper: int
    upper_source: str
    certificate: PartitionRankCertificate | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ArithmeticError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def gap(self) -> int:
        return self.upper - self.lower


def rank_bounds(P: MultilinearForm, budget: int = DEFAULT_BUDGET, bias_cap: int = 10**7) -> RankBounds:
    if P.is_zero():
        return RankBounds(0, "exact", 0, "certificate", PartitionRankCertificate([], "exact"))
    ring = P.ring
    if isinstance(ring, FiniteField):
        cert = prk_upper_search(P, budget)
        if cert.exact:
            return RankBounds(cert.rank, "exact", cert.rank, "certificate", cert)
        from .bias import prk_lower_from_bias  # bias builds on this module
        lower = max(1, prk_lower_from_bias(P, cap=bias_cap))
        return RankBounds(lower, "bias", cert.rank, "certificate", cert)
    if P.d == 2:
        cert = prk_upper(P)
        return RankBounds(cert.rank, "exact", cert.rank, "d2-elimination", cert)
    cert = prk_upper(P)
    src = "trivial-min-dim" if cert.rank == min(P.dims) else "certificate"
    return RankBounds(1, "exact" if cert.rank == 1 else "slice-count", cert.rank, src, cert)


class Symbolic(str):
    """A constant known only by its asymptotic shape; never evaluated."""


FIELD_CLASSES = ("Q", "finite", "finite-large", "number-field", "function-field")


@dataclass
class ConstantsTable:
    overrides: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, data) -> "ConstantsTable":
        if isinstance(data, str):
            with open(data) as fh:
                data = json.load(fh)
        return cls(dict(data))

    def _over(self, cls_, name, value):
        return self.overrides.get(cls_, {}).get(name, value)

    def main_multiple(self, field_class: str, d: int):
        """(A, B) in rk_k <= A [n rk_kbar + 1]^B."""
        b = math.comb(d, d // 2)
        if field_class == "Q":
            A, B = 4 ** (d - 1) * d * b ** d, d
        elif field_class == "finite-large":
            A, B = 2 ** (d - 1) * b ** d, d
        elif field_class in ("number-field", "function-field"):
            A, B = 2 ** (d - 1) * (d - 1) * b ** (2 * d), 2 * d
        elif field_class == "finite":
            A, B = Symbolic("2^(2^O(d^2))"), Symbolic("2^(2^O(d^2))")
        else:
            raise ValueError(f"unknown field class {field_class!r}")
        return self._over(field_class, "A", A), self._over(field_class, "B", B)

    def main_ml(self, field_class: str, d: int):
        """(A~, B~) for the multilinear statement."""
        if field_class == "Q":
            A, B = 4 ** (d - 1) * d, d
        elif field_class == "finite-large":
            A, B = 2 ** (d - 1), d
        elif field_class in ("number-field", "function-field"):
            A, B = 2 ** (d - 1) * (d - 1), 2 * d
        elif field_class == "finite":
            A, B = Symbolic("2^(2^O(d^2))"), Symbolic("2^(2^O(d^2))")
        else:
            raise ValueError(f"unknown field class {field_class!r}")
        return self._over(field_class, "A~", A), self._over(field_class, "B~", B)

    def universality(self, field_class: str, d: int):
        """(C, D) in the universality threshold C (n t^d)^D."""
        if field_class == "finite-large":
            C, D = 2 ** (d - 1), 1
        elif field_class in ("number-field", "function-field", "Q"):
            C, D = 2 ** (d - 1) * (d - 1), 2
        elif field_class == "finite":
            C, D = Symbolic("2^(2^O(d^2))"), Symbolic("2^(2^O(d^2))")
        else:
            raise ValueError(f"unknown field class {field_class!r}")
        return self._over(field_class, "C", C), self._over(field_class, "D", D)

    def bias_rank(self, regime: int, d: int):
        """(alpha, beta) of the bias-rank statement prk > alpha r^beta, or the regime-2 multiplier."""
        if regime == 1:
            return (self._over("bias-rank", "alpha", Symbolic("2^(2^O(d^2))")),
                    self._over("bias-rank", "beta", Symbolic("2^(2^O(d^2))")))
        if regime == 2:
            return self._over("bias-rank", "alpha2", 2 ** (d - 1)), self._over("bias-rank", "beta2", 1)
        raise ValueError("regime is 1 or 2")

    def as_dict(self, d: int) -> dict:
        out = {}
        for fc in FIELD_CLASSES:
            A, B = self.main_multiple(fc, d)
            At, Bt = self.main_ml(fc, d)
            out[fc] = {"A": A, "B": B, "A~": At, "B~": Bt}
            if fc != "Q":
                out[fc].update(zip(("C", "D"), self.universality(fc, d)))
        return out


def main_theorem_rhs(A, B, n: int, rk: int, d: int = None, imperfect: bool = False):
    if isinstance(A, Symbolic) or isinstance(B, Symbolic):
        return Symbolic(f"{A}*[n*rk+1]^{B}")
    if imperfect:
        return A * (n ** (1 + 1 / d) * (rk + 1)) ** B
    return A * (n * rk + 1) ** B


def _members(collection):
    if isinstance(collection, FormCollection):
        return collection
    return FormCollection(collection if isinstance(collection, (list, tuple)) else [collection])


def _combo_rank(member, budget):
    if isinstance(member, HomogeneousForm):
        return schmidt_upper_from_prk(member, budget)[0]
    return prk_upper(member, budget).rank


def _small_combos(n):
    for a in itertools.product((0, 1, -1), repeat=n):
        nz = [c for c in a if c]
        if nz and nz[0] == 1:
            yield a


def main_theorem_audit(collection, constants: ConstantsTable | None = None, field_class: str | None = None,
                       budget: int = DEFAULT_BUDGET, proxy_cap: int = 16, instance_id: str = "") -> AuditReport:
    """Falsification harness for rk_k <= A [n rk_kbar + 1]^B.

    The left side is a certified upper bound.  Since rk_kbar >= 0, lhs <= A
    already settles consistency; otherwise an extension-field proxy stands in
    for rk_kbar and the verdict says so.
    """
    coll = _members(collection)
    constants = constants or ConstantsTable()
    ring = coll.ring
    d, n = coll.d, coll.n
    homogeneous = not coll.is_multilinear
    if field_class is None:
        field_class = "finite-large" if isinstance(ring, FiniteField) else "Q"
    A, B = constants.main_multiple(field_class, d) if homogeneous else constants.main_ml(field_class, d)
    rank_fn = lambda m: _combo_rank(m, budget)  # noqa: E731
    if isinstance(ring, FiniteField):
        lhs, witness = collective_prk(coll, rank_fn)
        base = PrimeField(ring.p)
    else:
        lhs, witness = None, None
        for a in _small_combos(n):
            r = rank_fn(coll.combination(a))
            if lhs is None or r < lhs:
                lhs, witness = r, a
        p = next(q for q in range(d + 1, 10**4) if is_prime(q))
        base = PrimeField(p)
    wit = {"combination": list(witness), "field_class": field_class, "homogeneous": homogeneous}
    if isinstance(A, Symbolic) or isinstance(B, Symbolic):
        return AuditReport("main", instance_id, lhs, f"{A}*[n*rk+1]^{B}", "inconclusive",
                           {"A": str(A), "B": str(B)}, wit)
    floor = main_theorem_rhs(A, B, n, 0)
    if lhs <= floor:
        return AuditReport("main", instance_id, lhs, floor, "consistent", {"A": A, "B": B},
                           dict(wit, note="rhs evaluated at rk_kbar = 0"))
    # extension-field proxy for rk_kbar
    k = 1
    while base.p ** (k + 1) <= proxy_cap and k + 1 <= 4:
        k += 1
    proxy_field = extend(base, k) if k > 1 else base
    if isinstance(ring, FiniteField) and ring.p == base.p:
        proxied = _members([_to_field(m, proxy_field) for m in coll])
    else:
        proxied = _members([_to_field(reduce_mod_p(_int_form(m), base.p), proxy_field) for m in coll])
    try:
        proxy, _ = collective_prk(proxied, rank_fn)
    except Exception as exc:  # cap or budget problems leave the audit open
        return AuditReport("main", instance_id, lhs, "n/a", "inconclusive", {"A": A, "B": B},
                           dict(wit, proxy_error=str(exc)))
    rhs = main_theorem_rhs(A, B, n, proxy)
    verdict = "consistent-proxy" if lhs <= rhs else "inconclusive"
    return AuditReport("main", instance_id, lhs, rhs, verdict, {"A": A, "B": B},
                       dict(wit, proxy_field=repr(proxy_field), proxy_rank=proxy))


def _int_form(m):
    if m.ring == ZZ:
        return m
    if m.ring == QQ:
        if isinstance(m, HomogeneousForm):
            den = math.lcm(*[Fraction(c).denominator for c in m.monomials.values()] or [1])
            return HomogeneousForm(ZZ, m.d, m.s, {e: int(c * den) for e, c in m.monomials.items()})
        den = math.lcm(*[Fraction(c).denominator for c in m.coeffs.reshape(-1)])
        return MultilinearForm(ZZ, ZZ.array(np.vectorize(lambda c: int(c * den), otypes=[object])(m.coeffs)))
    raise ValueError(f"cannot clear denominators over {m.ring!r}")


def _to_field(m, F):
    if isinstance(m, HomogeneousForm):
        return m.change_ring(F)
    return MultilinearForm(F, F.array(m.coeffs))
