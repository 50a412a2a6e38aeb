"""Point counts on singular loci and gradient loci over finite fields.

Counts are exact enumerations.  Codimensions derived from them are estimates:
a variety of codimension t has roughly q^{s-t} rational points, and the
estimate reports the smallest t with #points >= D q^{s-t}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fields import FiniteField, PrimeField, check_cap, extend
from .forms import FormCollection, HomogeneousForm, MultilinearForm
from .linalg import batch_rank
from .rank import collective_prk, prk_upper, schmidt_upper_from_prk
from .report import AuditReport

DEFAULT_CAP = 10**7
_CHUNK = 1 << 16


@dataclass
class LocusCount:
    total_points: int
    ambient_dim: int
    q: int
    codim_estimate: int = 0
    confidence: str = "normal"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.total_points <= self.q ** self.ambient_dim:
            raise ValueError("point count outside [0, q^s]")


def codim_from_counts(count, D=1, ambient_dim: int | None = None, q: int | None = None) -> int:
    """Smallest t >= 0 with count >= D q^{s-t}; s+1 when the locus is empty."""
    if isinstance(count, LocusCount):
        points, s, q = count.total_points, count.ambient_dim, count.q
    else:
        points, s = int(count), int(ambient_dim)
    if points == 0:
        return s + 1
    D = Fraction(D)
    for t in range(s + 1):
        if points >= D * q ** (s - t):
            return t
    return s + 1


def _confidence(q):
    return "normal" if q >= 5 else "low-confidence"


def _product_rows(field: FiniteField, blocks):
    """Rows x_1 (x) x_2 (x) ... for every combination of rows of the blocks (first block slowest)."""
    out = blocks[0]
    for B in blocks[1:]:
        out = field.mul(out[:, None, :, None], B[None, :, None, :]).reshape(len(out) * len(B), -1)
    return out


def _slices(field, members, dims, cap):
    """Yield (points, slices) chunks; slices has shape (chunk, n, s_d)."""
    lead = dims[:-1]
    check_cap(field.order ** sum(lead), cap, "singular-locus enumeration")
    mats = [m.coeffs.reshape(-1, dims[-1]) for m in members]
    vecs = [field.all_vectors(s) for s in lead]
    tail = _product_rows(field, vecs[1:]) if len(vecs) > 1 else np.ones((1, 1), dtype=np.int64)
    tail_pts = (np.indices(tuple(len(v) for v in vecs[1:])).reshape(len(vecs) - 1, -1).T
                if len(vecs) > 1 else np.zeros((1, 0), dtype=np.int64))
    step = max(1, _CHUNK // len(tail))
    first = vecs[0]
    for start in range(0, len(first), step):
        block = first[start:start + step]
        K = _product_rows(field, [block, tail]) if len(vecs) > 1 else block
        S = np.stack([field.matmul(K, M) for M in mats], axis=1)
        idx = np.concatenate([np.repeat(np.arange(start, start + len(block)), len(tail))[:, None],
                              np.tile(tail_pts, (len(block), 1))], axis=1)
        yield idx, vecs, S


def _as_members(P):
    if isinstance(P, FormCollection):
        if not P.is_multilinear:
            raise ValueError("singular loci are defined for multilinear forms")
        return list(P.members)
    return [P]


def _singular_mask(field, S):
    if S.shape[1] == 1:
        return ~S[:, 0, :].any(axis=1)
    return batch_rank(field, S) < S.shape[1]


def singular_locus_count(P, cap: int = DEFAULT_CAP, D=1) -> LocusCount:
    """Exact count of (x_1..x_{d-1}) whose slices are linearly dependent."""
    members = _as_members(P)
    field = members[0].ring
    if not isinstance(field, FiniteField):
        raise ValueError("point counts need a finite field")
    dims = members[0].dims
    if len(dims) < 2:
        raise ValueError("singular loci need d >= 2")
    total = 0
    for _, _, S in _slices(field, members, dims, cap):
        total += int(np.count_nonzero(_singular_mask(field, S)))
    s = sum(dims[:-1])
    lc = LocusCount(total, s, field.order, confidence=_confidence(field.order))
    lc.codim_estimate = codim_from_counts(lc, D)
    return lc


def singular_locus_points(P, cap: int = DEFAULT_CAP) -> np.ndarray:
    """The points of Z_P as concatenated coordinate rows."""
    members = _as_members(P)
    field = members[0].ring
    dims = members[0].dims
    out = []
    for idx, vecs, S in _slices(field, members, dims, cap):
        mask = _singular_mask(field, S)
        sel = idx[mask]
        out.append(np.concatenate([vecs[i][sel[:, i]] for i in range(len(vecs))], axis=1))
    return np.concatenate(out, axis=0) if out else np.zeros((0, sum(dims[:-1])), dtype=np.int64)


def prk_upper_from_codim(P: MultilinearForm, cap: int = DEFAULT_CAP) -> int:
    """2^{d-1} times the codimension estimate of Z_P (a claimed bound, report only)."""
    return 2 ** (P.d - 1) * min(singular_locus_count(P, cap).codim_estimate, sum(P.dims[:-1]))


def diagonal_locus_count(q: int, d: int, m: int, rbar: int, N: int) -> int:
    """#Z for a combination of m diagonal blocks of size rbar inside N coordinates."""
    per = q ** (d - 1) - (q - 1) ** (d - 1)
    return per ** (m * rbar) * q ** ((d - 1) * (N - m * rbar))


# ---------------------------------------------------------------------------
# gradient loci


def _check_char(field, d):
    if field.characteristic and field.characteristic <= d:
        raise ValueError(f"characteristic {field.characteristic} is too small for degree {d}")


def _jacobian_mask(forms, field, pts):
    grads = [[g.evaluate_many(pts) for g in Q.gradient()] for Q in forms]
    J = np.stack([np.stack(row, axis=1) for row in grads], axis=1)  # (N, n, s)
    if J.shape[1] == 1:
        return ~J[:, 0, :].any(axis=1)
    return batch_rank(field, J) < J.shape[1]


def gradient_locus_count(Q, cap: int = DEFAULT_CAP, D=1) -> LocusCount:
    """Points where grad Q vanishes (or the Jacobian of a collection drops rank)."""
    forms = list(Q.members) if isinstance(Q, FormCollection) else [Q]
    field = forms[0].ring
    if not isinstance(field, FiniteField):
        raise ValueError("point counts need a finite field")
    s = forms[0].s
    for f in forms:
        _check_char(field, f.d)
    q = field.order
    check_cap(q ** s, cap, "gradient-locus enumeration")
    if all(f.is_zero() or f.d == 0 for f in forms):
        total = q ** s
    else:
        first = field.all_vectors(1)
        rest = field.all_vectors(s - 1) if s > 1 else np.zeros((1, 0), dtype=np.int64)
        step = max(1, _CHUNK // len(rest))
        total = 0
        for start in range(0, q, step):
            lead = first[start:start + step]
            pts = np.concatenate([np.repeat(lead, len(rest), axis=0), np.tile(rest, (len(lead), 1))], axis=1)
            total += int(np.count_nonzero(_jacobian_mask(forms, field, pts)))
    lc = LocusCount(total, s, q, confidence=_confidence(q))
    lc.codim_estimate = codim_from_counts(lc, D)
    return lc


def field_ladder(field: FiniteField, s: int, cap: int = DEFAULT_CAP, max_q: int = 64) -> list:
    """F_p, F_{p^2}, ... while q^s stays within the cap."""
    if not isinstance(field, PrimeField):
        return [field]
    out = [field]
    k = 2
    while field.p ** k <= max_q and field.p ** (k * s) <= cap and k <= 4:
        out.append(extend(field, k))
        k += 1
    return out


def birch_rank_estimate(Q, cap: int = DEFAULT_CAP, ladder: bool = True) -> LocusCount:
    """Codimension estimate of the gradient locus, taken at the largest field of the ladder."""
    forms = list(Q.members) if isinstance(Q, FormCollection) else [Q]
    base = forms[0].ring
    s = forms[0].s
    fields = field_ladder(base, s, cap) if ladder else [base]
    rows = []
    result = None
    for F in fields:
        lifted = [f.change_ring(F) if F != base else f for f in forms]
        lc = gradient_locus_count(FormCollection(lifted) if len(lifted) > 1 else lifted[0], cap)
        rows.append({"q": F.order, "points": lc.total_points, "codim": lc.codim_estimate})
        result = lc
    result.extra["ladder"] = rows
    return result


def _schmidt_collective(forms, budget):
    coll = FormCollection(forms)
    return collective_prk(coll, lambda Q: schmidt_upper_from_prk(Q, budget)[0])


def geometry_inequality_audit(Q, budget: int = 10**6, cap: int = DEFAULT_CAP, instance_id: str = "") -> AuditReport:
    """rk_B <= 2 rk and rk <= (d-1)(rk_B + n - 1), with estimated rk_B and certified rk."""
    forms = list(Q.members) if isinstance(Q, FormCollection) else [Q]
    n = len(forms)
    d = forms[0].d
    rkB = birch_rank_estimate(Q, cap)
    rk, witness = _schmidt_collective(forms, budget)
    first_ok = rkB.codim_estimate <= 2 * rk
    second_rhs = (d - 1) * (rkB.codim_estimate + n - 1)
    second = "consistent" if rk <= second_rhs else "inconclusive"
    verdict = "consistent" if first_ok and second == "consistent" else (
        "inconclusive" if first_ok else "violated-estimate")
    return AuditReport("geometry", instance_id, {"rk_B": rkB.codim_estimate, "rk_upper": rk},
                       {"2rk": 2 * rk, "(d-1)(rk_B+n-1)": second_rhs}, verdict, {},
                       {"birch_ladder": rkB.extra.get("ladder"), "combination": list(witness),
                        "rk_sing": second, "confidence": rkB.confidence})


def noether_fiber_audit(points, t: int, field: FiniteField, trials: int = 100, seed=0,
                        instance_id: str = "") -> AuditReport:
    """Project a point set by random (s-t) x s matrices and record the largest fiber."""
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim != 2:
        raise ValueError("points must be rows")
    s = pts.shape[1]
    if not 0 <= t <= s:
        raise ValueError("t must lie in 0..s")
    rng = np.random.default_rng(seed)
    maxima = []
    for _ in range(trials):
        M = field.random(rng, (s - t, s))
        img = field.matmul(pts, np.ascontiguousarray(M.T)) if s - t else np.zeros((len(pts), 0), np.int64)
        if len(pts) == 0:
            maxima.append(0)
            continue
        _, counts = np.unique(img, axis=0, return_counts=True)
        maxima.append(int(counts.max()))
    return AuditReport("noether", instance_id, min(maxima), max(maxima), "recorded", {},
                       {"q": field.order, "s": s, "t": t, "trials": trials, "points": len(pts),
                        "best_max_fiber": min(maxima), "worst_max_fiber": max(maxima)})


def codim_prk_audit(P: MultilinearForm, budget: int = 10**6, cap: int = DEFAULT_CAP, instance_id: str = "") -> AuditReport:
    """codim Z_P <= prk, with prk replaced by its certified upper bound."""
    lc = singular_locus_count(P, cap)
    cert = prk_upper(P, budget)
    ok = lc.codim_estimate <= cert.rank
    return AuditReport("codim-prk", instance_id, lc.codim_estimate, cert.rank,
                       "consistent" if ok else "violated-estimate", {},
                       {"points": lc.total_points, "q": lc.q, "prk_status": cert.status})
