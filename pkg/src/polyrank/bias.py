"""Bias of multilinear forms over finite fields.

For multilinear P the character sum over the last slot is q^{s_d} when the
slice P(x_1, ..., x_{d-1}, .) vanishes and 0 otherwise, so

    bias(P) = #{(x_1..x_{d-1}) : slice = 0} / q^{s_1 + ... + s_{d-1}}

and the bias is an exact rational number.  The full character sum is kept as
an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import FiniteField, check_cap
from .forms import FormCollection, MultilinearForm
from .rank import ConstantsTable, Symbolic, collective_prk, projective_points, prk_upper_search
from .report import AuditReport

DEFAULT_BIAS_CAP = 10**7
_CHUNK = 1 << 18


@dataclass(frozen=True)
class BiasResult:
    value: float
    q: int
    sample_space: int
    exact: Fraction | None = None
    count: int | None = None

    @property
    def analytic_rank(self) -> float:
        if self.value <= 0:
            return math.inf
        return max(0.0, -math.log(self.value, self.q))


def _field(P) -> FiniteField:
    if not isinstance(P.ring, FiniteField):
        raise ValueError("bias is defined over finite fields")
    return P.ring


def _contract_all(field, T, axes, first_rows=None):
    """Replace each listed axis of T by the values on every vector of that slot."""
    for pos, axis in enumerate(axes):
        vecs = first_rows if (pos == 0 and first_rows is not None) else field.all_vectors(T.shape[axis])
        T = field.matmul_axis(T, np.ascontiguousarray(vecs.T), axis)
    return T


def zero_slice_count(P: MultilinearForm, cap: int = DEFAULT_BIAS_CAP) -> int:
    """Number of (x_1..x_{d-1}) whose last-slot slice of P vanishes."""
    field = _field(P)
    q, d = field.order, P.d
    if d == 1:
        return 1 if P.is_zero() else 0
    check_cap(q ** sum(P.dims[:-1]), cap, "slice enumeration")
    first = field.all_vectors(P.dims[0])
    rest = q ** sum(P.dims[1:-1])
    step = max(1, _CHUNK // max(1, rest * P.dims[-1]))
    count = 0
    for start in range(0, len(first), step):
        T = _contract_all(field, P.coeffs, range(d - 1), first[start:start + step])
        count += int(np.count_nonzero(~T.reshape(-1, P.dims[-1]).any(axis=1)))
    return count


def value_table(P: MultilinearForm, cap: int = DEFAULT_BIAS_CAP) -> np.ndarray:
    """P at every point of V_1 x ... x V_d (lexicographic per slot)."""
    field = _field(P)
    check_cap(field.order ** sum(P.dims), cap, "full enumeration")
    return _contract_all(field, P.coeffs, range(P.d)).reshape(-1)


def bias_exact(P: MultilinearForm, method: str = "slice", cap: int = DEFAULT_BIAS_CAP) -> BiasResult:
    field = _field(P)
    q = field.order
    space = q ** sum(P.dims)
    if method == "slice":
        if P.d == 1:
            exact = Fraction(1) if P.is_zero() else Fraction(0)
            return BiasResult(float(exact), q, space, exact, int(exact))
        count = zero_slice_count(P, cap)
        exact = Fraction(count, q ** sum(P.dims[:-1]))
        return BiasResult(float(exact), q, space, exact, count)
    if method == "character":
        vals = value_table(P, cap)
        total = field.character_table[vals].sum()
        value = abs(total) / space
        scaled = value * space
        if abs(scaled - round(scaled)) > 1e-6 * max(1.0, scaled):
            raise ArithmeticError("character sum of a multilinear form is not an integer")
        return BiasResult(float(value), q, space, None, None)
    raise ValueError(f"unknown method {method!r}")


def bias_function(values: np.ndarray, field: FiniteField) -> float:
    """|E chi(f)| for a table of field values."""
    return float(abs(field.character_table[np.asarray(values)].mean()))


def prk_lower_from_bias(P: MultilinearForm, cap: int = DEFAULT_BIAS_CAP) -> int:
    """Smallest r with bias >= q^{-r}; prk is at least this."""
    if P.is_zero():
        return 0
    field = _field(P)
    q = field.order
    count = zero_slice_count(P, cap)
    denom = q ** sum(P.dims[:-1])
    r = 0
    while q ** r * count < denom:
        r += 1
    return r


def bias_rank_audit(P: MultilinearForm, r: int, regime: int = 2, constants: ConstantsTable | None = None,
                    budget: int = 10**6, cap: int = DEFAULT_BIAS_CAP, instance_id: str = "") -> AuditReport:
    """Contrapositive check: bias > q^{-r} should force prk <= alpha r^beta."""
    constants = constants or ConstantsTable()
    res = bias_exact(P, cap=cap)
    q = res.q
    threshold = Fraction(1, q ** r)
    alpha, beta = constants.bias_rank(regime, P.d)
    wit = {"bias": res.exact, "q": q, "r": r, "regime": regime}
    if isinstance(alpha, Symbolic) or isinstance(beta, Symbolic):
        return AuditReport("bias-rank", instance_id, res.exact, threshold, "symbolic",
                           {"alpha": str(alpha), "beta": str(beta)}, wit)
    bound = alpha * r ** beta
    if res.exact <= threshold:
        return AuditReport("bias-rank", instance_id, res.exact, threshold, "holds",
                           {"alpha": alpha, "beta": beta}, dict(wit, branch="bias <= q^-r"))
    cert = prk_upper_search(P, budget)
    wit.update(prk_upper=cert.rank, prk_status=cert.status, branch="bias > q^-r")
    if cert.rank <= bound:
        verdict = "holds"
    elif cert.exact:
        verdict = "shape-violation"
    else:
        verdict = "inconclusive"
    return AuditReport("bias-rank", instance_id, cert.rank, bound, verdict, {"alpha": alpha, "beta": beta}, wit)


def collective_bias_min(collection: FormCollection, cap: int = 4096, bias_cap: int = DEFAULT_BIAS_CAP):
    """Largest bias over nonzero combinations, with the combination attaining it."""
    field = collection.ring
    if not isinstance(field, FiniteField):
        raise ValueError("bias is defined over finite fields")
    check_cap(field.order ** collection.n, cap, "combination enumeration")
    best, witness = None, None
    for a in projective_points(field, collection.n):
        res = bias_exact(collection.combination(a), cap=bias_cap)
        if best is None or res.exact > best.exact:
            best, witness = res, a
            if best.exact == 1:
                break
    return best, witness


def _system(system, targets):
    forms = list(system.members if isinstance(system, FormCollection) else system)
    if not forms:
        raise ValueError("empty system")
    field = forms[0].ring
    if not isinstance(field, FiniteField):
        raise ValueError("counting runs over finite fields")
    targets = [field.coerce(t) for t in targets]
    if len(targets) != len(forms):
        raise ValueError("one target per equation")
    return forms, targets, field


def counting_lower_bound(system, targets, cap: int = 4096, bias_cap: int = DEFAULT_BIAS_CAP) -> Fraction:
    """q^{-m} (1 - sum over nonzero c in F^m of bias(c . P)); positive means solvable."""
    forms, targets, field = _system(system, targets)
    q, m = field.order, len(forms)
    check_cap(q ** m, cap, "combination enumeration")
    coll = FormCollection(forms)
    total = Fraction(0)
    for a in projective_points(field, m):
        # scalar multiples share the zero-slice set, hence the bias
        total += (q - 1) * bias_exact(coll.combination(a), cap=bias_cap).exact
    return Fraction(1, q ** m) * (1 - total)


def solution_density(system, targets, cap: int = DEFAULT_BIAS_CAP) -> Fraction:
    """Exact fraction of points satisfying every equation."""
    forms, targets, field = _system(system, targets)
    ok = None
    for P, t in zip(forms, targets):
        hit = value_table(P, cap) == t
        ok = hit if ok is None else ok & hit
    return Fraction(int(ok.sum()), len(ok))
