"""Coefficient systems on matrix spaces and a column-wise embedding solver.

Unknown maps A_i are s_i x t matrices; entry A_i[k, j] sits at flat index
k * t + j of slot i.  The equation indexed by (l, j_1..j_d) reads
(P_l o A)(e_{j_1}, ..., e_{j_d}) = R_l[j_1, ..., j_d].
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bias import bias_exact
from .fields import FiniteField, check_cap
from .forms import FormCollection, LinearMapTuple, MultilinearForm, compose, diagonal_collection
from .linalg import nullspace, solve
from .rank import ConstantsTable, Symbolic, collective_prk, prk_upper_search
from .report import AuditReport

DEFAULT_BUDGET = 10**6


def _collection(x) -> FormCollection:
    if isinstance(x, FormCollection):
        return x
    if isinstance(x, MultilinearForm):
        return FormCollection([x])
    return FormCollection(list(x))


@dataclass
class CoefficientSystem:
    source: FormCollection
    targets: FormCollection
    t: int
    equations: list = field(default_factory=list)  # (l, js, MultilinearForm)

    @property
    def ring(self):
        return self.source.ring

    @property
    def d(self) -> int:
        return self.source.d

    @property
    def dims(self):
        return self.source.dims

    def target_value(self, l, js):
        return self.targets[l].coeffs[tuple(js)]

    def equation(self, l, js) -> MultilinearForm:
        for ll, jj, E in self.equations:
            if ll == l and tuple(jj) == tuple(js):
                return E
        raise KeyError((l, js))


def equation_form(P: MultilinearForm, t: int, js) -> MultilinearForm:
    """P^{js} on the matrix spaces: coefficient a_k at flat indices (k_i t + j_i)."""
    ring = P.ring
    shape = []
    for s in P.dims:
        shape += [s, t]
    C = ring.zeros(tuple(shape))
    index = []
    for j in js:
        index += [slice(None), j]
    C[tuple(index)] = P.coeffs
    return MultilinearForm(ring, C.reshape(tuple(s * t for s in P.dims)))


def build_system(collection, targets) -> CoefficientSystem:
    source = _collection(collection)
    tgt = _collection(targets)
    if tgt.n != source.n:
        raise ValueError("one target per source form")
    if tgt.ring != source.ring or tgt.d != source.d:
        raise ValueError("targets must share ring and arity with the source")
    t = tgt.dims[0]
    if any(x != t for x in tgt.dims):
        raise ValueError("target forms need all slot dimensions equal to t")
    check_cap(source.n * t ** source.d * math.prod(s * t for s in source.dims), 10**7, "coefficient system")
    eqs = []
    for l, P in enumerate(source.members):
        for js in itertools.product(range(t), repeat=source.d):
            eqs.append((l, js, equation_form(P, t, js)))
    return CoefficientSystem(source, tgt, t, eqs)


def flatten_maps(T: LinearMapTuple) -> list:
    return [A.reshape(-1) for A in T.maps]


def relabel_rank_check(system: CoefficientSystem, cap: int = 10**7, instance_id: str = "") -> AuditReport:
    """Equation forms have the bias of their source form; the column-0 restriction gives back P_l."""
    ring = system.ring
    if not isinstance(ring, FiniteField):
        raise ValueError("bias comparisons need a finite field")
    t = system.t
    mismatches = []
    base = {l: bias_exact(P, cap=cap).exact for l, P in enumerate(system.source.members)}
    for l, js, E in system.equations:
        b = bias_exact(E, cap=cap).exact
        if b != base[l]:
            mismatches.append({"l": l, "js": list(js), "bias": b, "expected": base[l]})
    # fixing every column j != 0 to zero leaves sum_l c_l P_l on the first column
    zero_js = (0,) * system.d
    restricted_ok = True
    combos = [tuple(1 if i == l else 0 for i in range(system.source.n)) for l in range(system.source.n)]
    combos.append((1,) * system.source.n)
    for c in combos:
        E = None
        for l, cl in enumerate(c):
            term = system.equation(l, zero_js).scale(cl)
            E = term if E is None else E + term
        idx = tuple(np.arange(s) * t for s in system.dims)
        sub = E.coeffs[np.ix_(*idx)]
        if not np.all(sub == system.source.combination(c).coeffs):
            restricted_ok = False
    verdict = "holds" if not mismatches and restricted_ok else "violated"
    return AuditReport("relabel", instance_id, len(mismatches), 0, verdict, {},
                       {"restriction_ok": restricted_ok, "mismatches": mismatches[:5], "t": t})


@dataclass
class EmbeddingResult:
    status: str  # found | not-found | budget-exhausted
    embedding: LinearMapTuple | None = None
    certified: bool = False
    nodes: int = 0
    strategy: str = "exhaustive"

    @property
    def found(self) -> bool:
        return self.status == "found"


def verify_embedding(system: CoefficientSystem, T: LinearMapTuple) -> bool:
    return all(compose(P, T) == R for P, R in zip(system.source.members, system.targets.members))


class _OutOfBudget(Exception):
    pass


def _constraints(system, cols, i, c):
    """Linear constraints on column c of A_i given the columns fixed so far."""
    ring, d, t = system.ring, system.d, system.t
    rows, rhs = [], []
    ranges = []
    for i2 in range(d):
        if i2 == i:
            ranges.append([c])
        elif i2 < i:
            ranges.append(range(c + 1))
        else:
            ranges.append(range(c))
    for l, P in enumerate(system.source.members):
        for js in itertools.product(*ranges):
            T = P.coeffs
            # contract every slot except i, highest slot first so indices stay valid
            for i2 in reversed(range(d)):
                if i2 == i:
                    continue
                T = ring.matmul_axis(T, cols[i2][js[i2]].reshape(-1, 1), i2)
                T = np.take(T, 0, axis=i2)
            rows.append(T.reshape(-1))
            rhs.append(system.target_value(l, js))
    return rows, rhs


def _order(system):
    return [(c, i) for c in range(system.t) for i in range(system.d)]


def solve_embedding(system: CoefficientSystem, strategy: str = "exhaustive", seed=0,
                    budget: int = DEFAULT_BUDGET, restarts: int = 50, width: int = 3,
                    cap: int | None = None) -> EmbeddingResult:
    """Backtracking over columns of (A_1..A_d); each new column solves its linear constraints."""
    field_ = system.ring
    if not isinstance(field_, FiniteField):
        raise ValueError("the solver runs over finite fields")
    q = field_.order
    order = _order(system)
    dims = system.dims
    if strategy == "exhaustive" and cap is not None:
        check_cap(q ** (sum(dims) * system.t), cap, "embedding search space")
    rng = np.random.default_rng(seed)
    nodes = 0

    def candidates(cols, i, c, randomized):
        rows, rhs = _constraints(system, cols, i, c)
        s = dims[i]
        if rows:
            A = field_.array(np.array(rows))
            b = field_.array(np.array(rhs))
            x0 = solve(field_, A, b)
            if x0 is None:
                return
            K = nullspace(field_, A)
        else:
            x0 = field_.zeros(s)
            K = np.eye(s, dtype=np.int64)
        if randomized:
            # a few distinct random points of the affine solution space
            seen = set()
            for _ in range(width * 2):
                coeffs = tuple(int(a) for a in field_.random(rng, (len(K),)))
                if coeffs in seen:
                    continue
                seen.add(coeffs)
                x = x0
                for a, v in zip(coeffs, K):
                    x = field_.add(x, field_.mul(a, v))
                yield x
                if len(seen) >= width:
                    break
            return
        for coeffs in itertools.product(range(q), repeat=len(K)):
            x = x0
            for a, v in zip(coeffs, K):
                if a:
                    x = field_.add(x, field_.mul(a, v))
            yield x

    def dfs(step, cols, randomized):
        nonlocal nodes
        if step == len(order):
            return True
        c, i = order[step]
        for x in candidates(cols, i, c, randomized):
            nodes += 1
            if nodes > budget:
                raise _OutOfBudget
            cols[i].append(x)
            if dfs(step + 1, cols, randomized):
                return True
            cols[i].pop()
        return False

    def assemble(cols):
        return LinearMapTuple(field_, [np.stack(cols[i], axis=1) for i in range(system.d)])

    try:
        if strategy == "exhaustive":
            cols = [[] for _ in range(system.d)]
            if dfs(0, cols, False):
                T = assemble(cols)
                if not verify_embedding(system, T):
                    raise ArithmeticError("solver produced a map tuple that fails the compose check")
                return EmbeddingResult("found", T, True, nodes, strategy)
            return EmbeddingResult("not-found", None, True, nodes, strategy)
        if strategy == "randomized":
            for _ in range(restarts):
                cols = [[] for _ in range(system.d)]
                if dfs(0, cols, True):
                    T = assemble(cols)
                    if not verify_embedding(system, T):
                        raise ArithmeticError("solver produced a map tuple that fails the compose check")
                    return EmbeddingResult("found", T, True, nodes, strategy)
            return EmbeddingResult("not-found", None, False, nodes, strategy)
    except _OutOfBudget:
        return EmbeddingResult("budget-exhausted", None, False, nodes, strategy)
    raise ValueError(f"unknown strategy {strategy!r}")


def universality_audit(collection, t: int, constants: ConstantsTable | None = None,
                       field_class: str = "finite-large", budget: int = DEFAULT_BUDGET,
                       instance_id: str = "") -> AuditReport:
    """Above the C (n t^d)^D threshold the diagonal targets must embed."""
    coll = _collection(collection)
    constants = constants or ConstantsTable()
    n, d = coll.n, coll.d
    C, D = constants.universality(field_class, d)
    exact = [True]

    def rank_fn(P):
        cert = prk_upper_search(P, budget)
        exact[0] &= cert.exact
        return cert.rank

    prk, witness = collective_prk(coll, rank_fn)
    wit = {"prk_bound": prk, "prk_exact": exact[0], "combination": list(witness), "t": t}
    if isinstance(C, Symbolic) or isinstance(D, Symbolic):
        return AuditReport("universality", instance_id, prk, f"{C}*(n t^d)^{D}", "symbolic",
                           {"C": str(C), "D": str(D)}, wit)
    threshold = C * (n * t ** d) ** D
    rbar = t // n
    if rbar == 0:
        return AuditReport("universality", instance_id, prk, threshold, "recorded", {"C": C, "D": D},
                           dict(wit, note="t < n leaves no diagonal target"))
    targets = diagonal_collection(n, rbar, d, coll.ring)
    if n * rbar < t:
        pad = [MultilinearForm(coll.ring, np.pad(m.coeffs, [(0, t - n * rbar)] * d)) for m in targets]
        targets = FormCollection(pad)
    res = solve_embedding(build_system(coll, targets), "exhaustive", budget=budget)
    wit.update(found=res.found, certified=res.certified, status=res.status, nodes=res.nodes)
    if prk > threshold and exact[0]:
        verdict = {"found": "holds", "not-found": "violated"}.get(res.status, "inconclusive")
    elif prk > threshold:
        verdict = "inconclusive"
    else:
        verdict = "recorded"
    return AuditReport("universality", instance_id, prk, threshold, verdict, {"C": C, "D": D}, wit)
