"""Multilinear and homogeneous forms.

A :class:`MultilinearForm` is a dense coefficient tensor ``a[k1, ..., kd]``;
slot ``i`` takes vectors of length ``dims[i]``.  A :class:`HomogeneousForm`
keeps a sparse map from exponent vectors to nonzero coefficients.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import ZZ, FiniteField, PrimeField, Ring, check_cap, ring_from_json

MAX_ENTRIES = 10**6


def _ring(r) -> Ring:
    if isinstance(r, Ring):
        return r
    if isinstance(r, int):
        return PrimeField(r)
    return ring_from_json(r)


class MultilinearForm:
    """P(x_1, ..., x_d) = sum a[k1..kd] x_1[k1] ... x_d[kd]."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        ring = _ring(ring)
        arr = ring.array(coeffs)
        if arr.ndim == 0:
            raise ValueError("a multilinear form needs at least one slot")
        if any(s <= 0 for s in arr.shape):
            raise ValueError(f"slot dimensions must be positive, got {arr.shape}")
        check_cap(arr.size, MAX_ENTRIES, "coefficient tensor")
        self.ring = ring
        self.coeffs = arr

    @classmethod
    def zero(cls, ring, dims) -> "MultilinearForm":
        ring = _ring(ring)
        if any(int(s) <= 0 for s in dims):
            raise ValueError(f"slot dimensions must be positive, got {tuple(dims)}")
        return cls(ring, ring.zeros(tuple(int(s) for s in dims)))

    @property
    def d(self) -> int:
        return self.coeffs.ndim

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.coeffs.shape)

    def is_zero(self) -> bool:
        return bool(self.ring.zero_mask(self.coeffs).all())

    def _check_args(self, args, count):
        if len(args) != count:
            raise ValueError(f"expected {count} slot vectors, got {len(args)}")
        vecs = []
        for i, v in enumerate(args):
            v = self.ring.array(v).reshape(-1)
            if len(v) != self.dims[i]:
                raise ValueError(f"slot {i} needs length {self.dims[i]}, got {len(v)}")
            vecs.append(v)
        return vecs

    def evaluate(self, *args):
        if len(args) == 1 and self.d > 1:
            args = tuple(args[0])
        vecs = self._check_args(args, self.d)
        T = self.coeffs
        for v in vecs:
            T = self.ring.matmul_axis(T, v.reshape(-1, 1), 0)[0]
        return self.ring.coerce(T.item() if isinstance(T, np.ndarray) else T)

    __call__ = evaluate

    def slice(self, *args) -> np.ndarray:
        """Coefficient vector of the linear form P(x_1, ..., x_{d-1}, .)."""
        if self.d < 2:
            raise ValueError("slicing needs d >= 2")
        if len(args) == 1 and self.d > 2:
            args = tuple(args[0])
        vecs = self._check_args(args, self.d - 1)
        T = self.coeffs
        for v in vecs:
            T = self.ring.matmul_axis(T, v.reshape(-1, 1), 0)[0]
        return T

    def _same(self, other: "MultilinearForm"):
        if not isinstance(other, MultilinearForm):
            raise TypeError("expected a MultilinearForm")
        if other.ring != self.ring or other.dims != self.dims:
            raise ValueError("forms live on different spaces")

    def __add__(self, other):
        self._same(other)
        return MultilinearForm(self.ring, self.ring.add(self.coeffs, other.coeffs))

    def __sub__(self, other):
        self._same(other)
        return MultilinearForm(self.ring, self.ring.sub(self.coeffs, other.coeffs))

    def __neg__(self):
        return MultilinearForm(self.ring, self.ring.neg(self.coeffs))

    def scale(self, c) -> "MultilinearForm":
        return MultilinearForm(self.ring, self.ring.mul(self.coeffs, self.ring.coerce(c)))

    def __eq__(self, other):
        if not isinstance(other, MultilinearForm):
            return NotImplemented
        return (self.ring == other.ring and self.dims == other.dims
                and bool(np.all(self.coeffs == other.coeffs)))

    def __hash__(self):
        return hash((self.ring, self.dims, tuple(self.coeffs.reshape(-1).tolist())))

    def permute(self, order: Sequence[int]) -> "MultilinearForm":
        """Form whose slot ``i`` is slot ``order[i]`` of this one."""
        return MultilinearForm(self.ring, np.transpose(self.coeffs, tuple(order)))

    def to_json(self) -> dict:
        enc = np.vectorize(self.ring.encode, otypes=[object])(self.coeffs)
        return {"kind": "multilinear", "d": self.d, "dims": list(self.dims),
                "ring": self.ring.to_json(), "coeffs": enc.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "MultilinearForm":
        ring = ring_from_json(data["ring"])
        P = cls(ring, ring.array(data["coeffs"]))
        if "dims" in data and list(P.dims) != list(data["dims"]):
            raise ValueError(f"dims {data['dims']} do not match coefficients {P.dims}")
        if "d" in data and P.d != int(data["d"]):
            raise ValueError("arity does not match coefficients")
        return P

    def __repr__(self):
        return f"MultilinearForm({self.ring!r}, dims={self.dims})"


def monomials_of_degree(s: int, d: int) -> list[tuple[int, ...]]:
    """Exponent vectors of total degree d in s variables, lexicographic."""
    out = []
    for combo in itertools.combinations_with_replacement(range(s), d):
        e = [0] * s
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out)


class HomogeneousForm:
    """Q = sum c_e x^e over exponent vectors e with |e| = d."""

    __slots__ = ("ring", "d", "s", "monomials")

    def __init__(self, ring, d: int, s: int, monomials=None):
        ring = _ring(ring)
        d, s = int(d), int(s)
        if d < 0 or s <= 0:
            raise ValueError("need d >= 0 and s >= 1")
        acc: dict[tuple[int, ...], object] = {}
        items = monomials.items() if isinstance(monomials, dict) else (monomials or [])
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != s or any(e < 0 for e in exp) or sum(exp) != d:
                raise ValueError(f"exponent {exp} is not a degree-{d} monomial in {s} variables")
            c = ring.coerce(c)
            acc[exp] = ring.add(acc[exp], c) if exp in acc else c
        self.ring = ring
        self.d = d
        self.s = s
        self.monomials = {e: c for e, c in sorted(acc.items()) if not ring.is_zero(c)}

    def is_zero(self) -> bool:
        return not self.monomials

    def evaluate(self, x):
        x = [self.ring.coerce(v) for v in np.asarray(x, dtype=object).reshape(-1)]
        if len(x) != self.s:
            raise ValueError(f"expected {self.s} coordinates")
        total = self.ring.zero
        for exp, c in self.monomials.items():
            term = c
            for xi, e in zip(x, exp):
                if e:
                    term = self.ring.mul(term, self.ring.power(xi, e))
            total = self.ring.add(total, term)
        return total

    __call__ = evaluate

    def evaluate_many(self, points) -> np.ndarray:
        """Values at every row of ``points`` (shape (N, s))."""
        ring = self.ring
        pts = ring.array(points)
        out = ring.zeros(len(pts))
        powers: dict[tuple[int, int], np.ndarray] = {}
        for exp, c in self.monomials.items():
            term = ring.array(np.full(len(pts), 1))
            term = ring.mul(term, c)
            for i, e in enumerate(exp):
                if e:
                    if (i, e) not in powers:
                        powers[(i, e)] = ring.power(pts[:, i], e)
                    term = ring.mul(term, powers[(i, e)])
            out = ring.add(out, term)
        return out

    def _same(self, other):
        if not isinstance(other, HomogeneousForm):
            raise TypeError("expected a HomogeneousForm")
        if other.ring != self.ring or other.s != self.s:
            raise ValueError("forms in different rings or variable counts")

    def __add__(self, other):
        self._same(other)
        if other.d != self.d and not (self.is_zero() or other.is_zero()):
            raise ValueError("degrees differ")
        d = self.d if not self.is_zero() else other.d
        items = list(self.monomials.items()) + list(other.monomials.items())
        return HomogeneousForm(self.ring, d, self.s, items)

    def __neg__(self):
        return HomogeneousForm(self.ring, self.d, self.s,
                               {e: self.ring.neg(c) for e, c in self.monomials.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "HomogeneousForm":
        c = self.ring.coerce(c)
        return HomogeneousForm(self.ring, self.d, self.s,
                               {e: self.ring.mul(v, c) for e, v in self.monomials.items()})

    def __mul__(self, other):
        self._same(other)
        out: list = []
        for e1, c1 in self.monomials.items():
            for e2, c2 in other.monomials.items():
                out.append((tuple(a + b for a, b in zip(e1, e2)), self.ring.mul(c1, c2)))
        return HomogeneousForm(self.ring, self.d + other.d, self.s, out)

    def derivative(self, j: int) -> "HomogeneousForm":
        if self.d == 0:
            raise ValueError("constant forms have no derivative of positive degree")
        out = []
        for exp, c in self.monomials.items():
            if exp[j]:
                e = list(exp)
                e[j] -= 1
                out.append((tuple(e), self.ring.mul(c, self.ring.from_int(exp[j]))))
        return HomogeneousForm(self.ring, self.d - 1, self.s, out)

    def gradient(self) -> list["HomogeneousForm"]:
        return [self.derivative(j) for j in range(self.s)]

    def change_ring(self, ring) -> "HomogeneousForm":
        ring = _ring(ring)
        return HomogeneousForm(ring, self.d, self.s, {e: ring.coerce(c) for e, c in self.monomials.items()})

    def __eq__(self, other):
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        if self.ring != other.ring or self.s != other.s:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.d == other.d and self.monomials == other.monomials

    def __hash__(self):
        return hash((self.ring, self.d, self.s, tuple(self.monomials.items())))

    def to_json(self) -> dict:
        return {"kind": "homogeneous", "d": self.d, "s": self.s, "ring": self.ring.to_json(),
                "monomials": [{"exp": list(e), "c": self.ring.encode(c)} for e, c in self.monomials.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "HomogeneousForm":
        ring = ring_from_json(data["ring"])
        return cls(ring, data["d"], data["s"], [(m["exp"], ring.decode(m["c"])) for m in data["monomials"]])

    def __repr__(self):
        return f"HomogeneousForm({self.ring!r}, d={self.d}, s={self.s}, terms={len(self.monomials)})"


def homogeneous_part(ring, s: int, terms, degree: int | None = None) -> HomogeneousForm:
    """Top-degree part of a polynomial given as (exponent, coefficient) pairs."""
    ring = _ring(ring)
    terms = [(tuple(int(x) for x in e), c) for e, c in terms]
    acc: dict = {}
    for e, c in terms:
        acc[e] = ring.add(acc[e], ring.coerce(c)) if e in acc else ring.coerce(c)
    live = [(e, c) for e, c in acc.items() if not ring.is_zero(c)]
    if degree is None:
        degree = max((sum(e) for e, _ in live), default=0)
    return HomogeneousForm(ring, degree, s, [(e, c) for e, c in live if sum(e) == degree])


@dataclass(frozen=True)
class LinearMapTuple:
    """Matrices A_1..A_d; A_i has dims[i] rows and t columns."""

    ring: Ring
    maps: tuple

    def __init__(self, ring, maps):
        ring = _ring(ring)
        arrs = tuple(ring.array(A) for A in maps)
        if not arrs:
            raise ValueError("need at least one map")
        if any(A.ndim != 2 for A in arrs):
            raise ValueError("maps must be matrices")
        t = arrs[0].shape[1]
        if any(A.shape[1] != t for A in arrs):
            raise ValueError("all maps need the same number of columns")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "maps", arrs)

    @property
    def t(self) -> int:
        return self.maps[0].shape[1]

    @property
    def d(self) -> int:
        return len(self.maps)

    def then(self, other: "LinearMapTuple") -> "LinearMapTuple":
        """Maps A_i B_i, so that (P o self) o other = P o self.then(other)."""
        if other.d != self.d:
            raise ValueError("arity mismatch")
        return LinearMapTuple(self.ring, [self.ring.matmul(A, B) for A, B in zip(self.maps, other.maps)])

    def __eq__(self, other):
        return (isinstance(other, LinearMapTuple) and self.ring == other.ring and self.d == other.d
                and all(A.shape == B.shape and np.all(A == B) for A, B in zip(self.maps, other.maps)))

    def __hash__(self):
        return hash((self.ring, tuple(tuple(A.reshape(-1).tolist()) for A in self.maps)))

    def to_json(self) -> dict:
        enc = np.vectorize(self.ring.encode, otypes=[object])
        return {"kind": "maps", "ring": self.ring.to_json(), "t": self.t,
                "maps": [enc(A).tolist() for A in self.maps]}

    @classmethod
    def from_json(cls, data: dict) -> "LinearMapTuple":
        ring = ring_from_json(data["ring"])
        return cls(ring, [ring.array(A) for A in data["maps"]])


def compose(P: MultilinearForm, T: LinearMapTuple) -> MultilinearForm:
    """(P o T)(y_1..y_d) = P(A_1 y_1, ..., A_d y_d)."""
    if T.d != P.d:
        raise ValueError(f"form has {P.d} slots, map tuple has {T.d}")
    if T.ring != P.ring:
        raise ValueError("ring mismatch")
    C = P.coeffs
    for i, A in enumerate(T.maps):
        if A.shape[0] != P.dims[i]:
            raise ValueError(f"map {i} has {A.shape[0]} rows, slot has dimension {P.dims[i]}")
        C = P.ring.matmul_axis(C, A, i)
    return MultilinearForm(P.ring, C)


def slice_form(P: MultilinearForm, *args) -> np.ndarray:
    return P.slice(*args)


def evaluate(P, *args):
    return P.evaluate(*args)


class FormCollection:
    """Forms P_1..P_n sharing arity, dimensions and ring."""

    __slots__ = ("members",)

    def __init__(self, members):
        members = list(members)
        if not members:
            raise ValueError("empty collection")
        first = members[0]
        for m in members[1:]:
            if type(m) is not type(first) or m.ring != first.ring:
                raise ValueError("members must share kind and ring")
            if isinstance(first, MultilinearForm) and m.dims != first.dims:
                raise ValueError("members must share slot dimensions")
            if isinstance(first, HomogeneousForm) and (m.s != first.s or (m.d != first.d and not (m.is_zero() or first.is_zero()))):
                raise ValueError("members must share degree and variable count")
        self.members = tuple(members)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def ring(self) -> Ring:
        return self.members[0].ring

    @property
    def d(self) -> int:
        return self.members[0].d

    @property
    def dims(self):
        m = self.members[0]
        return m.dims if isinstance(m, MultilinearForm) else (m.s,) * m.d

    @property
    def is_multilinear(self) -> bool:
        return isinstance(self.members[0], MultilinearForm)

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def combination(self, a):
        """sum_l a_l P_l."""
        a = list(a)
        if len(a) != self.n:
            raise ValueError("coefficient vector has the wrong length")
        ring = self.ring
        first = self.members[0]
        if isinstance(first, MultilinearForm):
            C = ring.zeros(first.dims)
            for c, m in zip(a, self.members):
                C = ring.add(C, ring.mul(m.coeffs, ring.coerce(c)))
            return MultilinearForm(ring, C)
        out = HomogeneousForm(ring, first.d, first.s, {})
        for c, m in zip(a, self.members):
            out = out + m.scale(c)
        return out

    def to_json(self) -> dict:
        return {"kind": "collection", "members": [m.to_json() for m in self.members]}

    @classmethod
    def from_json(cls, data: dict) -> "FormCollection":
        return cls([form_from_json(m) for m in data["members"]])

    def __eq__(self, other):
        return isinstance(other, FormCollection) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"FormCollection(n={self.n}, {self.members[0]!r})"


def form_from_json(data):
    kind = data.get("kind")
    if kind == "multilinear":
        return MultilinearForm.from_json(data)
    if kind == "homogeneous":
        return HomogeneousForm.from_json(data)
    if kind == "collection":
        return FormCollection.from_json(data)
    if kind == "maps":
        return LinearMapTuple.from_json(data)
    raise ValueError(f"unknown form kind {kind!r}")


def load_form(path):
    with open(path) as fh:
        return form_from_json(json.load(fh))


def dump_form(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_json(), fh, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# polarization and diagonal restriction


def polarize(Q: HomogeneousForm) -> MultilinearForm:
    """The symmetric d-linear form with Q~(x, ..., x) = d! Q(x)."""
    ring = Q.ring
    d = Q.d
    if d < 1:
        raise ValueError("polarization needs degree >= 1")
    char = ring.characteristic
    if char != 0 and char <= d:
        raise ValueError(f"characteristic {char} is too small for degree {d}")
    C = ring.zeros((Q.s,) * d)
    for exp, c in Q.monomials.items():
        mult = 1
        for e in exp:
            mult *= math.factorial(e)
        val = ring.mul(c, ring.from_int(mult))
        base = [i for i, e in enumerate(exp) for _ in range(e)]
        for idx in set(itertools.permutations(base)):
            C[idx] = ring.add(C[idx], val)
    return MultilinearForm(ring, C)


def diagonal_restriction(P: MultilinearForm) -> HomogeneousForm:
    """x -> P(x, ..., x) as a homogeneous form."""
    if len(set(P.dims)) != 1:
        raise ValueError("diagonal restriction needs equal slot dimensions")
    ring = P.ring
    s, d = P.dims[0], P.d
    acc: dict = {}
    nz = np.argwhere(~ring.zero_mask(P.coeffs))
    for idx in nz:
        exp = [0] * s
        for k in idx:
            exp[int(k)] += 1
        exp = tuple(exp)
        c = P.coeffs[tuple(idx)]
        acc[exp] = ring.add(acc[exp], c) if exp in acc else c
    return HomogeneousForm(ring, d, s, acc)


restrict_diagonal = diagonal_restriction


# ---------------------------------------------------------------------------
# generators


def diagonal_form(ring, r: int, d: int, dims=None) -> MultilinearForm:
    """sum_{k<r} x_1(k) ... x_d(k)."""
    ring = _ring(ring)
    dims = tuple(dims) if dims is not None else (max(r, 1),) * d
    if len(dims) != d or any(s < r for s in dims):
        raise ValueError("dimensions too small for the diagonal")
    C = ring.zeros(dims)
    for k in range(r):
        C[(k,) * d] = ring.one
    return MultilinearForm(ring, C)


def diagonal_collection(n: int, rbar: int, d: int, ring) -> FormCollection:
    """D_j = sum over the j-th block of rbar indices of x_1(k)...x_d(k)."""
    ring = _ring(ring)
    if n < 1 or rbar < 1 or d < 1:
        raise ValueError("need n, rbar, d >= 1")
    N = n * rbar
    check_cap(N ** d, MAX_ENTRIES, "coefficient tensor")
    members = []
    for j in range(n):
        C = ring.zeros((N,) * d)
        for k in range(j * rbar, (j + 1) * rbar):
            C[(k,) * d] = ring.one
        members.append(MultilinearForm(ring, C))
    return FormCollection(members)


def reduce_mod_p(P, p: int):
    """Entrywise residue of an integer form."""
    F = PrimeField(p)
    if isinstance(P, FormCollection):
        return FormCollection([reduce_mod_p(m, p) for m in P.members])
    if isinstance(P, HomogeneousForm):
        return HomogeneousForm(F, P.d, P.s, {e: F.coerce(ZZ.coerce(c)) for e, c in P.monomials.items()})
    if P.ring != ZZ:
        P = MultilinearForm(ZZ, ZZ.array(P.coeffs))
    return MultilinearForm(F, np.array([int(c) % p for c in P.coeffs.reshape(-1)],
                                       dtype=np.int64).reshape(P.dims))


def lift_to_ring(P, ring):
    """Reinterpret an integer form over another ring."""
    ring = _ring(ring)
    if isinstance(P, FormCollection):
        return FormCollection([lift_to_ring(m, ring) for m in P.members])
    if isinstance(P, HomogeneousForm):
        return P.change_ring(ring)
    flat = [ring.coerce(c) for c in P.coeffs.reshape(-1).tolist()]
    return MultilinearForm(ring, ring.array(np.array(flat, dtype=object).reshape(P.dims)))


def random_form(ring, d: int, dims, seed=None) -> MultilinearForm:
    ring = _ring(ring)
    dims = tuple(int(s) for s in dims)
    if len(dims) != d:
        raise ValueError("need one dimension per slot")
    if any(s <= 0 for s in dims):
        raise ValueError(f"slot dimensions must be positive, got {dims}")
    check_cap(math.prod(dims), MAX_ENTRIES, "coefficient tensor")
    rng = np.random.default_rng(seed)
    return MultilinearForm(ring, ring.random(rng, dims))


def random_homogeneous(ring, d: int, s: int, seed=None) -> HomogeneousForm:
    ring = _ring(ring)
    if s <= 0 or d < 0:
        raise ValueError("need s >= 1 and d >= 0")
    exps = monomials_of_degree(s, d)
    check_cap(len(exps), MAX_ENTRIES, "monomial list")
    rng = np.random.default_rng(seed)
    vals = ring.random(rng, (len(exps),))
    return HomogeneousForm(ring, d, s, list(zip(exps, vals.tolist())))


def monomial_counts(idx: Sequence[int], s: int) -> tuple[int, ...]:
    c = Counter(int(i) for i in idx)
    return tuple(c.get(i, 0) for i in range(s))
