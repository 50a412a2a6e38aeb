"""Coefficient rings: prime fields, small extension fields, Z and Q.

Every ring works on plain Python scalars and on numpy arrays of elements, so
the enumeration code can stay vectorised.  Finite-field elements are stored as
integer codes: a residue in ``[0, p)`` for F_p, and ``sum c_i p^i`` for the
coefficient sequence ``(c_0, ..., c_{k-1})`` of an element of F_{p^k}.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class CapExceeded(ValueError):
    """An enumeration would exceed its configured size cap."""


DEFAULT_FIELD_CAP = 4096
DEFAULT_EXTENSION_CAP = 64
MAX_EXTENSION_DEGREE = 4


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_cap(size: int, cap: int, what: str = "enumeration") -> None:
    if size > cap:
        raise CapExceeded(f"{what} needs {size} points, cap is {cap}")


def _as_index(x):
    # table lookups return numpy scalars for scalar input
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return int(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


class Ring:
    """Shared interface.  Subclasses override the arithmetic primitives."""

    characteristic: int = 0
    is_field: bool = False
    is_finite: bool = False
    dtype = object

    # scalar / array construction ------------------------------------------
    def coerce(self, x):
        raise NotImplementedError

    def array(self, data) -> np.ndarray:
        raise NotImplementedError

    def zeros(self, shape) -> np.ndarray:
        return self.array(np.zeros(shape, dtype=np.int64))

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    def from_int(self, n: int):
        return self.coerce(int(n))

    # arithmetic ------------------------------------------------------------
    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a == 0

    def zero_mask(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr == 0, dtype=bool)

    def sum(self, arr: np.ndarray, axis=None):
        arr = np.asarray(arr)
        if axis is None:
            arr = arr.reshape(-1)
            axis = 0
        moved = np.moveaxis(arr, axis, 0)
        out = self.zeros(moved.shape[1:])
        for k in range(moved.shape[0]):
            out = self.add(out, moved[k])
        return out if out.ndim else self.coerce(out.item())

    def matmul_axis(self, T: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
        """Contract ``axis`` of ``T`` against the rows of matrix ``M``.

        ``out[..., j, ...] = sum_k T[..., k, ...] * M[k, j]``.
        """
        Tm = np.moveaxis(T, axis, -1)
        out = self.zeros(Tm.shape[:-1] + (M.shape[1],))
        for k in range(M.shape[0]):
            out = self.add(out, self.mul(Tm[..., k, None], M[k]))
        return np.moveaxis(out, -1, axis)

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return self.matmul_axis(A, B, A.ndim - 1)

    def power(self, a, e: int):
        result = self.one if np.ndim(a) == 0 else self.array(np.ones(np.shape(a), dtype=np.int64))
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        raise NotImplementedError

    # serialisation ---------------------------------------------------------
    def to_json(self):
        raise NotImplementedError

    def encode(self, x):
        """JSON-friendly scalar."""
        return int(x)

    def decode(self, x):
        return self.coerce(x)

    # finite-field extras ---------------------------------------------------
    @property
    def order(self) -> int:
        raise ValueError(f"{self} is infinite")


# ---------------------------------------------------------------------------
# infinite rings


class _Integers(Ring):
    characteristic = 0
    is_field = False

    _to_int = staticmethod(np.frompyfunc(int, 1, 1))

    def coerce(self, x):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError(f"{x} is not an integer")
            return x.numerator
        return int(x)

    def array(self, data) -> np.ndarray:
        arr = np.array(data, dtype=object)
        if arr.size == 0:
            return arr
        return np.asarray(self._to_int(arr), dtype=object)

    def inv(self, a):
        if a in (1, -1):
            return a
        raise ZeroDivisionError(f"{a} is not a unit in Z")

    def matmul_axis(self, T, M, axis):
        out = np.tensordot(np.asarray(T, dtype=object), np.asarray(M, dtype=object), axes=([axis], [0]))
        return np.moveaxis(np.asarray(out, dtype=object), -1, axis)

    def random(self, rng, shape):
        return self.array(rng.integers(-9, 10, size=shape))

    def to_json(self):
        return "Z"

    def __repr__(self):
        return "ZZ"

    def __eq__(self, other):
        return isinstance(other, _Integers)

    def __hash__(self):
        return hash("ZZ")


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    return Fraction(x)


class _Rationals(Ring):
    characteristic = 0
    is_field = True

    _to_frac = staticmethod(np.frompyfunc(_to_fraction, 1, 1))

    def coerce(self, x):
        return _to_fraction(x)

    def array(self, data) -> np.ndarray:
        arr = np.array(data, dtype=object)
        if arr.size == 0:
            return arr
        return np.asarray(self._to_frac(arr), dtype=object)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return Fraction(1) / a

    def div(self, a, b):
        return Fraction(a) / b

    def matmul_axis(self, T, M, axis):
        out = np.tensordot(np.asarray(T, dtype=object), np.asarray(M, dtype=object), axes=([axis], [0]))
        return np.moveaxis(np.asarray(out, dtype=object), -1, axis)

    def random(self, rng, shape):
        num = rng.integers(-9, 10, size=shape)
        den = rng.integers(1, 10, size=shape)
        out = np.empty(np.shape(num), dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = Fraction(int(num[idx]), int(den[idx]))
        return out

    def encode(self, x):
        x = Fraction(x)
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def to_json(self):
        return "Q"

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, _Rationals)

    def __hash__(self):
        return hash("QQ")


ZZ = _Integers()
QQ = _Rationals()


# ---------------------------------------------------------------------------
# finite fields


class FiniteField(Ring):
    is_field = True
    is_finite = True
    dtype = np.int64

    p: int
    k: int

    @property
    def order(self) -> int:
        return self.p ** self.k

    @property
    def q(self) -> int:
        return self.order

    def element(self, rep) -> "FieldElement":
        return FieldElement(self, self.coerce(rep))

    __call__ = element

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def random(self, rng, shape):
        return rng.integers(0, self.order, size=shape).astype(np.int64)

    def zero_mask(self, arr):
        return np.asarray(arr) == 0

    def is_zero(self, a) -> bool:
        return int(a) == 0

    @cached_property
    def inverse_table(self) -> np.ndarray:
        table = np.zeros(self.order, dtype=np.int64)
        for a in range(1, self.order):
            table[a] = self.inv(a)
        return table

    @cached_property
    def character_table(self) -> np.ndarray:
        """chi(x) = exp(2 pi i Tr(x) / p) for every element code x."""
        tr = np.array([self.trace(x) for x in range(self.order)], dtype=np.float64)
        return np.exp(2j * np.pi * tr / self.p)

    def trace(self, x) -> int:
        raise NotImplementedError

    def all_vectors(self, n: int, cap: int | None = None) -> np.ndarray:
        """Every vector of F^n as rows, lexicographic (first coordinate slowest)."""
        size = self.order ** n
        if cap is not None:
            check_cap(size, cap)
        if n == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices((self.order,) * n).reshape(n, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)


@dataclass(frozen=True, eq=True)
class PrimeField(FiniteField):
    p: int

    def __post_init__(self):
        if not is_prime(int(self.p)):
            raise ValueError(f"{self.p} is not prime")

    @property
    def k(self) -> int:  # type: ignore[override]
        return 1

    @property
    def characteristic(self) -> int:  # type: ignore[override]
        return self.p

    def coerce(self, x):
        if isinstance(x, Fraction):
            return int(x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def array(self, data) -> np.ndarray:
        arr = np.asarray(data)
        if arr.dtype == object:
            arr = np.vectorize(self.coerce, otypes=[np.int64])(arr) if arr.size else arr.astype(np.int64)
        return np.asarray(arr, dtype=np.int64) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        a = int(a) % self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def sum(self, arr, axis=None):
        out = np.asarray(arr, dtype=np.int64).sum(axis=axis) % self.p
        return int(out) if np.ndim(out) == 0 else out

    def matmul_axis(self, T, M, axis):
        out = np.tensordot(np.asarray(T, dtype=np.int64), np.asarray(M, dtype=np.int64), axes=([axis], [0]))
        return np.moveaxis(out % self.p, -1, axis)

    def power(self, a, e):
        if np.ndim(a) == 0:
            return pow(int(a), e, self.p)
        return super().power(a, e)

    def trace(self, x) -> int:
        return int(x) % self.p

    def to_json(self):
        return {"p": self.p}

    def __repr__(self):
        return f"GF({self.p})"


def _poly_mod(num: list[int], mod: Sequence[int], p: int) -> list[int]:
    """Remainder of ``num`` by the monic polynomial ``mod`` (low-to-high) over F_p."""
    num = [c % p for c in num]
    k = len(mod) - 1
    for deg in range(len(num) - 1, k - 1, -1):
        c = num[deg]
        if c:
            shift = deg - k
            for i, m in enumerate(mod):
                num[shift + i] = (num[shift + i] - c * m) % p
    out = num[:k] + [0] * max(0, k - len(num))
    return out


def _poly_is_zero(poly: Iterable[int]) -> bool:
    return not any(poly)


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Brute-force irreducibility test for a monic polynomial over F_p."""
    k = len(modulus) - 1
    if k < 1 or modulus[-1] % p != 1:
        return False
    for e in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=e):
            divisor = list(low) + [1]
            if _poly_is_zero(_poly_mod(list(modulus), divisor, p)[:e]):
                return False
    return True


def default_modulus(p: int, k: int) -> tuple[int, ...]:
    """First monic irreducible of degree k in lexicographic order of low coefficients."""
    for low in itertools.product(range(p), repeat=k):
        mod = tuple(low) + (1,)
        if is_irreducible(mod, p):
            return mod
    raise ValueError(f"no irreducible polynomial of degree {k} over F_{p}")


@dataclass(frozen=True, eq=True)
class ExtensionField(FiniteField):
    """F_{p^k} = F_p[t]/(modulus), elements encoded as base-p integers."""

    p: int
    k: int
    modulus: tuple[int, ...] = field(default=())
    cap: int = field(default=DEFAULT_EXTENSION_CAP, compare=False, repr=False)

    def __post_init__(self):
        if not is_prime(int(self.p)):
            raise ValueError(f"{self.p} is not prime")
        if not 1 <= self.k <= MAX_EXTENSION_DEGREE:
            raise ValueError(f"extension degree {self.k} outside 1..{MAX_EXTENSION_DEGREE}")
        check_cap(self.p ** self.k, self.cap, "extension field")
        mod = tuple(int(c) % self.p for c in self.modulus) if self.modulus else default_modulus(self.p, self.k)
        if len(mod) != self.k + 1:
            raise ValueError(f"modulus must have {self.k + 1} coefficients (low to high)")
        if not is_irreducible(mod, self.p):
            raise ValueError(f"modulus {list(mod)} is not irreducible over F_{self.p}")
        object.__setattr__(self, "modulus", mod)
        q = self.p ** self.k
        digits = [self._digits(x) for x in range(q)]
        add = np.empty((q, q), dtype=np.int64)
        mul = np.empty((q, q), dtype=np.int64)
        for a in range(q):
            da = digits[a]
            for b in range(a, q):
                db = digits[b]
                s = self._code([(x + y) % self.p for x, y in zip(da, db)])
                prod = [0] * (2 * self.k - 1)
                for i, x in enumerate(da):
                    if x:
                        for j, y in enumerate(db):
                            prod[i + j] += x * y
                m = self._code(_poly_mod(prod, mod, self.p))
                add[a, b] = add[b, a] = s
                mul[a, b] = mul[b, a] = m
        neg = np.array([self._code([(-x) % self.p for x in digits[a]]) for a in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        object.__setattr__(self, "_add", add)
        object.__setattr__(self, "_mul", mul)
        object.__setattr__(self, "_neg", neg)
        object.__setattr__(self, "_inv", inv)

    def _digits(self, code: int) -> list[int]:
        out = []
        for _ in range(self.k):
            code, r = divmod(code, self.p)
            out.append(r)
        return out

    def _code(self, digits: Sequence[int]) -> int:
        code = 0
        for c in reversed(list(digits)):
            code = code * self.p + int(c)
        return code

    def coefficients(self, x) -> tuple[int, ...]:
        return tuple(self._digits(int(x)))

    @property
    def characteristic(self) -> int:  # type: ignore[override]
        return self.p

    def coerce(self, x):
        if isinstance(x, (list, tuple)):
            return self._code([int(c) % self.p for c in x])
        if isinstance(x, Fraction):
            num = self.from_int(x.numerator)
            return _as_index(self.mul(num, self.inv(self.from_int(x.denominator))))
        x = int(x)
        if 0 <= x < self.order:
            return x
        # integers map through the prime subfield
        return x % self.p

    def from_int(self, n: int):
        return int(n) % self.p

    def array(self, data) -> np.ndarray:
        arr = np.asarray(data)
        if arr.dtype == object:
            arr = np.vectorize(self.coerce, otypes=[np.int64])(arr) if arr.size else arr.astype(np.int64)
        arr = np.asarray(arr, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise ValueError("element codes out of range")
        return arr

    def add(self, a, b):
        return _as_index(self._add[a, b])

    def sub(self, a, b):
        return _as_index(self._add[a, self._neg[b]])

    def neg(self, a):
        return _as_index(self._neg[a])

    def mul(self, a, b):
        return _as_index(self._mul[a, b])

    def inv(self, a):
        a = int(a)
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self._inv[a])

    def trace(self, x) -> int:
        # Tr(x) = x + x^p + ... + x^(p^(k-1)) lands in the prime subfield
        total, y = 0, int(x)
        for _ in range(self.k):
            total = self.add(total, y)
            y = self.power(y, self.p)
        if total >= self.p:
            raise ArithmeticError("trace left the prime subfield")
        return int(total)

    def power(self, a, e):
        if np.ndim(a) == 0:
            result, base = 1, int(a)
            while e:
                if e & 1:
                    result = int(self._mul[result, base])
                base = int(self._mul[base, base])
                e >>= 1
            return result
        return super().power(a, e)

    def to_json(self):
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus)}

    def __repr__(self):
        return f"GF({self.p}^{self.k})"


def finite_field(p: int, k: int = 1, modulus: Sequence[int] | None = None) -> FiniteField:
    if k == 1 and not modulus:
        return PrimeField(p)
    return ExtensionField(p, k, tuple(modulus or ()))


def ring_from_json(desc) -> Ring:
    """``"Z"``, ``"Q"``, ``{"p": 3}`` or ``{"p": 2, "k": 2, "modulus": [1, 1, 1]}``."""
    if isinstance(desc, str):
        key = desc.strip().upper()
        if key in ("Z", "ZZ"):
            return ZZ
        if key in ("Q", "QQ"):
            return QQ
        raise ValueError(f"unknown ring descriptor {desc!r}")
    if isinstance(desc, dict) and "p" in desc:
        return finite_field(int(desc["p"]), int(desc.get("k", 1)), desc.get("modulus"))
    raise ValueError(f"unknown ring descriptor {desc!r}")


def extend(field_: FiniteField, k: int) -> ExtensionField:
    """Degree-k extension of a prime field; prime-field codes embed unchanged."""
    if field_.k != 1:
        raise ValueError("only prime fields are extended")
    return ExtensionField(field_.p, k)


# ---------------------------------------------------------------------------
# element wrapper and characters


@dataclass(frozen=True)
class FieldElement:
    parent: Ring
    rep: object

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.parent != self.parent:
                raise ValueError("elements of different rings")
            return other.rep
        return self.parent.coerce(other)

    def __add__(self, other):
        return FieldElement(self.parent, self.parent.add(self.rep, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.parent, self.parent.sub(self.rep, self._other(other)))

    def __rsub__(self, other):
        return FieldElement(self.parent, self.parent.sub(self._other(other), self.rep))

    def __mul__(self, other):
        return FieldElement(self.parent, self.parent.mul(self.rep, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.parent, self.parent.neg(self.rep))

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(self.parent, self.parent.power(self.rep, e))

    def __truediv__(self, other):
        return self * FieldElement(self.parent, self.parent.inv(self._other(other)))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.parent, self.parent.inv(self.rep))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.parent == other.parent and self.rep == other.rep
        try:
            return self.rep == self.parent.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.parent, self.rep))

    @property
    def coeffs(self) -> tuple[int, ...]:
        if isinstance(self.parent, ExtensionField):
            return self.parent.coefficients(self.rep)
        return (self.rep,)

    def __int__(self):
        return int(self.rep)

    def __repr__(self):
        return f"{self.parent!r}({self.rep})"


# functional forms of the four field operations
def add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def neg(x: FieldElement) -> FieldElement:
    return -x


def inv(x: FieldElement) -> FieldElement:
    return x.inverse()


@dataclass(frozen=True)
class CharacterValue:
    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __mul__(self, other: "CharacterValue") -> "CharacterValue":
        z = self.value * other.value
        return CharacterValue(z.real, z.imag)


def char_value(x: FieldElement) -> CharacterValue:
    """The trace character e^{2 pi i Tr(x)/p}."""
    parent = x.parent
    if not getattr(parent, "is_finite", False):
        raise ValueError(f"no additive character fixed for the infinite ring {parent!r}")
    z = cmath.exp(2j * math.pi * parent.trace(x.rep) / parent.p)
    return CharacterValue(z.real, z.imag)


def enumerate_field(field_: FiniteField, cap: int = DEFAULT_FIELD_CAP) -> list[FieldElement]:
    if not getattr(field_, "is_finite", False):
        raise ValueError("only finite fields can be enumerated")
    check_cap(field_.order, cap, "field enumeration")
    return [FieldElement(field_, int(x)) for x in range(field_.order)]
