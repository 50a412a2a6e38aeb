from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyrank.fields import (QQ, ZZ, CapExceeded, ExtensionField, FieldElement, PrimeField, add, char_value,
                             enumerate_field, extend, finite_field, inv, is_irreducible, is_prime, mul, neg,
                             ring_from_json)

F4 = ExtensionField(2, 2, (1, 1, 1))
FIELDS = [PrimeField(2), PrimeField(3), PrimeField(5), PrimeField(7), F4, ExtensionField(3, 2),
          ExtensionField(2, 3), ExtensionField(5, 2)]


def t_of(F):
    """The class of t in F_p[t]/(m): coefficients (0, 1, 0, ...)."""
    return F.element(tuple([0, 1] + [0] * (F.k - 2)))


def test_char_value_examples():
    v = char_value(PrimeField(5)(0))
    assert (v.re, v.im) == pytest.approx((1.0, 0.0))
    v = char_value(PrimeField(2)(1))
    assert (v.re, v.im) == pytest.approx((-1.0, 0.0))
    v = char_value(t_of(F4))
    assert (v.re, v.im) == pytest.approx((-1.0, 0.0))


def test_char_value_rejects_infinite_rings():
    with pytest.raises(ValueError):
        char_value(FieldElement(ZZ, 1))


def test_enumerate_examples():
    assert [int(x) for x in enumerate_field(PrimeField(2))] == [0, 1]
    assert [int(x) for x in enumerate_field(PrimeField(3))] == [0, 1, 2]
    elems = enumerate_field(F4)
    assert len(elems) == 4 and len(set(elems)) == 4


def test_field_op_examples():
    F5, F3 = PrimeField(5), PrimeField(3)
    assert inv(F5(2)) == 3
    assert add(F3(2), F3(2)) == 1
    t = t_of(F4)
    assert mul(t, t) == t + 1
    assert neg(F5(2)) == 3


def test_extension_mod_arithmetic_by_hand():
    # t^2 = t + 1 in F_4; t^3 = 1
    t = t_of(F4)
    assert t ** 3 == 1
    assert t * (t + 1) == 1
    assert (t + 1).inverse() == t


@pytest.mark.parametrize("F", FIELDS, ids=repr)
def test_character_is_nontrivial(F):
    total = sum(char_value(x).value for x in enumerate_field(F))
    assert abs(total) < 1e-9
    assert abs(F.character_table.sum()) < 1e-9


@pytest.mark.parametrize("F", FIELDS, ids=repr)
def test_enumeration_size(F):
    assert len(enumerate_field(F)) == F.p ** F.k == F.order


@pytest.mark.parametrize("F", FIELDS, ids=repr)
def test_frobenius(F):
    rng = np.random.default_rng(0)
    for a, b in F.random(rng, (100, 2)):
        x, y = F(int(a)), F(int(b))
        assert (x + y) ** F.p == x ** F.p + y ** F.p


@pytest.mark.parametrize("F", FIELDS, ids=repr)
def test_field_axioms_exhaustive(F):
    E = enumerate_field(F)
    zero, one = F(0), F(1)
    for x in E:
        assert x + zero == x and x * one == x and x + (-x) == zero
        if x != zero:
            assert x * x.inverse() == one
    # distributivity on a sample
    for x in E[:5]:
        for y in E[:5]:
            for z in E[:5]:
                assert x * (y + z) == x * y + x * z


def test_character_additive():
    for F in FIELDS:
        E = enumerate_field(F)
        for x in E[:6]:
            for y in E[:6]:
                lhs = char_value(x + y).value
                rhs = (char_value(x) * char_value(y)).value
                assert abs(lhs - rhs) < 1e-9


def test_vectorized_ops_match_elements():
    F = ExtensionField(3, 2)
    a = np.arange(9)
    A, B = np.meshgrid(a, a)
    prod = F.mul(A, B)
    for x in range(9):
        for y in range(9):
            assert prod[y, x] == (F(x) * F(y)).rep


def test_all_vectors_lexicographic():
    V = PrimeField(3).all_vectors(2)
    assert V.shape == (9, 2)
    assert V[:4].tolist() == [[0, 0], [0, 1], [0, 2], [1, 0]]


def test_caps_and_validation():
    with pytest.raises(ValueError):
        PrimeField(4)
    with pytest.raises(ValueError):
        ExtensionField(2, 2, (1, 0, 1))  # t^2 + 1 = (t + 1)^2 over F_2
    with pytest.raises(CapExceeded):
        ExtensionField(5, 3)  # 125 > default cap 64
    with pytest.raises(CapExceeded):
        enumerate_field(PrimeField(5), cap=4)


def test_irreducibility_and_primes():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert is_irreducible((1, 1, 1), 2)
    assert not is_irreducible((1, 0, 1), 2)
    assert is_irreducible((1, 1, 0, 1), 2)


def test_ring_descriptors_round_trip():
    for desc in ("Z", "Q", {"p": 3}, {"p": 2, "k": 2, "modulus": [1, 1, 1]}):
        R = ring_from_json(desc)
        assert ring_from_json(R.to_json()) == R
    assert finite_field(2, 2) == extend(PrimeField(2), 2)


def test_rationals_exact():
    assert QQ.add(QQ.coerce(Fraction(1, 3)), QQ.coerce(Fraction(2, 3))) == 1
    assert QQ.inv(QQ.coerce(Fraction(-2, 5))) == Fraction(-5, 2)
    with pytest.raises(ZeroDivisionError):
        QQ.inv(QQ.coerce(0))


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_prime_field_is_reduction_of_integers(a, b, p):
    F = PrimeField(p)
    assert F(a) * F(b) == (a * b) % p
    assert F(a) + F(b) == (a + b) % p
    if a % p:
        assert (F(a) * F(a).inverse()) == 1


@given(st.sampled_from(FIELDS), st.data())
def test_power_matches_repeated_multiplication(F, data):
    x = F(data.draw(st.integers(0, F.order - 1)))
    e = data.draw(st.integers(0, 12))
    acc = F(1)
    for _ in range(e):
        acc = acc * x
    assert x ** e == acc
    if x != 0:
        assert x ** (F.order - 1) == 1
