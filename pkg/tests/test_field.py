import math
import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from kap.errors import InvalidN, NotPrime, ZeroInverse
from kap.field import (
    Modulus,
    derive_modulus,
    fp_add,
    fp_inv,
    fp_mul,
    fp_neg,
    fp_sample,
    fp_sub,
    is_probable_prime,
    modulus_bits,
)
from kap.rng import SeededRng

P7, P11 = Modulus(7), Modulus(11)


@pytest.mark.parametrize("a,b,expected", [(3, 5, 1), (0, 4, 4), (6, 1, 0)])
def test_add(a, b, expected):
    assert fp_add(a, b, P7) == expected


@pytest.mark.parametrize("a,b,expected", [(3, 5, 1), (1, 6, 6), (0, 6, 0)])
def test_mul(a, b, expected):
    assert fp_mul(a, b, P7) == expected


@pytest.mark.parametrize("m,a,expected", [(P7, 3, 4), (P7, 0, 0), (P11, 1, 10)])
def test_neg(m, a, expected):
    assert fp_neg(a, m) == expected
    assert fp_add(a, fp_neg(a, m), m) == 0


@pytest.mark.parametrize("m,a,expected", [(P7, 3, 5), (P7, 1, 1), (P11, 2, 6)])
def test_inv(m, a, expected):
    assert fp_inv(a, m) == expected


def test_inv_zero():
    with pytest.raises(ZeroInverse):
        fp_inv(0, P7)


def test_sub_is_add_neg():
    assert fp_sub(2, 5, P7) == 4


@pytest.mark.parametrize("p", [q for q in range(2, 258) if sympy.isprime(q)])
def test_inv_exhaustive(p):
    m = Modulus(p)
    for a in range(1, p):
        assert a * fp_inv(a, m) % p == 1


def _oracle_modulus(n):
    b = math.ceil(math.sqrt(n * math.log2(n)))
    return sympy.nextprime(2 ** b - 1)


@pytest.mark.parametrize("n,bits,p", [(16, 8, 257), (4, 3, 11), (2, 2, 5)])
def test_derive_modulus_examples(n, bits, p):
    assert modulus_bits(n) == bits
    assert derive_modulus(n).p == p == _oracle_modulus(n)


def test_derive_modulus_matches_oracle_and_is_monotone():
    prev = 0
    for n in range(2, 200):
        p = derive_modulus(n).p
        assert p == _oracle_modulus(n)
        assert sympy.isprime(p)
        assert p >= prev
        prev = p


def test_derive_modulus_rejects_small_n():
    with pytest.raises(InvalidN):
        derive_modulus(1)


def test_byte_width():
    assert Modulus(257).byte_width == 2
    assert Modulus(5).byte_width == 1
    assert Modulus(65537).byte_width == 3


def test_modulus_requires_prime():
    with pytest.raises(NotPrime):
        Modulus(15)


def test_primality_agrees_with_sympy():
    rng = random.Random(7)
    for q in list(range(0, 5000)) + [rng.getrandbits(90) for _ in range(300)] + [2 ** 127 - 1, 2 ** 89 - 1]:
        assert is_probable_prime(q) == sympy.isprime(q), q
    # Carmichael numbers
    for q in (561, 1105, 1729, 41041, 825265, 321197185, 3825123056546413051):
        assert not is_probable_prime(q)


@settings(max_examples=10_000, deadline=None)
@given(st.sampled_from([7, 257, 1048583]), st.integers(0, 2 ** 40), st.integers(0, 2 ** 40), st.integers(0, 2 ** 40))
def test_field_axioms(p, a, b, c):
    m = Modulus(p)
    a, b, c = a % p, b % p, c % p
    assert fp_add(fp_add(a, b, m), c, m) == fp_add(a, fp_add(b, c, m), m)
    assert fp_mul(a, fp_add(b, c, m), m) == fp_add(fp_mul(a, b, m), fp_mul(a, c, m), m)


def test_sample_small_prime_range():
    rng = SeededRng(b"s", "test")
    assert {fp_sample(Modulus(2), rng) for _ in range(200)} == {0, 1}


def test_sample_deterministic():
    m = Modulus(257)
    a = [fp_sample(m, SeededRng(b"\x2a", "test")) for _ in range(2)]
    assert a[0] == a[1]


def test_sample_uniform_p5():
    m = Modulus(5)
    rng = SeededRng(b"chi", "test")
    counts = [0] * 5
    for _ in range(10_000):
        v = fp_sample(m, rng)
        assert 0 <= v < 5
        counts[v] += 1
    sigma = math.sqrt(10_000 * 0.2 * 0.8)
    assert all(abs(c - 2000) <= 5 * sigma for c in counts)


def test_sample_never_exceeds_p():
    for p in (2, 3, 5, 7, 11, 13, 257, 65537):
        m = Modulus(p)
        rng = SeededRng(p.to_bytes(4, "big"), "test")
        assert all(fp_sample(m, rng) < p for _ in range(2000))
