import itertools
import random

import pytest

from dworksum import finitefield as ff
from dworksum.errors import DivisionByZero, NotASubfield, NotPrime, UnsupportedPrime


def brute_min_irreducible(p, s):
    """Oracle: scan monic degree-s polynomials in descending-string order and
    test irreducibility by exhaustive factor search."""

    def poly_mul(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
        return out

    def all_monic(deg):
        for tail in itertools.product(range(p), repeat=deg):
            yield list(tail) + [1]

    def reducible(g):
        deg = len(g) - 1
        for d in range(1, deg // 2 + 1):
            for f in all_monic(d):
                for h in all_monic(deg - d):
                    if poly_mul(f, h) == g:
                        return True
        return False

    for desc in itertools.product(range(p), repeat=s):
        g = list(reversed(desc)) + [1]
        if not reducible(g):
            return tuple(g)
    raise AssertionError


@pytest.mark.parametrize("p,s", [(3, 1), (3, 2), (5, 1), (5, 2), (7, 2), (3, 3)])
def test_modulus_matches_brute_force(p, s):
    assert ff.min_irreducible_poly(p, s) == brute_min_irreducible(p, s)


def test_modulus_examples():
    assert ff.min_irreducible_poly(5, 1) == (0, 1)  # trivial: base field
    assert ff.min_irreducible_poly(3, 2) == (1, 0, 1)  # b^2 + 1


def test_prime_validation():
    with pytest.raises(NotPrime):
        ff.FqParams(4, 1)
    with pytest.raises(UnsupportedPrime):
        ff.FqParams(2, 1)


def test_f9_generator_squares_to_minus_one():
    F9 = ff.FqParams(3, 2)
    b = F9.gen()
    assert b * b == -F9.one()


def test_inverse_and_lagrange():
    for p, s in [(3, 1), (5, 1), (3, 2), (7, 1)]:
        F = ff.FqParams(p, s)
        assert F.one().inv() == F.one()
        for x in ff.enumerate_units(F):
            assert x * x.inv() == F.one()
            assert x ** (F.q - 1) == F.one()
    with pytest.raises(DivisionByZero):
        ff.FqParams(3, 1).zero().inv()


def test_enumerate_units():
    F3 = ff.FqParams(3, 1)
    assert [x.coeffs for x in ff.enumerate_units(F3)] == [(1,), (2,)]
    F5 = ff.FqParams(5, 1)
    assert [x.coeffs[0] for x in ff.enumerate_units(F5)] == [1, 2, 3, 4]
    for p, s in [(3, 2), (5, 2), (7, 1)]:
        assert len(ff.enumerate_units(ff.FqParams(p, s))) == p**s - 1


def test_trace_norm_basics():
    F3 = ff.FqParams(3, 1)
    F9 = ff.FqParams(3, 2)
    one9 = F9.one()
    tr, nm = ff.trace_norm(one9, F3)
    assert tr == F9.from_int(2)
    assert nm == one9
    tr0, nm0 = ff.trace_norm(F9.zero(), F3)
    assert tr0.is_zero() and nm0.is_zero()
    # cyclic norm: Norm(x) = x^((q^m-1)/(q-1))
    for x in ff.enumerate_units(F9):
        _, nm = ff.trace_norm(x, F3)
        assert nm == x ** ((9 - 1) // (3 - 1))
    with pytest.raises(NotASubfield):
        ff.trace_norm(F9.one(), ff.FqParams(5, 1))


def test_frobenius_additive_multiplicative_trace_linear():
    rng = random.Random(11)
    F = ff.FqParams(5, 2)
    base = ff.FqParams(5, 1)
    els = list(F.all_elements())
    for _ in range(40):
        x, y = rng.choice(els), rng.choice(els)
        assert (x + y).frobenius() == x.frobenius() + y.frobenius()
        assert (x * y).frobenius() == x.frobenius() * y.frobenius()
        tx, nx = ff.trace_norm(x, base)
        ty, ny = ff.trace_norm(y, base)
        ts, _ = ff.trace_norm(x + y, base)
        _, np_ = ff.trace_norm(x * y, base)
        assert ts == tx + ty
        assert np_ == nx * ny


def test_embedding_is_a_field_hom():
    small = ff.FqParams(3, 1)
    big = ff.FqParams(3, 2)
    for x in small.all_elements():
        for y in small.all_elements():
            assert ff.embed(x, big) * ff.embed(y, big) == ff.embed(x * y, big)
            assert ff.embed(x, big) + ff.embed(y, big) == ff.embed(x + y, big)
    mid = ff.FqParams(3, 2)
    top = ff.FqParams(3, 4)
    b = mid.gen()
    img = ff.embed(b, top)
    # image satisfies the source modulus
    acc = top.zero()
    xp = top.one()
    for c in mid.modulus:
        acc = acc + top.from_int(c) * xp
        xp = xp * img
    assert acc.is_zero()


def test_multiplicative_generator():
    for p, s in [(3, 1), (5, 1), (3, 2), (7, 1)]:
        F = ff.FqParams(p, s)
        g = ff.multiplicative_generator(F)
        seen = set()
        x = F.one()
        for _ in range(F.q - 1):
            x = x * g
            seen.add(x.coeffs)
        assert len(seen) == F.q - 1


def test_absolute_trace_int():
    F9 = ff.FqParams(3, 2)
    vals = [ff.absolute_trace_int(x) for x in F9.all_elements()]
    # trace is onto F_p with equal fibers
    assert sorted(set(vals)) == [0, 1, 2]
    assert all(vals.count(c) == 3 for c in (0, 1, 2))
