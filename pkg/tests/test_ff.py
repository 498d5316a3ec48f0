import itertools

import pytest

from frobenius_orders.ff import (FieldError, InsufficientDegree, degree_for_roots, ext_field_build, fp_sqrt,
                                 is_irreducible, mult_order, roots_of_unity)
from frobenius_orders.ntheory import crt, divisors, euler_phi, factorize, first_primes, is_prime


def test_fp_sqrt_examples():
    assert fp_sqrt(4, 13) == (2, 11)
    assert fp_sqrt(0, 7) == (0,)
    assert fp_sqrt(2, 5) == ()


@pytest.mark.parametrize("p", [3, 5, 7, 13, 17, 41, 97, 193])
def test_fp_sqrt_against_squaring(p):
    squares = {}
    for y in range(p):
        squares.setdefault(y * y % p, set()).add(y)
    for a in range(p):
        assert set(fp_sqrt(a, p)) == squares.get(a, set())


def test_modulus_is_irreducible_and_deterministic():
    K = ext_field_build(3, 4)
    assert K.modulus == (2, 1, 0, 0, 1)
    assert ext_field_build(3, 4) is K
    for p, k in [(3, 3), (5, 4), (7, 6), (3, 12)]:
        assert is_irreducible(list(ext_field_build(p, k).modulus), p)


def test_irreducibility_by_brute_force():
    # quadratics over F_5 without roots are exactly the irreducible ones
    for c0, c1 in itertools.product(range(5), repeat=2):
        has_root = any((x * x + c1 * x + c0) % 5 == 0 for x in range(5))
        assert is_irreducible([c0, c1, 1], 5) == (not has_root)


def test_field_axioms_small():
    K = ext_field_build(3, 2)
    els = list(K.elements())
    assert len(els) == 9 and len(set(els)) == 9
    for a in els:
        if not a.is_zero():
            assert a * a.inverse() == 1
            assert a ** (K.order - 1) == 1
    assert K.primitive_element ** ((K.order - 1) // 2) != 1


def test_degree_bound():
    with pytest.raises(FieldError):
        ext_field_build(3, 13)
    with pytest.raises(FieldError):
        ext_field_build(9, 2)


def test_mult_order():
    assert mult_order(2, 7) == 3
    assert mult_order(3, 7) == 6


def test_roots_of_unity():
    K = ext_field_build(7, 1)
    roots = roots_of_unity(3, K)
    assert sorted(z.to_int() for z in roots) == [1, 2, 4]
    assert sorted(roots.values()) == [1, 3, 3]
    L = ext_field_build(3, degree_for_roots(5, 3))
    assert L.degree == 4 and len(roots_of_unity(5, L)) == 5


def test_roots_need_extension():
    assert degree_for_roots(13, 5) == 4
    with pytest.raises(InsufficientDegree):
        degree_for_roots(23, 5)  # 5 has order 22 mod 23


def test_extension_sqrt():
    K = ext_field_build(5, 4)
    g = K.primitive_element
    for e in (0, 2, 10, 312):
        x = g**e
        s = x.sqrt()
        assert s is not None and s * s == x
    assert (g**7).sqrt() is None


def test_ntheory_basics():
    assert first_primes(5) == [2, 3, 5, 7, 11]
    assert first_primes(500)[-1] == 3571
    assert factorize(360) == ((2, 3), (3, 2), (5, 1))
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert euler_phi(36) == 12
    assert is_prime(1009) and not is_prime(1001)
    assert crt([2, 3], [3, 5]) == (8, 15)
