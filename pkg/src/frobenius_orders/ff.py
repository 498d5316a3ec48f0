"""Exact arithmetic in F_l and in small extensions F_{l^k}.

Extension elements live in the polynomial basis of a fixed irreducible
modulus: the first monic irreducible polynomial met when enumerating
x^k + c_{k-1} x^{k-1} + ... + c_0 with (c_0, ..., c_{k-1}) read as the
base-l digits of 0, 1, 2, ....
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

from .ntheory import factor_power_minus_one, is_prime

# Degree 6 is needed for roots of unity met in Sp6, and the square roots of
# eta * q used by the candidate generator double the degree once more.
MAX_DEGREE = 12


class FieldError(ValueError):
    pass


class InsufficientDegree(FieldError):
    """No supported extension F_{l^k} contains the requested roots of unity."""


@dataclass(frozen=True)
class PrimeField:
    modulus: int

    def __post_init__(self):
        if self.modulus < 3 or not is_prime(self.modulus):
            raise FieldError(f"modulus must be an odd prime, got {self.modulus}")


def fp_sqrt(a: int, ell: int) -> tuple[int, ...]:
    """Square roots of ``a`` mod ``ell``, smaller root first; empty for non-residues."""
    a %= ell
    if a == 0:
        return (0,)
    if pow(a, (ell - 1) // 2, ell) != 1:
        return ()
    # Tonelli-Shanks with the first non-residue from 2 upward
    q, s = ell - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (ell - 1) // 2, ell) != ell - 1:
        z += 1
    m, c, t, r = s, pow(z, q, ell), pow(a, q, ell), pow(a, (q + 1) // 2, ell)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % ell
            i += 1
        b = pow(c, 1 << (m - i - 1), ell)
        m, c = i, b * b % ell
        t, r = t * c % ell, r * b % ell
    x, y = sorted((r, ell - r))
    return (x, y) if x != y else (x,)


# -- polynomials over F_p, coefficient lists low -> high ---------------------

def _trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mod(f: list[int], g: list[int], p: int) -> list[int]:
    f = _trim([c % p for c in f])
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    while len(f) - 1 >= dg:
        c = f[-1] * inv % p
        shift = len(f) - 1 - dg
        for i, gi in enumerate(g):
            f[shift + i] = (f[shift + i] - c * gi) % p
        _trim(f)
    return f


def _poly_mulmod(f: list[int], g: list[int], m: list[int], p: int) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return _poly_mod(out, m, p)


def _poly_gcd(f: list[int], g: list[int], p: int) -> list[int]:
    f, g = _trim(list(f)), _trim(list(g))
    while g:
        f, g = g, _poly_mod(f, g, p)
    return f


def _poly_powmod(f: list[int], e: int, m: list[int], p: int) -> list[int]:
    result, base = [1], _poly_mod(f, m, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        e >>= 1
    return result


def is_irreducible(f: list[int], p: int) -> bool:
    """Rabin-style test: gcd(f, x^(p^i) - x) = 1 for i <= deg/2."""
    f = _trim([c % p for c in f])
    n = len(f) - 1
    if n <= 0:
        return False
    if n == 1:
        return True
    x = [0, 1]
    h = x
    for _ in range(n // 2):
        h = _poly_powmod(h, p, f, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        if len(_poly_gcd(f, _trim(diff), p)) > 1:
            return False
    return True


@lru_cache(maxsize=None)
def _first_irreducible(p: int, k: int) -> tuple[int, ...]:
    for n in range(p**k):
        low = [(n // p**i) % p for i in range(k)]
        if is_irreducible(low + [1], p):
            return tuple(low + [1])
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")  # unreachable


@dataclass(frozen=True)
class ExtField:
    p: int
    degree: int
    modulus: tuple[int, ...]  # monic, low -> high, length degree + 1
    order: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "order", self.p**self.degree)

    @property
    def base(self) -> PrimeField:
        return PrimeField(self.p)

    def __call__(self, value) -> FieldElem:
        if isinstance(value, FieldElem):
            if value.field != self:
                raise FieldError("element belongs to another field")
            return value
        if isinstance(value, int):
            return FieldElem(self, (value % self.p,) + (0,) * (self.degree - 1))
        coeffs = [c % self.p for c in value]
        if len(coeffs) > self.degree:
            coeffs = _poly_mod(coeffs, list(self.modulus), self.p)
        return FieldElem(self, tuple(coeffs) + (0,) * (self.degree - len(coeffs)))

    def zero(self) -> FieldElem:
        return self(0)

    def one(self) -> FieldElem:
        return self(1)

    def gen(self) -> FieldElem:
        """The class of x modulo the defining polynomial."""
        return self([0, 1])

    def element(self, index: int) -> FieldElem:
        """The element whose coefficients are the base-p digits of ``index``."""
        return FieldElem(self, tuple((index // self.p**i) % self.p for i in range(self.degree)))

    def elements(self):
        for n in range(self.order):
            yield self.element(n)

    def group_factors(self) -> tuple[tuple[int, int], ...]:
        return factor_power_minus_one(self.p, self.degree)

    @property
    def primitive_element(self) -> FieldElem:
        return _primitive_element(self)

    @property
    def nonresidue(self) -> FieldElem:
        return _nonresidue(self)

    def __repr__(self):
        return f"GF({self.p}^{self.degree})"


def ext_field_build(ell: int, k: int) -> ExtField:
    """F_{ell^k} with the deterministic modulus; identical arguments give equal fields."""
    PrimeField(ell)
    if not 1 <= k <= MAX_DEGREE:
        raise FieldError(f"extension degree must be in 1..{MAX_DEGREE}, got {k}")
    return _build(ell, k)


@lru_cache(maxsize=None)
def _build(ell: int, k: int) -> ExtField:
    return ExtField(ell, k, _first_irreducible(ell, k))


class FieldElem:
    __slots__ = ("field", "c")

    def __init__(self, field: ExtField, c: tuple[int, ...]):
        self.field = field
        self.c = c

    def _coerce(self, other) -> FieldElem:
        if isinstance(other, FieldElem):
            if other.field is not self.field and other.field != self.field:
                raise FieldError("mixed fields")
            return other
        if isinstance(other, int):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return FieldElem(self.field, tuple((a + b) % p for a, b in zip(self.c, other.c)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FieldElem(self.field, tuple(-a % p for a in self.c))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        f = self.field
        if f.degree == 1:
            return FieldElem(f, (self.c[0] * other.c[0] % f.p,))
        prod = _poly_mulmod(list(self.c), list(other.c), list(f.modulus), f.p)
        return FieldElem(f, tuple(prod) + (0,) * (f.degree - len(prod)))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result, base = self.field.one(), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> FieldElem:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return self ** (self.field.order - 2)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.field(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            return self == self.field(other)
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self.field == other.field and self.c == other.c

    def __hash__(self):
        return hash((self.field.p, self.field.degree, self.c))

    def __repr__(self):
        if self.in_base_field():
            return f"{self.c[0]}"
        terms = [f"{a}*x^{i}" if i else f"{a}" for i, a in enumerate(self.c) if a]
        return " + ".join(terms)

    def is_zero(self) -> bool:
        return not any(self.c)

    def in_base_field(self) -> bool:
        return not any(self.c[1:])

    def to_int(self) -> int:
        """Residue in [0, p) for an element of the prime subfield."""
        if not self.in_base_field():
            raise FieldError(f"{self!r} is not in the prime field")
        return self.c[0]

    def is_square(self) -> bool:
        if self.is_zero():
            return True
        return self ** ((self.field.order - 1) // 2) == 1

    def sqrt(self) -> FieldElem | None:
        """A square root in the same field, or None."""
        return _ext_sqrt(self)


def mult_order(x: FieldElem | int, ell: int | None = None) -> int:
    """Multiplicative order by exponent stripping over the factorization of l^k - 1."""
    if isinstance(x, int):
        if ell is None:
            raise FieldError("an integer residue needs its modulus")
        x = ext_field_build(ell, 1)(x)
    if x.is_zero():
        raise FieldError("zero has no multiplicative order")
    n = x.field.order - 1
    for p, e in x.field.group_factors():
        for _ in range(e):
            if x ** (n // p) == 1:
                n //= p
            else:
                break
    return n


@lru_cache(maxsize=None)
def _primitive_element(f: ExtField) -> FieldElem:
    n = f.order - 1
    primes = [p for p, _ in f.group_factors()]
    for idx in range(1, f.order):
        g = f.element(idx)
        if g.is_zero():
            continue
        if all(g ** (n // p) != 1 for p in primes):
            return g
    raise FieldError("no primitive element")  # unreachable


@lru_cache(maxsize=None)
def _nonresidue(f: ExtField) -> FieldElem:
    half = (f.order - 1) // 2
    for idx in range(2, f.order):
        z = f.element(idx)
        if z ** half == -f.one():
            return z
    raise FieldError("no quadratic non-residue")  # unreachable


def _ext_sqrt(a: FieldElem) -> FieldElem | None:
    f = a.field
    if a.is_zero():
        return a
    if not a.is_square():
        return None
    q, s = f.order - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    m, c, t, r = s, f.nonresidue ** q, a**q, a ** ((q + 1) // 2)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2
            i += 1
        b = c ** (1 << (m - i - 1))
        m, c = i, b * b
        t, r = t * c, r * b
    return r


def degree_for_roots(r: int, ell: int) -> int:
    """Smallest k with r | ell^k - 1, or raise InsufficientDegree."""
    if r < 1 or gcd(r, ell) != 1:
        raise FieldError(f"r = {r} must be positive and prime to {ell}")
    for k in range(1, MAX_DEGREE + 1):
        if (ell**k - 1) % r == 0:
            return k
    raise InsufficientDegree(f"{r}-th roots of unity need an extension of F_{ell} beyond degree {MAX_DEGREE}")


def roots_of_unity(r: int, field: ExtField) -> dict[FieldElem, int]:
    """All x with x^r = 1, mapped to their exact multiplicative orders.

    When r does not divide |field^*| the roots are produced in the smallest
    supported extension that contains them.
    """
    if r < 1 or gcd(r, field.p) != 1:
        raise FieldError(f"r = {r} must be positive and prime to {field.p}")
    if (field.order - 1) % r:
        field = ext_field_build(field.p, degree_for_roots(r, field.p))
    h = field.primitive_element ** ((field.order - 1) // r)
    out = {}
    x = field.one()
    for j in range(r):
        out[x] = r // gcd(j, r)
        x = x * h
    return out
