"""Small integer helpers: primality, factorization, divisors, CRT."""
from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``n >= 1`` by trial division, as ((p, e), ...)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factor_power_minus_one(base: int, k: int) -> tuple[tuple[int, int], ...]:
    """Factor ``base**k - 1`` through its algebraic splitting (keeps trial division short)."""
    acc: dict[int, int] = {}

    def add(m: int) -> None:
        for p, e in factorize(m):
            acc[p] = acc.get(p, 0) + e

    def split(j: int) -> None:
        # base**j - 1 = (base**(j/2) - 1)(base**(j/2) + 1)
        if j % 2 == 0:
            split(j // 2)
            add(base ** (j // 2) + 1)
        else:
            add(base**j - 1)

    split(k)
    return tuple(sorted(acc.items()))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def first_primes(count: int, start: int = 2) -> list[int]:
    """The first ``count`` primes that are >= start."""
    out = []
    n = max(start, 2)
    while len(out) < count:
        if is_prime(n):
            out.append(n)
        n += 1
    return out


def primes_between(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def crt(residues: list[int], moduli: list[int]) -> tuple[int, int]:
    """Combine x = r_i (mod m_i) for pairwise coprime moduli; returns (x, M)."""
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        if gcd(m, n) != 1:
            raise ValueError("moduli must be pairwise coprime")
        t = (r - x) * pow(m, -1, n) % n
        x += m * t
        m *= n
    return x % m, m


def centered(x: int, m: int) -> int:
    """Representative of x mod m in (-m/2, m/2]."""
    x %= m
    return x - m if x > m // 2 else x


def isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None
