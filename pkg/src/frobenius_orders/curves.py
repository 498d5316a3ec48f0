"""Genus-2 curves y^2 = f(x), f monic of degree 5, with naive point counts.

Sign convention: chi(T) = T^4 + a1 T^3 + a2 T^2 + p a1 T + p^2 has roots
lambda_i, and #C(F_{p^k}) = p^k + 1 - sum lambda_i^k. So n1 = p + 1 + a1 and
n2 = p^2 + 1 - (a1^2 - 2 a2).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from math import isqrt
from typing import Iterable

import numpy as np

from .ff import _poly_gcd, ext_field_build
from .ntheory import is_prime
from .symplectic import CharPolyCoeffs

MAX_P = 50_000
MAX_RETRIES = 1000


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class HyperellipticCurveG2:
    p: int
    f: tuple[int, ...]  # (f0, f1, f2, f3, f4); the x^5 coefficient is 1

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise CurveError(f"p must be an odd prime, got {self.p}")
        if self.p > MAX_P:
            raise CurveError(f"p = {self.p} is beyond naive counting range (<= {MAX_P})")
        if len(self.f) != 5:
            raise CurveError("need the five low coefficients f0..f4")
        object.__setattr__(self, "f", tuple(c % self.p for c in self.f))
        if not is_squarefree(self.poly(), self.p):
            raise CurveError("f is not square-free")

    def poly(self) -> list[int]:
        """Coefficients low -> high including the leading 1."""
        return [*self.f, 1]


def is_squarefree(f: list[int], p: int) -> bool:
    df = [(i * c) % p for i, c in enumerate(f)][1:]
    return len(_poly_gcd(f, df, p)) == 1


def random_curve(p: int, rng: np.random.Generator) -> HyperellipticCurveG2:
    if p <= 5:
        raise CurveError("random curves need p > 5")
    for _ in range(MAX_RETRIES):
        f = [int(c) for c in rng.integers(0, p, size=5)]
        if is_squarefree([*f, 1], p):
            return HyperellipticCurveG2(p, tuple(f))
    raise CurveError(f"no square-free quintic after {MAX_RETRIES} draws")


def _legendre_table(p: int) -> np.ndarray:
    """tab[z] = number of y in F_p with y^2 = z."""
    tab = np.zeros(p, dtype=np.int64)
    ys = np.arange(p, dtype=np.int64)
    np.add.at(tab, ys * ys % p, 1)
    return tab


def count_points(curve: HyperellipticCurveG2, degree: int = 1) -> int:
    """#C(F_{p^degree}) including the single point at infinity."""
    p, f = curve.p, curve.poly()
    tab = _legendre_table(p)
    if degree == 1:
        x = np.arange(p, dtype=np.int64)
        acc = np.ones(p, dtype=np.int64)
        for c in reversed(f[:-1]):
            acc = (acc * x + c) % p
        return 1 + int(tab[acc].sum())
    if degree != 2:
        raise CurveError("extension degree must be 1 or 2")
    # F_{p^2} = F_p[t]/(t^2 + m1 t + m0); z is a square there iff its norm is one in F_p
    m0, m1, _ = ext_field_build(p, 2).modulus
    idx = np.arange(p * p, dtype=np.int64)
    u, v = idx % p, idx // p
    au, av = np.ones_like(u), np.zeros_like(v)
    for c in reversed(f[:-1]):
        # (au + av t)(u + v t) with t^2 = -m1 t - m0
        w = av * v % p
        au, av = (au * u - m0 * w + c) % p, (au * v + av * u - m1 * w) % p
    norm = (au * au - m1 * au % p * av + m0 * av % p * av) % p
    nz = norm != 0
    squares = tab[norm] > 0
    # y^2 = z has 1 solution for z = 0, 2 for a nonzero square, 0 otherwise
    zero = ~nz & (au == 0) & (av == 0)
    return 1 + int(zero.sum()) + 2 * int((nz & squares).sum())


@dataclass(frozen=True)
class PointCounts:
    n1: int
    n2: int


def weil_ok(counts: PointCounts, p: int) -> bool:
    # |n1 - (p+1)| <= 4 sqrt(p), |n2 - (p^2+1)| <= 4p
    d1 = counts.n1 - p - 1
    return d1 * d1 <= 16 * p and abs(counts.n2 - p * p - 1) <= 4 * p


def point_counts(curve: HyperellipticCurveG2) -> PointCounts:
    return PointCounts(count_points(curve, 1), count_points(curve, 2))


def frobenius_charpoly(counts: PointCounts, p: int) -> CharPolyCoeffs:
    if not weil_ok(counts, p):
        raise CurveError(f"point counts {counts} violate the Weil bounds at p = {p}")
    a1 = counts.n1 - p - 1
    num = a1 * a1 - (p * p + 1 - counts.n2)
    if num % 2:
        raise CurveError("non-integral a2: counting bug")
    a2 = num // 2
    if 1 + a1 + a2 + a1 * p + p * p <= 0:
        raise CurveError("non-positive Jacobian order")
    return CharPolyCoeffs(2, (a1, a2), p)


def jacobian_order(chi: CharPolyCoeffs) -> int:
    a1, a2 = chi.a
    return 1 + a1 + a2 + a1 * chi.q + chi.q**2


def weil_radius(p: int) -> int:
    return isqrt(16 * p)


CORPUS_FIELDS = ["p", "f4", "f3", "f2", "f1", "f0", "n1", "n2", "a1", "a2"]


def write_corpus(rows: Iterable[tuple[HyperellipticCurveG2, PointCounts, CharPolyCoeffs]], fh,
                 header: dict | None = None) -> None:
    for k, v in (header or {}).items():
        fh.write(f"# {k}: {v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CORPUS_FIELDS)
    for c, n, chi in rows:
        f0, f1, f2, f3, f4 = c.f
        w.writerow([c.p, f4, f3, f2, f1, f0, n.n1, n.n2, *chi.a])


def read_corpus(fh) -> list[tuple[HyperellipticCurveG2, PointCounts, CharPolyCoeffs]]:
    out = []
    for row in csv.DictReader(line for line in fh if not line.startswith("#")):
        p = int(row["p"])
        c = HyperellipticCurveG2(p, tuple(int(row[k]) for k in ("f0", "f1", "f2", "f3", "f4")))
        out.append((c, PointCounts(int(row["n1"]), int(row["n2"])), CharPolyCoeffs(2, (int(row["a1"]), int(row["a2"])), p)))
    return out
