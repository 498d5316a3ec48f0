"""Atkin-style constraints on Frobenius coefficients mod l from the projective order.

If the Frobenius matrix has projective order r (prime to l), its eigenvalues
satisfy lambda_i^2 = zeta_i q for r-th roots of unity zeta_i, and
lambda_i + q/lambda_i = +-sqrt(eta_i q) with eta_i = zeta_i + 1/zeta_i + 2.
The real Weil coefficients b_k are then the signed elementary symmetric
functions of those square roots. The g = 1 case t^2 = q (zeta + 1/zeta)^2
is the same statement with zeta replaced by zeta^2.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import comb, gcd
from typing import Iterable, Iterator, Sequence

from .classdist import OrderDistribution
from .ff import MAX_DEGREE, FieldElem, InsufficientDegree, degree_for_roots, ext_field_build, roots_of_unity
from .ntheory import lcm
from .symplectic import CharPolyCoeffs


class AtkinError(ValueError):
    pass


@dataclass(frozen=True)
class RealWeilCoeffs:
    """h(T) = T^g + b_1 T^(g-1) + ... + b_g; exact integers when ``ell`` is None."""

    g: int
    b: tuple[int, ...]
    q: int
    ell: int | None = None


def real_to_char(h: RealWeilCoeffs) -> CharPolyCoeffs:
    """Coefficients a_1..a_g of chi(T) = T^g h(T + q/T)."""
    g, q, ell = h.g, h.q, h.ell
    b = (1, *h.b)
    a = []
    for n in range(1, g + 1):
        k, odd = divmod(n, 2)
        acc = b[n]
        for i in range(1, k + 1):
            idx = 2 * (k - i) + odd
            acc += comb(g - 2 * (k - i) - odd, i) * q**i * b[idx]
        a.append(acc % ell if ell else acc)
    return CharPolyCoeffs(g, tuple(a), q % ell if ell else q, ell)


def char_to_real(chi: CharPolyCoeffs) -> RealWeilCoeffs:
    """Invert ``real_to_char`` (the system is unitriangular)."""
    g, q, ell = chi.g, chi.q, chi.ell
    b = [1]
    for n in range(1, g + 1):
        k, odd = divmod(n, 2)
        acc = chi.a[n - 1]
        for i in range(1, k + 1):
            acc -= comb(g - 2 * (k - i) - odd, i) * q**i * b[2 * (k - i) + odd]
        b.append(acc % ell if ell else acc)
    return RealWeilCoeffs(g, tuple(b[1:]), q, ell)


def power_sums(roots: Sequence, count: int) -> list:
    """S_k = -(sum of k-th powers of the roots), k = 1..count."""
    return [-sum(x**k for x in roots) for k in range(1, count + 1)]


def newton_coeffs(S: Sequence, count: int, ell: int | None = None) -> list:
    """Solve k a_k = S_k + S_(k-1) a_1 + ... + S_1 a_(k-1) for a_1..a_count.

    Works over the integers (exact division is checked), mod ``ell``, or over
    any field whose elements support arithmetic with ints.
    """
    if len(S) < count:
        raise AtkinError("not enough power sums")
    if ell is not None and ell <= count:
        raise AtkinError(f"non-invertible k: l = {ell} <= {count}")
    a: list = []
    for k in range(1, count + 1):
        rhs = S[k - 1] + sum(S[k - 1 - j] * a[j - 1] for j in range(1, k))
        if ell is not None:
            a.append(rhs * pow(k, -1, ell) % ell)
        elif isinstance(rhs, int):
            if rhs % k:
                raise AtkinError("power sums do not come from integer coefficients")
            a.append(rhs // k)
        elif isinstance(rhs, Fraction):
            a.append(rhs / k)
        else:
            a.append(rhs * pow(k, -1, rhs.field.p))
    return a


def strip_ell_part(r: int, ell: int) -> int:
    if r < 1:
        raise AtkinError("r must be positive")
    while r % ell == 0:
        r //= ell
    return r


def lcm_allowed(n: int, r: int) -> bool:
    return n == r or (r % 2 == 0 and n == r // 2)


@dataclass(frozen=True)
class ZetaTuple:
    zetas: tuple[FieldElem, ...]
    orders: tuple[int, ...]
    r: int


def _root_field(r: int, ell: int):
    """Field holding the r-th roots of unity and the square roots of eta * q."""
    k = degree_for_roots(r, ell)
    if 2 * k > MAX_DEGREE:
        raise InsufficientDegree(f"r = {r} over F_{ell} needs degree {2 * k}")
    return ext_field_build(ell, 2 * k)


def zeta_tuples(r: int, g: int, ell: int, field=None) -> Iterator[ZetaTuple]:
    """Ordered g-tuples of r-th roots of unity whose orders have lcm r (or r/2 for even r)."""
    if gcd(r, ell) != 1:
        raise AtkinError(f"strip the {ell}-part of r first")
    roots = roots_of_unity(r, field or _root_field(r, ell))
    items = sorted(roots.items(), key=lambda zo: zo[0].c)
    for combo in product(items, repeat=g):
        orders = tuple(o for _, o in combo)
        if lcm_allowed(lcm(*orders), r):
            yield ZetaTuple(tuple(z for z, _ in combo), orders, r)


@dataclass
class CandidateSet:
    ell: int
    q: int
    r: int
    g: int
    mode: str
    entries: dict[tuple[int, ...], list] = field(default_factory=dict)
    weights: dict[tuple[int, ...], Fraction] | None = None

    def tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.entries)

    def __contains__(self, a) -> bool:
        return tuple(a) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def _elementary(xs: Sequence[FieldElem], one: FieldElem) -> list[FieldElem]:
    e = [one] + [one * 0] * len(xs)
    for x in xs:
        for k in range(len(xs), 0, -1):
            e[k] = e[k] + e[k - 1] * x
    return e[1:]


_CACHE: dict = {}


def candidates(g: int, ell: int, q: int, r: int, mode: str = "linked") -> CandidateSet:
    """Coefficient tuples (a_1..a_g) mod l compatible with projective order r.

    ``linked`` keeps one sign per sqrt(eta_i q) for all b_k at once;
    ``squared`` uses the sign-free squared relations, each coefficient with
    its own sign choice (a superset of ``linked``). Both contain every
    realized tuple.
    """
    key = (g, ell, q % ell, r, mode)
    if key not in _CACHE:
        _CACHE[key] = _candidates(g, ell, q % ell, r, mode)
    return _CACHE[key]


def _eta_classes(r: int, ell: int, q: int):
    """Distinct eta = zeta + 1/zeta + 2 with the order of zeta and sqrt(eta q)."""
    K = _root_field(r, ell)
    h = K.primitive_element ** ((K.order - 1) // r)
    seen = {}
    for j in range(r):
        jj = min(j, (-j) % r)
        if jj in seen:
            continue
        z = h**jj
        eta = z + z.inverse() + 2
        sigma = (eta * q).sqrt()
        if sigma is None:  # every element of the index-2 subfield is a square in K
            raise AtkinError("missing square root")
        seen[jj] = (jj, r // gcd(jj, r), eta, sigma)
    return K, list(seen.values())


def _candidates(g: int, ell: int, q: int, r: int, mode: str) -> CandidateSet:
    if g not in (1, 2, 3):
        raise AtkinError("g must be 1, 2 or 3")
    if q % ell == 0:
        raise AtkinError("q must be nonzero mod l")
    if gcd(r, ell) != 1:
        raise AtkinError(f"r = {r} is divisible by l = {ell}; use strip_ell_part")
    if mode not in ("linked", "squared"):
        raise AtkinError(f"unknown mode {mode!r}")
    out = CandidateSet(ell, q, r, g, mode)
    K, classes = _eta_classes(r, ell, q)
    one = K.one()
    for combo in combinations_with_replacement(classes, g):
        if not lcm_allowed(lcm(*(c[1] for c in combo)), r):
            continue
        exps = tuple(c[0] for c in combo)
        sigmas = [c[3] for c in combo]
        if mode == "linked":
            for signs in product((1, -1), repeat=g):
                s = [x if e == 1 else -x for x, e in zip(sigmas, signs)]
                e = _elementary(s, one)
                b = [e[k] if k % 2 else -e[k] for k in range(g)]  # b_k = (-1)^k e_k
                if not all(x.in_base_field() for x in b):
                    continue
                a = real_to_char(RealWeilCoeffs(g, tuple(x.to_int() for x in b), q, ell)).a
                out.entries.setdefault(a, []).append((exps, signs))
        else:
            for a, wit in _squared_tuples(g, ell, q, combo, one):
                out.entries.setdefault(a, []).append((exps, wit))
    out.entries = dict(sorted(out.entries.items()))
    return out


def _base_sqrts(x: FieldElem) -> list[int]:
    from .ff import fp_sqrt

    if not x.in_base_field():
        return []
    return list(fp_sqrt(x.to_int(), x.field.p))


def _squared_tuples(g: int, ell: int, q: int, combo, one):
    """Tuples allowed by the squared relations with independent sign choices."""
    etas = [c[2] for c in combo]
    sigmas = [c[3] for c in combo]
    # a_1^2 = (sum +-sqrt(eta_i q))^2
    a1_squares = set()
    for signs in product((1, -1), repeat=g):
        s = sum((x if e == 1 else -x for x, e in zip(sigmas, signs)), one * 0)
        a1_squares.add(s * s)
    a1_vals = sorted({v for sq in a1_squares for v in _base_sqrts(sq)})
    if g == 1:
        for a1 in a1_vals:
            yield (a1,), ("sq",)
        return
    prod_eta = one
    for x in etas:
        prod_eta = prod_eta * x
    if g == 2:
        # (a_2 - 2q)^2 = eta_1 eta_2 q^2
        for w in _base_sqrts(prod_eta * q * q):
            for a1 in a1_vals:
                yield (a1, (2 * q + w) % ell), ("sq", w)
        return
    # g = 3: 2 a_2 = a_1^2 + 6q - q (eta_1 + eta_2 + eta_3); (a_3 - 2 a_1 q)^2 = eta_1 eta_2 eta_3 q^3
    tr = sum(etas, one * 0) * q
    if not tr.in_base_field():
        return
    inv2 = pow(2, -1, ell)
    for a1 in a1_vals:
        a2 = (a1 * a1 + 6 * q - tr.to_int()) * inv2 % ell
        for w in _base_sqrts(prod_eta * q**3):
            yield (a1, a2, (2 * a1 * q + w) % ell), ("sq", w)


def weighted_candidates(ell: int, q: int, dist: OrderDistribution, orders: Iterable[int] | None = None,
                        g: int = 2, mode: str = "linked") -> list[tuple]:
    """Sorted list of (a_1, ..., a_g, weight), heaviest first, lexicographic ties.

    Each order r in scope spreads P(r) evenly over candidates(g, l, q, r_0).
    """
    scope = sorted(dist.probs) if orders is None else sorted(set(orders))
    weights: dict[tuple[int, ...], Fraction] = {}
    for r in scope:
        p = dist[r]
        if p == 0:
            continue
        cs = candidates(g, ell, q, strip_ell_part(r, ell), mode)
        if not len(cs):
            continue
        share = p / len(cs)
        for a in cs.entries:
            weights[a] = weights.get(a, Fraction(0)) + share
    return [(*a, w) for a, w in sorted(weights.items(), key=lambda aw: (-aw[1], aw[0]))]


def write_candidates_csv(rows: Iterable[tuple], fh, ell: int, q: int, r, g: int, header: dict | None = None) -> None:
    if header:
        for k, v in header.items():
            fh.write(f"# {k}: {v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["ell", "q", "r", *(f"a{i}" for i in range(1, g + 1)), "weight"])
    for row in rows:
        *a, wt = row
        w.writerow([ell, q, r, *a, repr(float(wt)) if wt is not None else ""])
