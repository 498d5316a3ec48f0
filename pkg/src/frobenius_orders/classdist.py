"""Order distribution of Sp4(F_l) viewed in PSp4(F_l).

The closed form walks the conjugacy-class families of Sp4(F_l) (labels
A, B, C, C', D after Srinivasan), each with its centralizer order (so a class
has probability 1/centralizer) and its projective-order formula. Families with
parameters are expanded over one canonical representative per class.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .ntheory import divisors, euler_phi, gcd, is_prime
from .symplectic import census_statistics, group_order, projective_orders, random_symplectic_batch

METHODS = ("closed", "census", "mc")


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class OrderDistribution:
    ell: int
    probs: dict[int, Fraction]
    method: str
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if any(p <= 0 for p in self.probs.values()):
            raise DistributionError("probabilities must be positive")

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def support(self) -> list[int]:
        return sorted(self.probs)

    def __getitem__(self, r: int) -> Fraction:
        return self.probs.get(r, Fraction(0))


@dataclass(frozen=True)
class MomentReport:
    mean: float
    variance: float
    source: str


def twisted_order(s: int) -> int:
    """Projective order when a block of order s sits next to a -1 eigenspace."""
    if s % 2:
        return 2 * s
    if s % 4 == 2:
        return s // 2
    return s


@dataclass(frozen=True)
class ClassFamilyRow:
    """One row of the class table.

    ``expand(l)`` maps projective order -> number of classes of that order;
    ``centralizer(l)`` is the common centralizer order of those classes.
    ``expected_count(l)`` is the number of parameter values (None for
    parameter-free rows, where ``copies`` classes are present).
    """

    label: str
    arity: int
    centralizer: Callable[[int], int]
    expand: Callable[[int], Counter]
    expected_count: Callable[[int], int] | None = None

    def probability(self, ell: int) -> Fraction:
        return Fraction(1, self.centralizer(ell))

    def class_count(self, ell: int) -> int:
        return sum(self.expand(ell).values())


def _fixed(order: Callable[[int], int], copies: int) -> Callable[[int], Counter]:
    return lambda l: Counter({order(l): copies})


def _single(rng: Callable[[int], range], order: Callable[[int, int], int], copies: int = 1):
    def expand(l: int) -> Counter:
        out: Counter = Counter()
        for i in rng(l):
            out[order(l, i)] += copies
        return out

    return expand


def _grid(i_range, j_range, order_fn, lower_triangle: bool):
    """Two-parameter family evaluated on a numpy grid (order_fn is vectorised)."""

    def expand(l: int) -> Counter:
        i = np.arange(*i_range(l), dtype=np.int64)
        j = np.arange(*j_range(l), dtype=np.int64)
        if len(i) == 0 or len(j) == 0:
            return Counter()
        I, J = np.meshgrid(i, j, indexing="ij")
        if lower_triangle:
            keep = J < I
            I, J = I[keep], J[keep]
        orders = order_fn(l, I.ravel(), J.ravel())
        vals, counts = np.unique(orders, return_counts=True)
        return Counter(dict(zip(vals.tolist(), counts.tolist())))

    return expand


def _b1_expand(l: int) -> Counter:
    # exponents i of a generator of mu_(l^2+1), i not 0 or N; orbits {i, il, -i, -il}
    N = (l * l + 1) // 2
    out: Counter = Counter()
    for d in divisors(N):
        if d == N:
            continue  # the two excluded exponents
        out[N // d] += 2 * euler_phi(N // d) // 4
    return out


def _b2_expand(l: int) -> Counter:
    # exponents i mod l^2-1 with (l-1)i, (l+1)i both nonzero; orbits of size 4
    N = (l * l - 1) // 2
    raw: Counter = Counter()
    for d in divisors(N):
        raw[N // d] += 2 * euler_phi(N // d)
    M = l * l - 1
    excluded = {k * (l + 1) % M for k in range(l - 1)} | {k * (l - 1) % M for k in range(l + 1)}
    for i in excluded:
        raw[N // gcd(i, N)] -= 1
    out = Counter()
    for r, c in raw.items():
        if c:
            if c % 4:
                raise DistributionError("B2 orbit count not divisible by 4")
            out[r] = c // 4
    return out


def _b3_order(l, i, j):
    n = l - 1
    return n // np.gcd(np.gcd(n, i + j), np.abs(i - j))


def _b4_order(l, i, j):
    n = l + 1
    return n // np.gcd(np.gcd(n, i + j), np.abs(i - j))


def _b5_order(l, i, j):
    n = l * l - 1
    return n // np.gcd(np.gcd(n, i * (l - 1) + j * (l + 1)), 2 * i * (l - 1))


def _half(n_of_l):
    return lambda l: range(1, n_of_l(l) // 2 + 1)


def _class_rows() -> list[ClassFamilyRow]:
    up = lambda l: range(1, (l - 1) // 2 + 1)  # reps of mu_(l+1) \ {+-1} mod inversion
    dn = lambda l: range(1, (l - 3) // 2 + 1)  # reps of mu_(l-1) \ {+-1} mod inversion
    rows = [
        ClassFamilyRow("A1,A1'", 0, lambda l: l**4 * (l**2 - 1) * (l**4 - 1), _fixed(lambda l: 1, 2)),
        ClassFamilyRow("A21,A21',A22,A22'", 0, lambda l: 2 * l**4 * (l**2 - 1), _fixed(lambda l: l, 4)),
        ClassFamilyRow("A31,A31'", 0, lambda l: 2 * l**3 * (l - 1), _fixed(lambda l: l, 2)),
        ClassFamilyRow("A32,A32'", 0, lambda l: 2 * l**3 * (l + 1), _fixed(lambda l: l, 2)),
        ClassFamilyRow("A41,A41',A42,A42'", 0, lambda l: 2 * l**2, _fixed(lambda l: l, 4)),
        ClassFamilyRow("B1", 1, lambda l: l**2 + 1, _b1_expand, lambda l: (l**2 - 1) // 4),
        ClassFamilyRow("B2", 1, lambda l: l**2 - 1, _b2_expand, lambda l: (l - 1) ** 2 // 4),
        ClassFamilyRow("B3", 2, lambda l: (l - 1) ** 2,
                       _grid(lambda l: (1, (l - 3) // 2 + 1), lambda l: (1, (l - 3) // 2 + 1), _b3_order, True),
                       lambda l: (l - 3) * (l - 5) // 8),
        ClassFamilyRow("B4", 2, lambda l: (l + 1) ** 2,
                       _grid(lambda l: (1, (l - 1) // 2 + 1), lambda l: (1, (l - 1) // 2 + 1), _b4_order, True),
                       lambda l: (l - 1) * (l - 3) // 8),
        ClassFamilyRow("B5", 2, lambda l: l**2 - 1,
                       _grid(lambda l: (1, (l - 1) // 2 + 1), lambda l: (1, (l - 3) // 2 + 1), _b5_order, False),
                       lambda l: (l - 1) * (l - 3) // 4),
        ClassFamilyRow("B6", 1, lambda l: l * (l + 1) * (l**2 - 1),
                       _single(up, lambda l, i: ((l + 1) // 2) // gcd(i, (l + 1) // 2)), lambda l: (l - 1) // 2),
        ClassFamilyRow("B7", 1, lambda l: l * (l + 1),
                       _single(up, lambda l, i: (l * (l + 1) // 2) // gcd(i, l * (l + 1) // 2)), lambda l: (l - 1) // 2),
        ClassFamilyRow("B8", 1, lambda l: l * (l - 1) * (l**2 - 1),
                       _single(dn, lambda l, i: ((l - 1) // 2) // gcd(i, (l - 1) // 2)), lambda l: (l - 3) // 2),
        ClassFamilyRow("B9", 1, lambda l: l * (l - 1),
                       _single(dn, lambda l, i: (l * (l - 1) // 2) // gcd(i, l * (l - 1) // 2)), lambda l: (l - 3) // 2),
        ClassFamilyRow("C1", 1, lambda l: l * (l + 1) * (l**2 - 1),
                       _single(up, lambda l, i: (l + 1) // gcd(i, l + 1)), lambda l: (l - 1) // 2),
        ClassFamilyRow("C1'", 1, lambda l: l * (l + 1) * (l**2 - 1),
                       _single(up, lambda l, i: twisted_order((l + 1) // gcd(i, l + 1))), lambda l: (l - 1) // 2),
        ClassFamilyRow("C21,C22", 1, lambda l: 2 * l * (l + 1),
                       _single(up, lambda l, i: l * (l + 1) // gcd(i, l * (l + 1)), 2), lambda l: l - 1),
        ClassFamilyRow("C21',C22'", 1, lambda l: 2 * l * (l + 1),
                       _single(up, lambda l, i: twisted_order(l * (l + 1) // gcd(i, l * (l + 1))), 2), lambda l: l - 1),
        ClassFamilyRow("C3", 1, lambda l: l * (l - 1) * (l**2 - 1),
                       _single(dn, lambda l, i: (l - 1) // gcd(i, l - 1)), lambda l: (l - 3) // 2),
        ClassFamilyRow("C3'", 1, lambda l: l * (l - 1) * (l**2 - 1),
                       _single(dn, lambda l, i: twisted_order((l - 1) // gcd(i, l - 1))), lambda l: (l - 3) // 2),
        ClassFamilyRow("C41,C42", 1, lambda l: 2 * l * (l - 1),
                       _single(dn, lambda l, i: l * (l - 1) // gcd(i, l * (l - 1)), 2), lambda l: l - 3),
        ClassFamilyRow("C41',C42'", 1, lambda l: 2 * l * (l - 1),
                       _single(dn, lambda l, i: twisted_order(l * (l - 1) // gcd(i, l * (l - 1))), 2), lambda l: l - 3),
        ClassFamilyRow("D1", 0, lambda l: l**2 * (l**2 - 1) ** 2, _fixed(lambda l: 2, 1)),
        ClassFamilyRow("D21..D24", 0, lambda l: 2 * l**2 * (l**2 - 1), _fixed(lambda l: 2 * l, 4)),
        ClassFamilyRow("D31..D34", 0, lambda l: 4 * l**2, _fixed(lambda l: 2 * l, 4)),
    ]
    return rows


CLASS_ROWS = _class_rows()


# -- distributions -------------------------------------------------------------

def closed_form_counts(ell: int) -> Counter:
    """Projective order -> number of elements of Sp4(F_l), from the class table."""
    total = group_order(2, ell)[0]
    counts: Counter = Counter()
    for row in CLASS_ROWS:
        c = row.centralizer(ell)
        if total % c:
            raise DistributionError(f"centralizer of {row.label} does not divide |Sp4|")
        for r, n in row.expand(ell).items():
            counts[r] += n * (total // c)
    if sum(counts.values()) != total:
        raise DistributionError(f"class sizes sum to {sum(counts.values())}, expected {total}")
    return +counts


def _from_counts(ell: int, counts: Counter, total: int, method: str, **kw) -> OrderDistribution:
    return OrderDistribution(ell, {r: Fraction(n, total) for r, n in sorted(counts.items())}, method, **kw)


def _census_counts(ell: int, big: bool, jobs: int) -> Counter:
    stats = census_statistics(ell, 2, big, with_charpoly=False, jobs=jobs)
    return Counter({k[0]: v for k, v in stats.items()})


def order_distribution(ell: int, method: str = "closed", *, samples: int | None = None,
                       seed: int | None = None, allow_small: bool = False, big: bool = False,
                       jobs: int = 1) -> OrderDistribution:
    """Distribution of projective orders of a uniform element of Sp4(F_l).

    ``closed`` evaluates the class table (l >= 7, or l in {3, 5} with
    ``allow_small``; at l = 3 the table's unipotent orders are known to be
    wrong), ``census`` enumerates the group, ``mc`` samples it.
    """
    if not is_prime(ell) or ell < 3:
        raise DistributionError(f"l must be an odd prime, got {ell}")
    total = group_order(2, ell)[0]
    if method == "closed":
        if ell < 7 and not allow_small:
            raise DistributionError(f"closed form is only guaranteed for l >= 7 (got {ell}); pass allow_small")
        return _from_counts(ell, closed_form_counts(ell), total, "closed")
    if method == "census":
        if ell not in (3, 5) and not (ell == 7 and big):
            raise DistributionError(f"census unsupported for l = {ell}" + (" without the long-running flag" if ell == 7 else ""))
        return _from_counts(ell, _census_counts(ell, big, jobs), total, "census")
    if method == "mc":
        if not samples or samples < 1 or seed is None:
            raise DistributionError("Monte Carlo needs a positive sample count and a seed")
        rng = np.random.default_rng(seed)
        counts: Counter = Counter()
        chunk = 1 << 17
        for lo in range(0, samples, chunk):
            n = min(chunk, samples - lo)
            r = projective_orders(random_symplectic_batch(ell, 2, n, rng), ell)
            vals, cts = np.unique(r, return_counts=True)
            counts.update(dict(zip(vals.tolist(), cts.tolist())))
        return _from_counts(ell, counts, samples, "mc", samples=samples, seed=seed)
    raise DistributionError(f"unknown method {method!r}; expected one of {METHODS}")


def closed_form_sweep(primes: Iterable[int], jobs: int = 1) -> dict[int, OrderDistribution]:
    primes = list(primes)
    if jobs <= 1:
        return {l: order_distribution(l, "closed") for l in primes}
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(jobs) as ex:
        return dict(zip(primes, ex.map(order_distribution, primes)))


def total_variation(d1: OrderDistribution, d2: OrderDistribution) -> Fraction:
    keys = set(d1.probs) | set(d2.probs)
    return sum((abs(d1[r] - d2[r]) for r in keys), Fraction(0)) / 2


# -- moments and modes ---------------------------------------------------------

def mu4_numerator(ell: int) -> int:
    return 2 * ell**5 + 15 * ell**4 - 47 * ell**3 + ell**2 + 65 * ell - 40


def psi(ell: int) -> int:
    l = ell
    return (6 * l**10 - 27 * l**9 + 420 * l**8 - 1443 * l**7 + 828 * l**6 + 3375 * l**5
            - 3804 * l**4 - 825 * l**3 + 2550 * l**2 - 1080 * l)


def moments_closed_form(ell: int) -> MomentReport:
    """Asymptotic mean and variance of the projective order (double precision).

    Polynomials are evaluated exactly in integers before the float division.
    """
    if ell < 3:
        raise DistributionError("l must be >= 3")
    log_l = math.log(ell)
    denom = ell * (ell * ell - 1)
    mu = math.pi**2 / 48 * (mu4_numerator(ell) / denom) / log_l
    delta = (math.pi / 24) ** 2 * (psi(ell) / denom**2) / log_l - mu * mu
    return MomentReport(mu, delta, "closed-form")


def moments_exact(dist: OrderDistribution) -> MomentReport:
    mean = sum((r * p for r, p in dist.probs.items()), Fraction(0))
    second = sum((r * r * p for r, p in dist.probs.items()), Fraction(0))
    return MomentReport(float(mean), float(second - mean * mean), "exact")


def exact_mean(dist: OrderDistribution) -> Fraction:
    return sum((r * p for r, p in dist.probs.items()), Fraction(0))


def modes(dist: OrderDistribution, k: int = 2) -> list[int]:
    """The k most probable orders; ties go to the smaller order."""
    if not dist.probs:
        raise DistributionError("empty distribution")
    return [r for r, _ in sorted(dist.probs.items(), key=lambda rp: (-rp[1], rp[0]))[:k]]


# -- averaged bucket table and heatmap ----------------------------------------

@dataclass(frozen=True)
class Bucket:
    label: str
    exact: Callable[[int], Fraction] | None = None
    lo: Callable[[int], Fraction] | None = None  # open unless lo_closed
    hi: Callable[[int], Fraction] | None = None  # closed
    lo_closed: bool = False

    def contains_range(self, ell: int, r: int) -> bool:
        lo, hi = self.lo(ell), self.hi(ell)
        return (lo <= r if self.lo_closed else lo < r) and r <= hi


F = Fraction
EXACT_BUCKETS = [
    Bucket("(l-1)/2", exact=lambda l: F(l - 1, 2)),
    Bucket("(l+1)/2", exact=lambda l: F(l + 1, 2)),
    Bucket("l-1", exact=lambda l: F(l - 1)),
    Bucket("l+1", exact=lambda l: F(l + 1)),
    Bucket("(l^2-1)/4", exact=lambda l: F(l * l - 1, 4)),
    Bucket("(l^2+1)/4", exact=lambda l: F(l * l + 1, 4)),
    Bucket("(l^2-1)/2", exact=lambda l: F(l * l - 1, 2)),
    Bucket("(l^2+1)/2", exact=lambda l: F(l * l + 1, 2)),
]
# order 1 sits in the first range so the buckets partition the support
RANGE_BUCKETS = [
    Bucket("other in [1,l]", lo=lambda l: F(1), hi=lambda l: F(l), lo_closed=True),
    Bucket("other in (l,2l]", lo=lambda l: F(l), hi=lambda l: F(2 * l)),
    Bucket("other in (2l,(l^2+1)/2]", lo=lambda l: F(2 * l), hi=lambda l: F(l * l + 1, 2)),
    Bucket("((l^2+1)/2,l(l+1)]", lo=lambda l: F(l * l + 1, 2), hi=lambda l: F(l * (l + 1))),
]
# column order of the published table
BUCKET_COLUMNS = ["(l-1)/2", "(l+1)/2", "l-1", "other in [1,l]", "l+1", "other in (l,2l]",
                  "(l^2-1)/4", "(l^2+1)/4", "(l^2-1)/2", "(l^2+1)/2", "other in (2l,(l^2+1)/2]",
                  "((l^2+1)/2,l(l+1)]"]
REFERENCE_PCT = dict(zip(BUCKET_COLUMNS, [4.0, 4.0, 5.0, 6.3, 5.0, 1.5, 6.6, 5.0, 13.4, 15.7, 29.7, 3.8]))


def bucket_of(ell: int, r: int) -> str:
    for b in EXACT_BUCKETS:
        if r == b.exact(ell):
            return b.label
    for b in RANGE_BUCKETS:
        if b.contains_range(ell, r):
            return b.label
    raise DistributionError(f"order {r} falls outside every bucket for l = {ell}")


def bucket_masses(dist: OrderDistribution) -> dict[str, Fraction]:
    out = {c: Fraction(0) for c in BUCKET_COLUMNS}
    for r, p in dist.probs.items():
        out[bucket_of(dist.ell, r)] += p
    return out


@dataclass
class BucketTable:
    primes: list[int]
    per_prime: dict[int, dict[str, Fraction]] = field(repr=False)
    average_pct: dict[str, float]


def bucket_table(primes: Iterable[int], dists: dict[int, OrderDistribution] | None = None,
                     jobs: int = 1) -> BucketTable:
    """Bucket percentages per prime, averaged over the primes (closed form, l >= 7)."""
    primes = list(primes)
    if not primes:
        raise DistributionError("need at least one prime")
    if dists is None:
        if any(l < 7 for l in primes):
            raise DistributionError("bucket table uses the closed form, which needs l >= 7")
        dists = closed_form_sweep(primes, jobs)
    per = {l: bucket_masses(dists[l]) for l in primes}
    avg = {c: float(sum(per[l][c] for l in primes) / len(primes) * 100) for c in BUCKET_COLUMNS}
    return BucketTable(primes, per, avg)


def normalized_support_bound(ell: int) -> Fraction:
    """Largest possible ord / l^2: the top order is l(l+1)."""
    return Fraction(ell * (ell + 1), ell * ell)


def heatmap_data(primes: Iterable[int], bins: int,
                 dists: dict[int, OrderDistribution] | None = None) -> list[tuple[int, Fraction, Fraction, Fraction]]:
    """Rows (l, bin_lo, bin_hi, mass) for ord / l^2 binned on [0, 1 + 1/min(l)].

    Bins are half-open [lo, hi) except the last, which is closed.
    """
    primes = list(primes)
    if bins < 1:
        raise DistributionError("need at least one bin")
    if dists is None:
        dists = closed_form_sweep(primes)
    top = max(normalized_support_bound(l) for l in primes)
    width = top / bins
    rows = []
    for l in primes:
        mass = [Fraction(0)] * bins
        for r, p in dists[l].probs.items():
            x = Fraction(r, l * l)
            mass[min(int(x / width), bins - 1)] += p
        rows.extend((l, width * b, width * (b + 1), mass[b]) for b in range(bins))
    return rows


# -- CSV -----------------------------------------------------------------------

def write_distribution_csv(dist: OrderDistribution, fh, header: dict | None = None) -> None:
    _comment_header(fh, header)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["order", "probability_num", "probability_den", "probability_float"])
    for r, p in sorted(dist.probs.items()):
        w.writerow([r, p.numerator, p.denominator, repr(float(p))])


def read_distribution_csv(fh, ell: int, method: str = "closed") -> OrderDistribution:
    rows = csv.DictReader(line for line in fh if not line.startswith("#"))
    return OrderDistribution(ell, {int(r["order"]): Fraction(int(r["probability_num"]), int(r["probability_den"]))
                                   for r in rows}, method)


def write_heatmap_csv(rows, fh, header: dict | None = None) -> None:
    _comment_header(fh, header)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["ell", "bin_lo", "bin_hi", "mass"])
    for l, lo, hi, m in rows:
        w.writerow([l, repr(float(lo)), repr(float(hi)), repr(float(m))])


def write_bucket_csv(table: BucketTable, fh, header: dict | None = None) -> None:
    _comment_header(fh, header)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["row", *BUCKET_COLUMNS])
    w.writerow(["average_pct", *(f"{table.average_pct[c]:.4f}" for c in BUCKET_COLUMNS)])
    w.writerow(["reference_pct", *(REFERENCE_PCT[c] for c in BUCKET_COLUMNS)])
    for l in table.primes:
        w.writerow([l, *(repr(float(table.per_prime[l][c] * 100)) for c in BUCKET_COLUMNS)])


def _comment_header(fh, header: dict | None) -> None:
    if header:
        for k, v in header.items():
            fh.write(f"# {k}: {v}\n")
