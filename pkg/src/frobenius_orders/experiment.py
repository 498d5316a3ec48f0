"""Attempts needed to hit the true (a1, a2) mod l: lexicographic scan versus a
probability-sorted candidate list built from small projective orders."""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import isqrt
from typing import Sequence

import numpy as np

from .atkin import weighted_candidates
from .classdist import order_distribution
from .curves import HyperellipticCurveG2, PointCounts, frobenius_charpoly, point_counts, random_curve
from .ntheory import centered, crt, first_primes, is_prime
from .symplectic import CharPolyCoeffs

REFERENCE_BAND = (1.0, 12.0)  # reported reduction range, percent


class ExperimentError(ValueError):
    pass


def eligible_ells(p: int, ells: Sequence[int]) -> list[int]:
    """The l from ``ells`` with l >= 5, l prime, l != p and p = 1 mod l."""
    return sorted({l for l in ells if l >= 5 and is_prime(l) and l != p and p % l == 1})


def default_scope(ell: int) -> tuple[int, ...]:
    return ((ell - 1) // 2, (ell + 1) // 2)


@dataclass
class ExperimentConfig:
    p: int
    ells: list[int]
    n_curves: int
    seed: int
    orders: dict[int, tuple[int, ...]] | None = None  # None: default scope; an empty tuple means all orders
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if not is_prime(self.p) or self.p <= 5:
            raise ExperimentError(f"p must be a prime > 5, got {self.p}")
        bad = [l for l in self.ells if l not in eligible_ells(self.p, [l])]
        if bad:
            raise ExperimentError(f"l values {bad} violate l >= 5, l != p, p = 1 mod l")
        if not self.ells:
            raise ExperimentError("no eligible l")
        if self.n_curves < 1:
            raise ExperimentError("need at least one curve")

    def scope(self, ell: int) -> tuple[int, ...] | None:
        if self.orders is None:
            return default_scope(ell)
        s = self.orders.get(ell, default_scope(ell))
        return s or None


@dataclass
class AttemptStats:
    p: int
    per_ell: dict[int, dict] = field(default_factory=dict)
    records: list[dict] = field(default_factory=list)


def classical_attempts(pair: tuple[int, int], ell: int) -> int:
    a1, a2 = (x % ell for x in pair)
    return a1 * ell + a2 + 1


def list_attempts(pair: tuple[int, int], L: Sequence[tuple], ell: int) -> int:
    """Position of ``pair`` in L, else |L| plus its rank in the lexicographic complement."""
    pair = tuple(x % ell for x in pair)
    keys = [tuple(row[:2]) for row in L]
    for i, k in enumerate(keys):
        if k == pair:
            return i + 1
    before = sum(1 for k in set(keys) if k < pair)
    return len(keys) + classical_attempts(pair, ell) - before


def build_list(ell: int, q: int, scope: tuple[int, ...] | None) -> list[tuple]:
    dist = order_distribution(ell, "closed", allow_small=True)
    return weighted_candidates(ell, q, dist, scope)


def curve_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def _one_curve(args) -> tuple[HyperellipticCurveG2, PointCounts, CharPolyCoeffs]:
    p, ss = args
    c = random_curve(p, np.random.default_rng(ss))
    n = point_counts(c)
    return c, n, frobenius_charpoly(n, p)


def generate_curves(p: int, n: int, seed: int, jobs: int = 1) -> list[tuple]:
    tasks = [(p, s) for s in curve_seeds(seed, n)]
    if jobs <= 1:
        return [_one_curve(t) for t in tasks]
    with ProcessPoolExecutor(jobs) as ex:
        return list(ex.map(_one_curve, tasks, chunksize=8))


def run_experiment(config: ExperimentConfig, curves: list[tuple] | None = None) -> AttemptStats:
    """``curves`` injects precomputed (curve, counts, chi) triples in place of random ones."""
    p = config.p
    if curves is None:
        curves = generate_curves(p, config.n_curves, config.seed, config.jobs)
    stats = AttemptStats(p)
    lists = {l: build_list(l, p % l, config.scope(l)) for l in config.ells}
    for i, (c, n, chi) in enumerate(curves):
        for l in config.ells:
            pair = (chi.a[0] % l, chi.a[1] % l)
            stats.records.append({
                "curve": i, "f": list(c.f), "n1": n.n1, "n2": n.n2, "a1": chi.a[0], "a2": chi.a[1],
                "ell": l, "pair": list(pair),
                "classical": classical_attempts(pair, l), "list": list_attempts(pair, lists[l], l),
            })
    for l in config.ells:
        rows = [r for r in stats.records if r["ell"] == l]
        mc = sum(r["classical"] for r in rows) / len(rows)
        ml = sum(r["list"] for r in rows) / len(rows)
        stats.per_ell[l] = {
            "n_curves": len(rows), "list_size": len(lists[l]),
            "scope": list(config.scope(l) or []) or "all",
            "mean_classical": mc, "mean_list": ml, "reduction_pct": 100 * (1 - ml / mc),
        }
    return stats


def write_results_json(config: ExperimentConfig, stats: AttemptStats, fh) -> None:
    cfg = asdict(config)
    cfg["orders"] = None if config.orders is None else {str(k): list(v) for k, v in config.orders.items()}
    doc = {
        "config": cfg,
        "classical_order": "lexicographic over (a1, a2), representatives 0..l-1",
        "reference_band_pct": list(REFERENCE_BAND),
        "per_ell": {str(l): s for l, s in stats.per_ell.items()},
        "records": stats.records,
    }
    json.dump(doc, fh, indent=1, sort_keys=True)
    fh.write("\n")


def write_summary_csv(stats: AttemptStats, fh, header: dict | None = None) -> None:
    for k, v in (header or {}).items():
        fh.write(f"# {k}: {v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["p", "ell", "n_curves", "mean_classical", "mean_list", "reduction_pct"])
    for l, s in sorted(stats.per_ell.items()):
        w.writerow([stats.p, l, s["n_curves"], repr(s["mean_classical"]), repr(s["mean_list"]), repr(s["reduction_pct"])])


# -- CRT reconstruction of chi from its residues ---------------------------------

def crt_moduli(p: int) -> list[int]:
    """Smallest primes != p whose product exceeds the width of the a2 range."""
    # |a1| <= 4 sqrt(p) and |a2| <= 6p, so residues mod M > 12p + 1 pin both down
    bound = 12 * p + 1
    out, m = [], 1
    for l in first_primes(64):
        if l == p:
            continue
        out.append(l)
        m *= l
        if m > bound:
            return out
    raise ExperimentError("ran out of primes")  # unreachable for p <= 50000


def crt_reconstruct(residues: dict[int, tuple[int, int]], p: int) -> CharPolyCoeffs:
    moduli = sorted(residues)
    a1, M = crt([residues[l][0] for l in moduli], moduli)
    a2, _ = crt([residues[l][1] for l in moduli], moduli)
    if M <= 12 * p + 1:
        raise ExperimentError(f"moduli product {M} cannot separate the Weil range at p = {p}")
    a1, a2 = centered(a1, M), centered(a2, M)
    if a1 * a1 > 16 * p or abs(a2) > 6 * p:
        raise ExperimentError("reconstruction outside the Weil range")
    return CharPolyCoeffs(2, (a1, a2), p)


def crt_demo(p: int, seed: int) -> dict:
    c, n, chi = _one_curve((p, curve_seeds(seed, 1)[0]))
    moduli = crt_moduli(p)
    residues = {l: (chi.a[0] % l, chi.a[1] % l) for l in moduli}
    rec = crt_reconstruct(residues, p)
    return {"p": p, "f": list(c.f), "n1": n.n1, "n2": n.n2, "true": list(chi.a),
            "moduli": moduli, "residues": {str(l): list(v) for l, v in residues.items()},
            "reconstructed": list(rec.a), "match": rec.a == chi.a}


def weil_a1_bound(p: int) -> int:
    return isqrt(16 * p)
