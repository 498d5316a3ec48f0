"""Batch command-line front end. Every output file starts with '# key: value'
lines echoing the effective configuration, so a run can be repeated exactly."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import Counter

import numpy as np

from . import __version__
from .atkin import candidates, strip_ell_part, weighted_candidates, write_candidates_csv
from .classdist import (METHODS, closed_form_sweep, heatmap_data, moments_closed_form,
                        moments_exact, modes, order_distribution, bucket_table, write_distribution_csv,
                        write_heatmap_csv, write_bucket_csv)
from .curves import HyperellipticCurveG2, frobenius_charpoly, point_counts, random_curve, write_corpus
from .experiment import (ExperimentConfig, crt_demo, eligible_ells, run_experiment, write_results_json,
                         write_summary_csv)
from .ntheory import first_primes, is_prime, primes_between
from .symplectic import census_statistics, group_order, projective_orders, random_symplectic_batch, char_poly_batch

SWEEP_LIMIT = 500  # larger prime sweeps need --big


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _orders(text: str):
    return "all" if text == "all" else _int_list(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frobenius-orders", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help, *flags):
        p = sub.add_parser(name, help=help)
        for f in flags:
            FLAGS[f](p)
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    cmd("dist", "order distribution of Sp4(F_l)", "ell", "method", "samples", "seed", "big", "jobs")
    cmd("moments", "asymptotic versus exact mean and variance", "ell", "primes", "jobs", "big")
    cmd("modes", "two most probable orders", "ell", "primes", "jobs", "big")
    cmd("table3", "bucket percentages averaged over primes", "primes", "jobs", "big")
    cmd("heatmap", "order / l^2 histogram per prime", "primes", "bins", "jobs", "big")
    cmd("census", "exhaustive enumeration of Sp_2g(F_l)", "ell", "g", "big", "jobs")
    cmd("sample", "uniform random elements of Sp_2g(F_l)", "ell", "g", "samples", "seed")
    cmd("candidates", "coefficient candidates mod l for a projective order", "g", "ell", "q", "r", "orders")
    p = cmd("count-curve", "point counts and Frobenius polynomial of a genus-2 curve", "p", "seed")
    p.add_argument("--f", type=_int_list, help="f4,f3,f2,f1,f0 of y^2 = x^5 + f4 x^4 + ... + f0")
    cmd("experiment", "attempt counts: lexicographic scan vs sorted list", "p", "ell", "curves", "seed", "orders", "jobs")
    cmd("crt-demo", "rebuild (a1, a2) from residues by CRT", "p", "seed")
    return ap


FLAGS = {
    "ell": lambda p: p.add_argument("--ell", type=_int_list, help="prime l (comma list where several are allowed)"),
    "g": lambda p: p.add_argument("--g", type=int, default=2),
    "q": lambda p: p.add_argument("--q", type=int, default=1),
    "r": lambda p: p.add_argument("--r", type=int),
    "method": lambda p: p.add_argument("--method", choices=METHODS, default="closed"),
    "samples": lambda p: p.add_argument("--samples", type=int),
    "seed": lambda p: p.add_argument("--seed", type=int),
    "primes": lambda p: p.add_argument("--primes", help="count N (first N primes) or a comma list"),
    "bins": lambda p: p.add_argument("--bins", type=int, default=20),
    "p": lambda p: p.add_argument("--p", type=int),
    "curves": lambda p: p.add_argument("--curves", type=int, default=200),
    "orders": lambda p: p.add_argument("--orders", type=_orders, help="comma list of orders, or 'all'"),
    "jobs": lambda p: p.add_argument("--jobs", type=int, default=1),
    "big": lambda p: p.add_argument("--big", action="store_true", help="allow long-running modes"),
}


def _header(args) -> dict:
    h = {"tool": "frobenius-orders", "version": __version__, "command": args.command}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "out", "jobs"):
            continue
        h[k] = ",".join(map(str, v)) if isinstance(v, list) else v
    return h


def _one_ell(args) -> int:
    if not args.ell or len(args.ell) != 1:
        raise UsageError("--ell takes exactly one prime here")
    l = args.ell[0]
    if not is_prime(l) or l < 3:
        raise UsageError(f"--ell must be an odd prime, got {l}")
    return l


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for this command (no implicit entropy)")
    return args.seed


def _prime_list(args, min_ell: int = 3) -> list[int]:
    if getattr(args, "ell", None):
        primes = args.ell
    elif args.primes:
        if "," in args.primes:
            primes = _int_list(args.primes)
        else:
            primes = first_primes(int(args.primes))
    else:
        raise UsageError("give --primes or --ell")
    if any(not is_prime(l) for l in primes):
        raise UsageError("--primes contains a non-prime")
    if len(primes) > SWEEP_LIMIT and not args.big:
        raise UsageError(f"sweeps over more than {SWEEP_LIMIT} primes need --big")
    primes = [l for l in primes if l >= min_ell]
    if not primes:
        raise UsageError(f"no primes >= {min_ell} selected")
    return primes


def _dist(args, out, header):
    l = _one_ell(args)
    if args.method == "mc":
        _need_seed(args)
        if not args.samples:
            raise UsageError("--samples is required for --method mc")
    d = order_distribution(l, args.method, samples=args.samples, seed=args.seed, allow_small=True,
                           big=args.big, jobs=args.jobs)
    if args.method == "closed" and l == 3:
        header["note"] = "the class table mislabels unipotent orders at l = 3; use --method census"
    header["total"] = str(d.total())
    write_distribution_csv(d, out, header)


def _moments(args, out, header):
    primes = _prime_list(args, 7)
    dists = closed_form_sweep(primes, args.jobs)
    _comment(out, header)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["ell", "mu4", "delta4", "exact_mean", "exact_variance", "rel_dev_mean"])
    for l in primes:
        a, e = moments_closed_form(l), moments_exact(dists[l])
        w.writerow([l, repr(a.mean), repr(a.variance), repr(e.mean), repr(e.variance), repr(abs(e.mean / a.mean - 1))])


def _modes(args, out, header):
    primes = _prime_list(args, 7)
    dists = closed_form_sweep(primes, args.jobs)
    _comment(out, header)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["ell", "mode1", "mode2", "expected1", "expected2", "holds"])
    for l in primes:
        m1, m2 = modes(dists[l], 2)
        e1, e2 = (l * l + 1) // 2, (l * l - 1) // 2
        w.writerow([l, m1, m2, e1, e2, int((m1, m2) == (e1, e2))])


def _bucket_cmd(args, out, header):
    primes = _prime_list(args, 7)
    header["primes_used"] = f"{len(primes)} ({primes[0]}..{primes[-1]}); primes below 7 dropped"
    write_bucket_csv(bucket_table(primes, jobs=args.jobs), out, header)


def _heatmap(args, out, header):
    primes = _prime_list(args, 7)
    write_heatmap_csv(heatmap_data(primes, args.bins, closed_form_sweep(primes, args.jobs)), out, header)


def _census(args, out, header):
    l = _one_ell(args)
    stats = census_statistics(l, args.g, args.big, jobs=args.jobs)
    total = sum(stats.values())
    header["total"] = total
    header["group_order"] = group_order(args.g, l)[0]
    _write_stats(stats, args.g, out, header)
    print(f"census Sp{2 * args.g}(F_{l}): {total} matrices", file=sys.stderr)


def _sample(args, out, header):
    l = _one_ell(args)
    seed = _need_seed(args)
    if not args.samples or args.samples < 1:
        raise UsageError("--samples must be positive")
    rng = np.random.default_rng(seed)
    stats: Counter = Counter()
    for lo in range(0, args.samples, 1 << 16):
        Ms = random_symplectic_batch(l, args.g, min(1 << 16, args.samples - lo), rng)
        keys = np.concatenate([projective_orders(Ms, l)[:, None], char_poly_batch(Ms, l)], axis=1)
        u, c = np.unique(keys, axis=0, return_counts=True)
        for k, n in zip(u.tolist(), c.tolist()):
            stats[tuple(k)] += n
    header["total"] = args.samples
    _write_stats(stats, args.g, out, header)


def _write_stats(stats, g, out, header):
    _comment(out, header)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["order", *(f"a{i}" for i in range(1, g + 1)), "count"])
    for k in sorted(stats):
        w.writerow([*k, stats[k]])


def _candidates(args, out, header):
    l = _one_ell(args)
    if args.q % l == 0:
        raise UsageError("--q must be nonzero mod l")
    if args.r is not None and args.orders is not None:
        raise UsageError("give --r or --orders, not both")
    if args.r is not None:
        r0 = strip_ell_part(args.r, l)
        header["r0"] = r0
        cs = candidates(args.g, l, args.q, r0)
        rows = [(*a, None) for a in cs.tuples()]
        write_candidates_csv(rows, out, l, args.q, args.r, args.g, header)
        return
    if args.orders is None:
        raise UsageError("give --r or --orders")
    if args.g != 2 or args.q % l != 1:
        raise UsageError("weighted lists use the Sp4 distribution: --g 2 and q = 1 mod l")
    dist = order_distribution(l, "closed", allow_small=True)
    scope = None if args.orders == "all" else args.orders
    rows = weighted_candidates(l, args.q, dist, scope)
    write_candidates_csv(rows, out, l, args.q, "all" if scope is None else "+".join(map(str, scope)), 2, header)


def _count_curve(args, out, header):
    if args.p is None:
        raise UsageError("--p is required")
    if args.f is not None:
        if len(args.f) != 5:
            raise UsageError("--f takes five coefficients f4,f3,f2,f1,f0")
        curve = HyperellipticCurveG2(args.p, tuple(reversed(args.f)))
    else:
        curve = random_curve(args.p, np.random.default_rng(_need_seed(args)))
    n = point_counts(curve)
    write_corpus([(curve, n, frobenius_charpoly(n, args.p))], out, header)


def _experiment(args, out, header):
    if args.p is None:
        raise UsageError("--p is required")
    seed = _need_seed(args)
    ells = eligible_ells(args.p, args.ell if args.ell else primes_between(5, 100))
    if args.ell:
        dropped = sorted(set(args.ell) - set(ells))
        if dropped:
            header["dropped_ell"] = ",".join(map(str, dropped))
    if not ells:
        raise UsageError("no l >= 5 with p = 1 mod l among the requested values")
    orders = None
    if args.orders == "all":
        orders = {l: () for l in ells}
    elif args.orders:
        orders = {l: tuple(args.orders) for l in ells}
    cfg = ExperimentConfig(args.p, ells, args.curves, seed, orders, args.out, args.jobs)
    stats = run_experiment(cfg)
    write_summary_csv(stats, out, header)
    if args.out:
        with open(_json_path(args.out), "w") as fh:
            write_results_json(cfg, stats, fh)


def _json_path(path: str) -> str:
    return (path[:-4] if path.endswith(".csv") else path) + ".json"


def _crt_demo(args, out, header):
    if args.p is None:
        raise UsageError("--p is required")
    doc = crt_demo(args.p, _need_seed(args))
    json.dump({"config": header, **doc}, out, indent=1, sort_keys=True)
    out.write("\n")


def _comment(out, header):
    for k, v in header.items():
        out.write(f"# {k}: {v}\n")


HANDLERS = {
    "dist": _dist, "moments": _moments, "modes": _modes, "table3": _bucket_cmd, "heatmap": _heatmap,
    "census": _census, "sample": _sample, "candidates": _candidates, "count-curve": _count_curve,
    "experiment": _experiment, "crt-demo": _crt_demo,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    header = _header(args)
    buf = io.StringIO()
    try:
        HANDLERS[args.command](args, buf, header)
    except UsageError as e:
        parser.error(str(e))
    except ValueError as e:  # domain errors from the library
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
