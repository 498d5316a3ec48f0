"""Symplectic similitude matrices over F_l.

Matrices are plain integer numpy arrays with entries in [0, l). The form is
Omega = [[0, I], [-I, 0]], and a symplectic basis (e_1..e_g, f_1..f_g) with
<e_i, f_j> = delta_ij is stored column-wise, so that M^T Omega M = Omega
(equivalently M Omega M^T = Omega).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np

from .ntheory import factorize, is_prime, lcm


class SymplecticError(ValueError):
    pass


@dataclass(frozen=True)
class CharPolyCoeffs:
    """T^2g + a_1 T^(2g-1) + ... + a_g T^g + a_(g-1) q T^(g-1) + ... + q^g.

    ``ell`` is None when the coefficients are exact integers.
    """

    g: int
    a: tuple[int, ...]
    q: int
    ell: int | None = None

    def coefficients(self) -> list[int]:
        """All 2g+1 coefficients, leading first."""
        head = [1, *self.a]
        tail = [head[j] * self.q ** (self.g - j) for j in range(self.g - 1, -1, -1)]
        out = head + tail
        return [c % self.ell for c in out] if self.ell else out

    def reduce(self, ell: int) -> CharPolyCoeffs:
        return CharPolyCoeffs(self.g, tuple(x % ell for x in self.a), self.q % ell, ell)


def _check_ell(ell: int) -> None:
    if ell < 3 or not is_prime(ell):
        raise SymplecticError(f"l must be an odd prime, got {ell}")


def standard_form(g: int, ell: int | None = None) -> np.ndarray:
    om = np.zeros((2 * g, 2 * g), dtype=np.int64)
    om[:g, g:] = np.eye(g, dtype=np.int64)
    om[g:, :g] = -np.eye(g, dtype=np.int64)
    return om % ell if ell else om


def group_order(g: int, ell: int) -> tuple[int, int]:
    """(|Sp_2g(F_l)|, |PSp_2g(F_l)|)."""
    _check_ell(ell)
    sp = ell ** (g * g)
    for i in range(1, g + 1):
        sp *= ell ** (2 * i) - 1
    return sp, sp // 2  # gcd(2, l - 1) = 2 for odd l


def similitude_check(M, ell: int) -> int | None:
    """The multiplier c with M Omega M^T = c Omega, or None."""
    M = np.asarray(M, dtype=np.int64) % ell
    n = M.shape[0]
    if M.shape != (n, n) or n % 2:
        return None
    g = n // 2
    om = standard_form(g, ell)
    lhs = M @ om @ M.T % ell
    c = int(lhs[0, g])
    if c == 0 or not np.array_equal(lhs, c * om % ell):
        return None
    return c


def _berkowitz(M: list[list[int]], ell: int) -> list[int]:
    """Characteristic polynomial det(T I - M), leading coefficient first (division-free)."""
    n = len(M)
    vect = [1, -M[0][0] % ell]
    for r in range(1, n):
        R = M[r][:r]  # row r, columns < r
        C = [M[i][r] for i in range(r)]
        A = [row[:r] for row in M[:r]]
        # Toeplitz column: 1, -a_rr, -R C, -R A C, ..., -R A^(r-1) C
        col = [1, -M[r][r] % ell]
        v = C
        for _ in range(r):
            col.append(-sum(x * y for x, y in zip(R, v)) % ell)
            v = [sum(A[i][j] * v[j] for j in range(r)) % ell for i in range(r)]
        new = []
        for i in range(r + 2):
            s = 0
            for j in range(min(i, len(vect) - 1) + 1):
                if i - j < len(col):
                    s += col[i - j] * vect[j]
            new.append(s % ell)
        vect = new
    return vect


def char_poly(M, ell: int) -> CharPolyCoeffs:
    """Reciprocal characteristic polynomial of a similitude matrix."""
    q = similitude_check(M, ell)
    if q is None:
        raise SymplecticError("matrix is not a symplectic similitude")
    rows = (np.asarray(M, dtype=np.int64) % ell).tolist()
    coeffs = _berkowitz(rows, ell)
    g = len(rows) // 2
    for j in range(g + 1):
        if coeffs[2 * g - j] != coeffs[j] * pow(q, g - j, ell) % ell:
            raise SymplecticError("characteristic polynomial is not reciprocal")
    return CharPolyCoeffs(g, tuple(coeffs[1 : g + 1]), q, ell)


def char_poly_batch(Ms: np.ndarray, ell: int) -> np.ndarray:
    """Columns a_1..a_g for a stack of 2g x 2g matrices (no similitude check)."""
    Ms = np.asarray(Ms, dtype=np.int64)
    n = Ms.shape[-1]
    g = n // 2
    out = np.empty((Ms.shape[0], g), dtype=np.int64)
    for k in range(1, g + 1):
        e = np.zeros(Ms.shape[0], dtype=np.int64)
        for idx in combinations(range(n), k):
            sub = Ms[:, idx][:, :, idx]
            e += _det_small(sub, ell)
        out[:, k - 1] = (-1) ** k * e % ell
    return out


def _det_small(A: np.ndarray, ell: int) -> np.ndarray:
    k = A.shape[-1]
    if k == 1:
        return A[:, 0, 0] % ell
    if k == 2:
        return (A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]) % ell
    if k == 3:
        return (
            A[:, 0, 0] * ((A[:, 1, 1] * A[:, 2, 2] - A[:, 1, 2] * A[:, 2, 1]) % ell)
            - A[:, 0, 1] * ((A[:, 1, 0] * A[:, 2, 2] - A[:, 1, 2] * A[:, 2, 0]) % ell)
            + A[:, 0, 2] * ((A[:, 1, 0] * A[:, 2, 1] - A[:, 1, 1] * A[:, 2, 0]) % ell)
        ) % ell
    raise SymplecticError("principal minors above 3x3 are not needed")


# -- projective orders --------------------------------------------------------

def eigenvalue_degrees(g: int) -> list[int]:
    """Possible degrees of irreducible factors of a 2g x 2g reciprocal char poly.

    Odd-degree factors other than x -+ c pair up with their reciprocal, so odd
    k needs k <= g.
    """
    return [k for k in range(1, 2 * g + 1) if k % 2 == 0 or k <= g]


def order_exponent(ell: int, g: int) -> int:
    """A multiple of every projective order in GSp_2g(F_l).

    The unipotent part of a 2g x 2g matrix has order l^u with l^u >= 2g
    (for g = 2 that is l, except l = 3 where regular unipotents have order 9).
    """
    u = 1
    while ell**u < 2 * g:
        u += 1
    return ell**u * lcm(*(ell**k - 1 for k in eigenvalue_degrees(g)))


def _dtype_for(ell: int, n: int):
    return np.int32 if n * (ell - 1) ** 2 < 2**31 else np.int64


def batch_matmul(A: np.ndarray, B: np.ndarray, ell: int) -> np.ndarray:
    C = np.matmul(A, B)
    C %= ell
    return C


def batch_pow(Ms: np.ndarray, e: int, ell: int) -> np.ndarray:
    n = Ms.shape[-1]
    result = np.broadcast_to(np.eye(n, dtype=Ms.dtype), Ms.shape).copy()
    base = Ms
    while e:
        if e & 1:
            result = batch_matmul(result, base, ell)
        e >>= 1
        if e:
            base = batch_matmul(base, base, ell)
    return result


def is_scalar_batch(Ms: np.ndarray) -> np.ndarray:
    n = Ms.shape[-1]
    d = Ms[:, 0, 0]
    diag_ok = np.all(Ms[:, np.arange(n), np.arange(n)] == d[:, None], axis=1)
    off = Ms.copy()
    off[:, np.arange(n), np.arange(n)] = 0
    return diag_ok & ~off.reshape(Ms.shape[0], -1).any(axis=1)


def projective_orders(Ms, ell: int, chunk: int = 1 << 18) -> np.ndarray:
    """Least r >= 1 with M^r scalar, for each matrix of a stack.

    Works prime by prime over the factorization of ``order_exponent``: the
    image of M^(E / p^e) in PGL has order p^(v_p(r)), found by repeated p-th
    powers with the scalar test as the identity predicate.
    """
    Ms = np.asarray(Ms)
    N, n = Ms.shape[0], Ms.shape[-1]
    out = np.empty(N, dtype=np.int64)
    E = order_exponent(ell, n // 2)
    factors = factorize(E)
    dt = _dtype_for(ell, n)
    for lo in range(0, N, chunk):
        X = (Ms[lo : lo + chunk] % ell).astype(dt)
        r = np.ones(X.shape[0], dtype=np.int64)
        for p, e in factors:
            Y = batch_pow(X, E // p**e, ell)
            part = np.ones(X.shape[0], dtype=np.int64)
            found = is_scalar_batch(Y)
            for j in range(1, e + 1):
                if found.all():
                    break
                Y = batch_pow(Y, p, ell)
                hit = ~found & is_scalar_batch(Y)
                part[hit] = p**j
                found |= hit
            if not found.all():
                raise SymplecticError("M^E is not scalar; input is not a similitude")
            r *= part
        out[lo : lo + chunk] = r
    return out


def projective_order(M, ell: int) -> int:
    return int(projective_orders(np.asarray(M)[None], ell)[0])


# -- uniform sampling ---------------------------------------------------------

def _pair(x: np.ndarray, y: np.ndarray, g: int, ell: int) -> np.ndarray:
    """Row-wise <x, y> = x^T Omega y."""
    return ((x[:, :g] * y[:, g:]).sum(axis=1) - (x[:, g:] * y[:, :g]).sum(axis=1)) % ell


def _project(w: np.ndarray, pairs: list[tuple[np.ndarray, np.ndarray]], g: int, ell: int) -> np.ndarray:
    """Symplectic projection onto the complement of the given hyperbolic pairs."""
    out = w.copy()
    for e, f in pairs:
        out -= _pair(w, f, g, ell)[:, None] * e
        out += _pair(w, e, g, ell)[:, None] * f
    return out % ell


def random_symplectic_batch(ell: int, g: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent matrices, each exactly uniform on Sp_2g(F_l).

    Builds a random symplectic basis one hyperbolic pair at a time: e_i is
    uniform among nonzero vectors of the current complement W, f_i uniform
    among vectors of W with <e_i, f_i> = 1.
    """
    _check_ell(ell)
    dim = 2 * g
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for _ in range(g):
        e = _project(rng.integers(0, ell, (n, dim)), pairs, g, ell)
        bad = ~e.any(axis=1)
        while bad.any():
            e[bad] = _project(rng.integers(0, ell, (int(bad.sum()), dim)), [(a[bad], b[bad]) for a, b in pairs], g, ell)
            bad = ~e.any(axis=1)
        # u in W with <e, u> = 1, from the first projected basis vector pairing nontrivially
        u = np.zeros((n, dim), dtype=np.int64)
        todo = np.ones(n, dtype=bool)
        for k in range(dim):
            basis = np.zeros((n, dim), dtype=np.int64)
            basis[:, k] = 1
            pk = _project(basis, pairs, g, ell)
            ck = _pair(e, pk, g, ell)
            take = todo & (ck != 0)
            if take.any():
                inv = np.array([pow(int(c), -1, ell) for c in ck[take]], dtype=np.int64)
                u[take] = pk[take] * inv[:, None] % ell
                todo &= ~take
        v = _project(rng.integers(0, ell, (n, dim)), pairs, g, ell)
        f = (v + ((1 - _pair(e, v, g, ell)) % ell)[:, None] * u) % ell
        pairs.append((e, f))
    cols = [e for e, _ in pairs] + [f for _, f in pairs]
    return np.stack(cols, axis=2)


def random_symplectic(ell: int, g: int, rng: np.random.Generator) -> np.ndarray:
    return random_symplectic_batch(ell, g, 1, rng)[0]


# -- exhaustive census --------------------------------------------------------

CENSUS_FREE = {1: None, 2: (3, 5)}  # g -> primes allowed without the long-running flag


def _check_census(ell: int, g: int, big: bool) -> None:
    _check_ell(ell)
    if g == 1:
        return
    if g != 2:
        raise SymplecticError("census is available for g = 1 and g = 2 only")
    if ell not in CENSUS_FREE[2] and not (big and ell == 7):
        hint = " (l = 7 needs the long-running flag)" if ell == 7 else ""
        raise SymplecticError(f"Sp4 census unsupported for l = {ell}{hint}")


def _all_vectors(dim: int, ell: int) -> np.ndarray:
    grids = np.indices((ell,) * dim).reshape(dim, -1).T
    return grids.astype(np.int64)


def census_batches(ell: int, g: int = 2, big: bool = False, first: range | None = None) -> Iterator[np.ndarray]:
    """All of Sp_2g(F_l), one array per first basis vector e_1.

    ``first`` selects a slice of the nonzero vectors (index order of the
    lexicographic vector list) so disjoint slices can be processed separately.
    """
    _check_census(ell, g, big)
    dim = 2 * g
    V = _all_vectors(dim, ell)
    om = standard_form(g, ell)
    P = (V @ om % ell @ V.T % ell).astype(np.int8)
    nonzero = np.arange(1, V.shape[0])
    if first is not None:
        nonzero = nonzero[first]
    for a in nonzero:
        f1s = np.nonzero(P[a] == 1)[0]
        if g == 1:
            yield np.stack([np.broadcast_to(V[a], (len(f1s), dim)), V[f1s]], axis=2)
            continue
        blocks = []
        for b in f1s:
            W = np.nonzero((P[a] == 0) & (P[b] == 0))[0]
            i, j = np.nonzero(P[np.ix_(W, W)] == 1)
            e2, f2 = V[W[i]], V[W[j]]
            m = len(i)
            blocks.append(np.stack([np.broadcast_to(V[a], (m, dim)), e2, np.broadcast_to(V[b], (m, dim)), f2], axis=2))
        yield np.concatenate(blocks)


def census(ell: int, g: int = 2, big: bool = False) -> Iterator[np.ndarray]:
    """Stream every element of Sp_2g(F_l) exactly once."""
    for batch in census_batches(ell, g, big):
        yield from batch


def census_statistics(ell: int, g: int = 2, big: bool = False, first: range | None = None,
                      with_charpoly: bool = True, batch_size: int = 1 << 18, jobs: int = 1) -> Counter:
    """Counter keyed by (projective order, a_1, ..., a_g) over the census.

    With ``with_charpoly=False`` the keys are (projective order,). ``jobs``
    splits the first basis vectors over worker processes.
    """
    if jobs > 1 and first is None:
        _check_census(ell, g, big)
        n_first = ell ** (2 * g) - 1
        step = -(-n_first // jobs)
        parts = [(ell, g, big, range(lo, min(lo + step, n_first)), with_charpoly)
                 for lo in range(0, n_first, step)]
        from concurrent.futures import ProcessPoolExecutor

        total: Counter = Counter()
        with ProcessPoolExecutor(jobs) as ex:
            for part in ex.map(_census_part, parts):
                total.update(part)
        return total
    stats: Counter = Counter()
    pending: list[np.ndarray] = []
    size = 0

    def flush():
        nonlocal pending, size
        if not pending:
            return
        Ms = np.concatenate(pending)
        pending, size = [], 0
        r = projective_orders(Ms, ell)
        keys = r[:, None]
        if with_charpoly:
            keys = np.concatenate([keys, char_poly_batch(Ms, ell)], axis=1)
        uniq, counts = np.unique(keys, axis=0, return_counts=True)
        for k, c in zip(uniq.tolist(), counts.tolist()):
            stats[tuple(k)] += c

    for batch in census_batches(ell, g, big, first):
        pending.append(batch)
        size += len(batch)
        if size >= batch_size:
            flush()
    flush()
    return stats


def _census_part(args) -> Counter:
    ell, g, big, first, with_charpoly = args
    return census_statistics(ell, g, big, first=first, with_charpoly=with_charpoly)
