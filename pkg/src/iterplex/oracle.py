"""Exhaustive enumeration of transversals and (partial) multiplexes at desk scale.

Everything here is brute force by design: it is the ground truth that the
Markov-chain counts in :mod:`iterplex.chain` are checked against.

Indices of the D-dimensional MDS code ``M(G^[D-1])`` are D-tuples
``(x0, ..., x_{D-1})`` with ``left_fold == 1``.  A multiplex is stored as the
lexicographically sorted tuple of its elements, so multiset equality is tuple
equality.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .algebra import CayleyTable
from .errors import (
    ArgumentOutOfRange,
    BadMultisetPermutation,
    FeasibilityExceeded,
    InvalidInput,
)

DEFAULT_WORK_LIMIT = 10**7

Index = tuple[int, ...]


def multinomial_lambda(n: int, k: int) -> int:
    """Number of permutations of the multiset with each of n symbols k times."""
    return math.factorial(k * n) // math.factorial(k) ** n


def estimate_work(kind: str, n: int, dim: int, k: int = 1, l: int | None = None) -> int:
    """Rough leaf count of a search; the single gate for every oracle entry point.

    ``kind`` is ``"transversals"`` (``dim`` is the hypercube dimension d),
    ``"multiplexes"`` or ``"partial"`` (``dim`` is the MDS dimension D).
    """
    if kind == "transversals":
        return math.factorial(n) ** max(dim - 1, 0)
    if kind == "multiplexes":
        return multinomial_lambda(n, k) ** max(dim - 2, 0)
    if kind == "partial":
        l = n if l is None else l
        per_col = math.comb(n, l) * math.factorial(k * l) // math.factorial(k) ** l
        return math.comb(n, l) * per_col ** max(dim - 2, 0)
    raise ValueError(f"unknown search kind {kind!r}")


def _guard(kind: str, n: int, dim: int, k: int = 1, l: int | None = None, limit: int | None = DEFAULT_WORK_LIMIT):
    if limit is None:
        return
    est = estimate_work(kind, n, dim, k, l)
    if est > limit:
        raise FeasibilityExceeded(f"{kind} n={n} dim={dim} k={k}" + (f" l={l}" if l is not None else ""), est, limit)


# --------------------------------------------------------------------------
# transversals


def count_transversals(table: CayleyTable, d: int, limit: int | None = DEFAULT_WORK_LIMIT) -> int:
    """Number of transversals of the d-dimensional Cayley hypercube of ``G^[d]``.

    Rows are indexed by the symbol x0 they carry; the search fills x1..xd
    with per-coordinate bitmasks and keeps the running left-fold, so the last
    coordinate is the unique entry completing the fold to 1.
    """
    if d < 1:
        raise ArgumentOutOfRange("d must be >= 1")
    _guard("transversals", table.order, d, limit=limit)
    n = table.order
    mul = table._mul
    ldiv = table._ldiv
    used = [0] * (d + 1)

    def row(i: int) -> int:
        if i == n:
            return 1
        return coord(i, 1, i)

    def coord(i: int, j: int, acc: int) -> int:
        if j == d:
            x = ldiv[acc][0]
            bit = 1 << x
            if used[j] & bit:
                return 0
            used[j] |= bit
            total = row(i + 1)
            used[j] ^= bit
            return total
        total = 0
        mask = used[j]
        mrow = mul[acc]
        for x in range(n):
            bit = 1 << x
            if mask & bit:
                continue
            used[j] = mask | bit
            total += coord(i, j + 1, mrow[x])
        used[j] = mask
        return total

    return row(0)


# --------------------------------------------------------------------------
# multiplexes


@dataclass(frozen=True)
class Multiplex:
    n: int
    k: int
    D: int
    elements: tuple[Index, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(tuple(e) for e in self.elements)))

    def multiplicities(self) -> Counter:
        return Counter(self.elements)

    @property
    def is_plex(self) -> bool:
        return len(set(self.elements)) == len(self.elements)

    def weight(self) -> int:
        """Number of distinct row orders of the kn x D table: ``(kn)! / prod m_r!``."""
        w = math.factorial(len(self.elements))
        for m in self.multiplicities().values():
            w //= math.factorial(m)
        return w

    def to_json(self) -> list[list[int]]:
        return [list(e) for e in self.elements]


@dataclass(frozen=True)
class PartialMultiplex(Multiplex):
    l: int = 0


def check_multiplex(table: CayleyTable, elements: Sequence[Index], k: int, partial: bool = False) -> bool:
    """Re-validate the hyperplane condition independently of any search.

    Every element must lie in the support; in each coordinate every symbol
    occurs exactly k times (or, for partial multiplexes, k times or not at all).
    """
    if not elements:
        return partial
    D = len(elements[0])
    n = table.order
    for e in elements:
        if len(e) != D or not table.mds_member(e):
            return False
    if not partial and len(elements) != k * n:
        return False
    if len(elements) % k:
        return False
    for j in range(D):
        c = Counter(e[j] for e in elements)
        if any(v != k for v in c.values()):
            return False
        if not all(1 <= s <= n for s in c):
            return False
        if not partial and len(c) != n:
            return False
    return True


def _search(
    table: CayleyTable, D: int, k: int, first: Sequence[int], l: int, distinct: bool
) -> Iterator[tuple[Index, ...]]:
    """Yield canonical sorted element tuples (0-based) of multiplexes on ``first``.

    ``first`` is the set of x0 symbols (0-based) the multiplex uses; in every
    other coordinate each symbol is used at most k times and at most l
    distinct symbols appear, which together force "exactly k or zero".
    Rows inside one x0-group are kept nondecreasing (strictly increasing for
    sets), so every multiset is produced once.
    """
    n = table.order
    mul = table._mul
    ldiv = table._ldiv
    free = D - 2
    cands: dict[int, list[Index]] = {}
    for a in first:
        rows = []
        for mid in itertools.product(range(n), repeat=free):
            acc = a
            for x in mid:
                acc = mul[acc][x]
            rows.append((a, *mid, ldiv[acc][0]))
        cands[a] = rows
    counts = [[0] * n for _ in range(D)]
    nonzero = [0] * D
    chosen: list[Index] = []
    groups = list(first)

    def place(gi: int, slot: int, start: int):
        if gi == len(groups):
            yield tuple(chosen)
            return
        if slot == k:
            yield from place(gi + 1, 0, 0)
            return
        rows = cands[groups[gi]]
        for idx in range(start, len(rows)):
            r = rows[idx]
            ok = True
            for j in range(1, D):
                c = counts[j][r[j]]
                if c >= k or (c == 0 and nonzero[j] >= l):
                    ok = False
                    break
            if not ok:
                continue
            for j in range(1, D):
                if counts[j][r[j]] == 0:
                    nonzero[j] += 1
                counts[j][r[j]] += 1
            chosen.append(r)
            yield from place(gi, slot + 1, idx + 1 if distinct else idx)
            chosen.pop()
            for j in range(1, D):
                counts[j][r[j]] -= 1
                if counts[j][r[j]] == 0:
                    nonzero[j] -= 1

    yield from place(0, 0, 0)


def _mode_distinct(mode: str) -> bool:
    if mode not in ("sets", "multisets"):
        raise InvalidInput(f"mode must be 'sets' or 'multisets', not {mode!r}")
    return mode == "sets"


def iter_multiplexes(
    table: CayleyTable, D: int, k: int, mode: str = "multisets", limit: int | None = DEFAULT_WORK_LIMIT
) -> Iterator[Multiplex]:
    """Stream every k-multiplex (``mode="multisets"``) or k-plex (``"sets"``) of M(G^[D-1])."""
    if D < 2 or k < 1:
        raise ArgumentOutOfRange("need D >= 2 and k >= 1")
    distinct = _mode_distinct(mode)
    _guard("multiplexes", table.order, D, k, limit=limit)
    n = table.order
    for rows in _search(table, D, k, range(n), n, distinct):
        yield Multiplex(n, k, D, tuple(tuple(x + 1 for x in r) for r in rows))


def enumerate_multiplexes(
    table: CayleyTable, D: int, k: int, mode: str = "multisets", limit: int | None = DEFAULT_WORK_LIMIT
) -> int:
    """per_k (``mode="sets"``) or Per_k (``mode="multisets"``) of M(G^[D-1])."""
    if D < 2 or k < 1:
        raise ArgumentOutOfRange("need D >= 2 and k >= 1")
    distinct = _mode_distinct(mode)
    _guard("multiplexes", table.order, D, k, limit=limit)
    n = table.order
    return sum(1 for _ in _search(table, D, k, range(n), n, distinct))


def iter_partial_multiplexes(
    table: CayleyTable, D: int, k: int, l: int, mode: str = "multisets", limit: int | None = DEFAULT_WORK_LIMIT
) -> Iterator[PartialMultiplex]:
    n = table.order
    if not 0 <= l <= n:
        raise ArgumentOutOfRange(f"length l={l} outside 0..{n}")
    if D < 2 or k < 1:
        raise ArgumentOutOfRange("need D >= 2 and k >= 1")
    distinct = _mode_distinct(mode)
    _guard("partial", n, D, k, l, limit=limit)
    for first in itertools.combinations(range(n), l):
        for rows in _search(table, D, k, first, l, distinct):
            yield PartialMultiplex(n, k, D, tuple(tuple(x + 1 for x in r) for r in rows), l=l)


def count_partial_multiplexes(
    table: CayleyTable, D: int, k: int, l: int, mode: str = "multisets", limit: int | None = DEFAULT_WORK_LIMIT
) -> int:
    """P_{l,k} of M(G^[D-1]): multisets of kl support cells with k or 0 per hyperplane."""
    return sum(1 for _ in iter_partial_multiplexes(table, D, k, l, mode, limit))


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class MultiplexClassification:
    is_plex: bool
    is_true: bool
    divisible: bool
    connected: bool
    parts: tuple[Multiplex, Multiplex] | None = field(default=None, compare=False)
    component_orders: tuple[int, ...] = field(default=(), compare=False)


def _components(elements: Sequence[Index]) -> list[list[int]]:
    parent = list(range(len(elements)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    first_seen: dict[tuple[int, int], int] = {}
    for i, e in enumerate(elements):
        for j, s in enumerate(e):
            key = (j, s)
            if key in first_seen:
                ra, rb = find(first_seen[key]), find(i)
                if ra != rb:
                    parent[ra] = rb
            else:
                first_seen[key] = i
    comps: dict[int, list[int]] = {}
    for i in range(len(elements)):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values())


def _find_submultiplex(K: Multiplex, k1: int) -> tuple[Index, ...] | None:
    """A sub-multiset with exactly k1 elements in every hyperplane, or None."""
    mult = sorted(K.multiplicities().items())
    distinct = [e for e, _ in mult]
    caps = [m for _, m in mult]
    D, n = K.D, K.n
    target = k1 * n
    counts = [Counter() for _ in range(D)]
    pick = [0] * len(distinct)
    # remaining supply per (coord, symbol) for pruning
    supply = [Counter() for _ in range(D)]
    for e, m in mult:
        for j in range(D):
            supply[j][e[j]] += m

    def go(i: int, size: int) -> bool:
        if size == target:
            return True
        if i == len(distinct):
            return False
        e = distinct[i]
        for j in range(D):
            supply[j][e[j]] -= caps[i]
        for c in range(min(caps[i], target - size), -1, -1):
            if any(counts[j][e[j]] + c > k1 for j in range(D)):
                continue
            # every x0 symbol must still be able to reach k1
            for j in range(D):
                counts[j][e[j]] += c
            feasible = all(
                counts[0][s] + supply[0][s] >= k1 for s in range(1, n + 1)
            )
            if feasible:
                pick[i] = c
                if go(i + 1, size + c):
                    for j in range(D):
                        supply[j][e[j]] += caps[i]
                    return True
            for j in range(D):
                counts[j][e[j]] -= c
        pick[i] = 0
        for j in range(D):
            supply[j][e[j]] += caps[i]
        return False

    if not go(0, 0):
        return None
    out: list[Index] = []
    for e, c in zip(distinct, pick):
        out.extend([e] * c)
    return tuple(out)


def classify_multiplex(K: Multiplex) -> MultiplexClassification:
    is_plex = K.is_plex
    comps = _components(K.elements)
    connected = len(comps) == 1
    orders = tuple(sorted(len(c) // K.k for c in comps))
    parts = None
    for k1 in range(1, K.k // 2 + 1):
        sub = _find_submultiplex(K, k1)
        if sub is not None:
            rest = list(K.elements)
            for e in sub:
                rest.remove(e)
            parts = (Multiplex(K.n, k1, K.D, sub), Multiplex(K.n, K.k - k1, K.D, tuple(rest)))
            break
    return MultiplexClassification(
        is_plex=is_plex,
        is_true=not is_plex,
        divisible=parts is not None,
        connected=connected,
        parts=parts,
        component_orders=orders,
    )


def classify_all(table: CayleyTable, D: int, k: int, limit: int | None = DEFAULT_WORK_LIMIT) -> dict[str, int]:
    """Breakdown of all k-multiplexes of M(G^[D-1]) by classification flags."""
    tally = Counter()
    for K in iter_multiplexes(table, D, k, "multisets", limit):
        c = classify_multiplex(K)
        tally["total"] += 1
        tally["plex" if c.is_plex else "true"] += 1
        tally["divisible" if c.divisible else "indivisible"] += 1
        tally["connected" if c.connected else "disconnected"] += 1
        if c.is_plex and c.connected and not c.divisible:
            tally["connected_indivisible_plex"] += 1
    keys = ["total", "plex", "true", "divisible", "indivisible", "connected", "disconnected",
            "connected_indivisible_plex"]
    return {key: tally[key] for key in keys}


# --------------------------------------------------------------------------
# parity obstruction


def parity_residue(n: int, d: int, k: int) -> int:
    """``k (d+1) n (n+1) / 2 mod n``: the coordinate-sum residue of a would-be multiplex of Z_n^[d]."""
    return (k * (d + 1) * n * (n + 1) // 2) % n


def zn_obstruction(n: int, d: int, k: int) -> bool:
    """True when the d-dimensional hypercube of Z_n^[d] provably has no k-multiplexes."""
    if min(n, d, k) < 1:
        raise ArgumentOutOfRange("n, d, k must be positive")
    return n % 2 == 0 and d % 2 == 0 and k % 2 == 1


# --------------------------------------------------------------------------
# constructions and bounds


def extend_multiplex(table: CayleyTable, K: Multiplex, U: Sequence[int]) -> Multiplex:
    """Append two columns (U, V) with ``(1*u)*v == 1`` to a multiplex of M(G^[d]).

    ``U`` is aligned with ``K.elements`` (its sorted order) and must be a
    permutation of the multiset with each symbol k times.  The result lives
    in M(G^[d+2]).
    """
    n, k = K.n, K.k
    if len(U) != k * n or sorted(U) != sorted(list(range(1, n + 1)) * k):
        raise BadMultisetPermutation(f"{list(U)} is not a permutation of each symbol {k} times")
    new = []
    for e, u in zip(K.elements, U):
        v = table.left_divide(table.product(1, u), 1)
        new.append((*e, u, v))
    return Multiplex(n, k, K.D + 2, tuple(new))


@dataclass(frozen=True)
class Lemma2Bounds:
    total: int
    true_multiplexes: int | None
    disconnected: int | None
    plex_threshold: int

    def plexes_possible(self, k: int) -> bool:
        return k <= self.plex_threshold


def lemma2_bounds(n: int, d: int, k: int, n1: int | None = None) -> Lemma2Bounds:
    """Upper bounds on multiplex counts in a d-dimensional matrix of order n.

    ``true_multiplexes`` is None for k < 2 and ``disconnected`` is None unless
    a split ``n1`` is given.  ``plex_threshold`` is the hyperplane support size
    n^(d-2) of a d-dimensional MDS code; no k-plex exists when k exceeds it.
    """
    if n < 1 or d < 1 or k < 1:
        raise ArgumentOutOfRange("n, d, k must be positive")
    fk = math.factorial(k)
    total = (math.factorial(k * n) // fk**n) ** d
    true_b = None
    if k >= 2:
        true_b = (n * math.factorial(k * n - 2) // (fk ** (n - 1) * math.factorial(k - 2))) ** d
    disc = None
    if n1 is not None:
        if not 1 <= n1 < n:
            raise ArgumentOutOfRange(f"split n1={n1} outside 1..{n - 1}")
        n2 = n - n1
        disc = (math.comb(n, n1) * math.factorial(k * n1) * math.factorial(k * n2) // fk**n) ** d
    threshold = n ** (d - 2) if d >= 2 else 0
    return Lemma2Bounds(total, true_b, disc, threshold)
