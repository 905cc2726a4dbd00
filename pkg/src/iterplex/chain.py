"""Counting multiplex tables with an exact lumped Markov recurrence.

A k-multiplex of the D-dimensional code ``M(G^[D-1])`` is the row set of a
``kn x D`` table whose columns are permutations of the multiset with each
symbol k times and whose component-wise left fold is the all-ones vector E.
Writing ``l_U(m)`` for the number of m-column tables folding to U,

    l_U(m) = sum_V a[U, V] l_V(m-1),   a[U, V] = #{W : V*W = U}.

``l_U`` only depends on the symbol counts of U (permuting table rows permutes
U), so the recurrence is carried out on signature states.  Entries are plain
Python integers; the stochastic matrix ``A / lambda`` is never formed.

Partial multiplexes of length l use vectors of length kl and columns that
permute an l-subset of symbols, each taken k times.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterator, Sequence

from sympy.utilities.iterables import multiset_permutations

from .algebra import CayleyTable
from .errors import (
    ArgumentOutOfRange,
    EUnreachable,
    InvalidInput,
    NonIntegerDivision,
    NotLumpable,
    StateSpaceTooLarge,
)

DEFAULT_STATE_CAP = 20_000
DEFAULT_WORK_CAP = 5 * 10**7
DEFAULT_UNLUMPED_CAP = 10**6

Signature = tuple[int, ...]


def _compositions(total: int, parts: int) -> Iterator[Signature]:
    """All tuples of ``parts`` nonnegative ints summing to ``total``, descending lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def build_states(n: int, k: int, l: int | None = None, cap: int | None = DEFAULT_STATE_CAP) -> list[Signature]:
    """Signature states for vectors of length ``k*l`` (``l`` defaults to n).

    The all-ones state ``(kl, 0, ..., 0)`` comes first.
    """
    if n < 1 or k < 1:
        raise ArgumentOutOfRange("n and k must be positive")
    l = n if l is None else l
    if not 1 <= l <= n:
        raise ArgumentOutOfRange(f"l={l} outside 1..{n}")
    size = math.comb(k * l + n - 1, n - 1)
    if cap is not None and size > cap:
        raise StateSpaceTooLarge(f"signature states for n={n} k={k} l={l}", size, cap)
    return list(_compositions(k * l, n))


def class_size(sig: Sequence[int]) -> int:
    """Number of vectors with the given symbol counts."""
    out = math.factorial(sum(sig))
    for c in sig:
        out //= math.factorial(c)
    return out


def partial_lambda(n: int, k: int, l: int) -> int:
    return math.comb(n, l) * math.factorial(k * l) // math.factorial(k) ** l


def _columns(n: int, k: int, l: int) -> list[list[int]]:
    """Every admissible column (0-based): permutations of an l-subset, each symbol k times."""
    cols = []
    for subset in combinations(range(n), l):
        base = [s for s in subset for _ in range(k)]
        cols.extend(multiset_permutations(base))
    return cols


@dataclass
class TransitionMatrix:
    """Lumped integer transition matrix ``A[s, t] = sum over V in t of a[U_s, V]``."""

    n: int
    k: int
    l: int
    states: list[Signature]
    rows: list[dict[int, int]]
    lam: int
    fingerprint: str | None = None

    @cached_property
    def index(self) -> dict[Signature, int]:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def e_index(self) -> int:
        return self.index[(self.k * self.l,) + (0,) * (self.n - 1)]

    @cached_property
    def base(self) -> tuple[int, ...]:
        """States holding the single-column tables (their l-value is 1 at m = 1)."""
        k = self.k
        return tuple(
            i for i, s in enumerate(self.states) if all(c in (0, k) for c in s)
        )

    @cached_property
    def class_sizes(self) -> list[int]:
        return [class_size(s) for s in self.states]

    def entry(self, s: int, t: int) -> int:
        return self.rows[s].get(t, 0)

    def dense(self) -> list[list[int]]:
        m = self.size
        out = [[0] * m for _ in range(m)]
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                out[i][j] = v
        return out

    def row_sums(self) -> list[int]:
        return [sum(r.values()) for r in self.rows]

    def left_eigen_defect(self) -> list[int]:
        """``sum_s p_s A[s, t] - lambda p_t`` for every t; all zero for a valid matrix."""
        p = self.class_sizes
        acc = [0] * self.size
        for s, row in enumerate(self.rows):
            for t, v in row.items():
                acc[t] += p[s] * v
        return [acc[t] - self.lam * p[t] for t in range(self.size)]

    def apply(self, vec: Sequence[int]) -> list[int]:
        return [sum(v * vec[t] for t, v in row.items()) for row in self.rows]

    def to_json(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "order": self.n,
            "k": self.k,
            "l": self.l,
            "lambda": str(self.lam),
            "states": [list(s) for s in self.states],
            "entries": [[str(x) for x in r] for r in self.dense()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TransitionMatrix":
        rows = []
        for r in data["entries"]:
            rows.append({j: int(x) for j, x in enumerate(r) if x != "0"})
        return cls(
            n=data["order"],
            k=data["k"],
            l=data["l"],
            states=[tuple(s) for s in data["states"]],
            rows=rows,
            lam=int(data["lambda"]),
            fingerprint=data.get("fingerprint"),
        )


def build_transition(
    table: CayleyTable,
    k: int = 1,
    l: int | None = None,
    state_cap: int | None = DEFAULT_STATE_CAP,
    work_cap: int | None = DEFAULT_WORK_CAP,
) -> TransitionMatrix:
    """Lumped transition matrix for k-multiplexes (or partial ones of length l).

    For the nondecreasing representative U of every signature, each admissible
    column W fixes V by right division ``v_i * w_i = u_i``; the count lands in
    ``A[sig U, sig V]``.
    """
    n = table.order
    l = n if l is None else l
    states = build_states(n, k, l, state_cap)
    lam = partial_lambda(n, k, l)
    if work_cap is not None and lam * len(states) > work_cap:
        raise StateSpaceTooLarge(f"transition build n={n} k={k} l={l}", lam * len(states), work_cap)
    index = {s: i for i, s in enumerate(states)}
    cols = _columns(n, k, l)
    assert len(cols) == lam
    rdiv = table._rdiv
    rows: list[dict[int, int]] = []
    for sig in states:
        u = [sym for sym, c in enumerate(sig) for _ in range(c)]
        row: dict[int, int] = {}
        for w in cols:
            counts = [0] * n
            for ui, wi in zip(u, w):
                counts[rdiv[ui][wi]] += 1
            t = index[tuple(counts)]
            row[t] = row.get(t, 0) + 1
        rows.append(row)
    return TransitionMatrix(n, k, l, states, rows, lam, table.fingerprint())


def build_partial_transition(table: CayleyTable, k: int, l: int, **caps) -> TransitionMatrix:
    return build_transition(table, k, l, **caps)


# --------------------------------------------------------------------------
# unlumped check matrix


@dataclass
class UnlumpedMatrix:
    """The (0,1)-matrix over all n^(kl) vectors, stored as column lists per row."""

    n: int
    k: int
    l: int
    length: int
    lam: int
    rows: list[list[int]]

    def decode(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.length):
            code, r = divmod(code, self.n)
            out.append(r)
        return tuple(reversed(out))

    def is_zero_one(self) -> bool:
        return all(len(set(r)) == len(r) for r in self.rows)

    def row_sums(self) -> list[int]:
        return [len(r) for r in self.rows]

    def column_sums(self) -> list[int]:
        sums = [0] * len(self.rows)
        for r in self.rows:
            for c in r:
                sums[c] += 1
        return sums

    def signature(self, code: int) -> Signature:
        counts = [0] * self.n
        for x in self.decode(code):
            counts[x] += 1
        return tuple(counts)

    def lump(self, states: Sequence[Signature]) -> list[dict[int, int]]:
        """Sum each row over signature classes; every member of a class must agree."""
        index = {s: i for i, s in enumerate(states)}
        sig_of = [index[self.signature(c)] for c in range(len(self.rows))]
        lumped: list[dict[int, int] | None] = [None] * len(states)
        for code, cols in enumerate(self.rows):
            row: dict[int, int] = {}
            for c in cols:
                t = sig_of[c]
                row[t] = row.get(t, 0) + 1
            s = sig_of[code]
            if lumped[s] is None:
                lumped[s] = row
            elif lumped[s] != row:
                raise NotLumpable(states[s], states[s], -1, lumped[s], row)
        return [r or {} for r in lumped]


def build_unlumped(
    table: CayleyTable, k: int = 1, l: int | None = None, cap: int | None = DEFAULT_UNLUMPED_CAP
) -> UnlumpedMatrix:
    n = table.order
    l = n if l is None else l
    length = k * l
    size = n**length
    if cap is not None and size > cap:
        raise StateSpaceTooLarge(f"unlumped matrix n={n} k={k} l={l}", size, cap)
    cols = _columns(n, k, l)
    rdiv = table._rdiv
    weights = [n ** (length - 1 - i) for i in range(length)]
    rows = []
    for code in range(size):
        u = []
        c = code
        for _ in range(length):
            c, r = divmod(c, n)
            u.append(r)
        u.reverse()
        row = []
        for w in cols:
            row.append(sum(rdiv[ui][wi] * p for ui, wi, p in zip(u, w, weights)))
        rows.append(row)
    return UnlumpedMatrix(n, k, l, length, len(cols), rows)


# --------------------------------------------------------------------------
# structure


@dataclass(frozen=True)
class ChainStructure:
    reachable: frozenset[int]
    scc: tuple[int, ...]
    period: int
    levels: dict[int, int] = field(repr=False)

    def part(self, residue: int = 0) -> tuple[int, ...]:
        """States of the E-component whose distance from E is ``residue`` mod the period."""
        return tuple(s for s in self.scc if self.levels[s] % self.period == residue)


def _bfs(adj: Sequence[Sequence[int]], sources: Sequence[int]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def reachability_and_period(matrix: TransitionMatrix, start: Sequence[int] | None = None) -> ChainStructure:
    """Reachable set from the base states, the strong component of E, and E's period.

    Edges follow nonzero entries ``A[s, t]``.  The period is the gcd of
    ``level(u) + 1 - level(v)`` over component edges, levels being BFS
    distances from E.
    """
    start = matrix.base if start is None else tuple(start)
    fwd = [list(r.keys()) for r in matrix.rows]
    bwd: list[list[int]] = [[] for _ in range(matrix.size)]
    for s, r in enumerate(fwd):
        for t in r:
            bwd[t].append(s)
    reach = _bfs(fwd, start)
    e = matrix.e_index
    if e not in reach:
        raise EUnreachable(f"all-ones state unreachable for n={matrix.n} k={matrix.k} l={matrix.l}")
    from_e = _bfs(fwd, [e])
    to_e = _bfs(bwd, [e])
    scc = tuple(sorted(set(from_e) & set(to_e)))
    sset = set(scc)
    g = 0
    for u in scc:
        for v in fwd[u]:
            if v in sset:
                g = math.gcd(g, from_e[u] + 1 - from_e[v])
    levels = {s: from_e[s] for s in scc}
    return ChainStructure(frozenset(reach), scc, g, levels)


# --------------------------------------------------------------------------
# recurrence


@dataclass(frozen=True)
class CountVector:
    step: int
    values: tuple[int, ...]

    def total(self, matrix: TransitionMatrix) -> int:
        return sum(p * v for p, v in zip(matrix.class_sizes, self.values))


def initial_counts(matrix: TransitionMatrix) -> CountVector:
    vals = [0] * matrix.size
    for i in matrix.base:
        vals[i] = 1
    return CountVector(1, tuple(vals))


def count_sequence(matrix: TransitionMatrix, m_max: int) -> Iterator[CountVector]:
    """``l(1), l(2), ..., l(m_max)``."""
    cur = initial_counts(matrix)
    if m_max < 1:
        return
    yield cur
    for m in range(2, m_max + 1):
        cur = CountVector(m, tuple(matrix.apply(cur.values)))
        yield cur


def iterate_counts(matrix: TransitionMatrix, m: int) -> CountVector:
    if m < 1:
        raise ArgumentOutOfRange("m must be >= 1")
    last = None
    for last in count_sequence(matrix, m):
        pass
    return last


@dataclass(frozen=True)
class DerivedCounts:
    d: int
    dimension: int
    table_count: int
    multiplex_count: int | None

    @property
    def transversal_count(self) -> int | None:
        return self.multiplex_count


def derived_counts(
    table: CayleyTable, k: int, d: int, l: int | None = None, matrix: TransitionMatrix | None = None
) -> DerivedCounts:
    """Table count ``l_E(d+1)`` for the d-dimensional hypercube, plus the k = 1 count.

    For k = 1 every diagonal (partial diagonal of length l) is the row set of
    exactly ``l!`` tables, so the count is ``l_E(d+1) / l!``.  For k >= 2 the
    table count is a weighted sum ``sum_K (kl)! / prod m_r!`` and no division
    is attempted.
    """
    matrix = matrix or build_transition(table, k, l)
    l_e = iterate_counts(matrix, d + 1).values[matrix.e_index]
    count = None
    if k == 1:
        f = math.factorial(matrix.l)
        if l_e % f:
            raise NonIntegerDivision(f"l_E({d + 1}) = {l_e} not divisible by {f}")
        count = l_e // f
    return DerivedCounts(d, d + 1, l_e, count)


def transversal_counts(table: CayleyTable, d_max: int, matrix: TransitionMatrix | None = None) -> list[int]:
    """Transversal counts of ``Q(G^[d])`` for d = 1..d_max from one pass of the recurrence."""
    matrix = matrix or build_transition(table, 1)
    f = math.factorial(table.order)
    e = matrix.e_index
    out = []
    for cv in count_sequence(matrix, d_max + 1):
        if cv.step >= 2:
            out.append(cv.values[e] // f)
    return out


# --------------------------------------------------------------------------
# lumping


@dataclass
class LumpingPartition:
    blocks: list[tuple[int, ...]]
    labels: list[str | None]
    block_sizes: list[int]
    quotient: list[list[int]]
    block_matrix: list[list[Fraction]]

    def block_matrix_int(self) -> list[list[int]]:
        out = []
        for row in self.block_matrix:
            if any(x.denominator != 1 for x in row):
                raise NonIntegerDivision("block matrix has non-integer entries")
            out.append([int(x) for x in row])
        return out


def load_partition(path) -> tuple[list[list[Signature]], list[str | None]]:
    """Read a partition fixture: a JSON list of blocks.

    A block is either a list of signature arrays or an object
    ``{"label": ..., "states": [...]}``.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["blocks"]
    blocks, labels = [], []
    for b in data:
        if isinstance(b, dict):
            labels.append(b.get("label"))
            blocks.append([tuple(s) for s in b["states"]])
        else:
            labels.append(None)
            blocks.append([tuple(s) for s in b])
    return blocks, labels


def verify_lumping(
    matrix: TransitionMatrix,
    partition: Sequence[Sequence[Signature]],
    labels: Sequence[str | None] | None = None,
) -> LumpingPartition:
    """Check ordinary lumpability of a partition of (a closed part of) the state space.

    Returns the plain quotient (block row sums, which is the matrix itself for
    singletons) and the class-size weighted block matrix
    ``Y[B, B'] = |B| / |B'| * quotient[B, B']`` that drives the block sums
    ``y_B(m) = sum over vectors U in B of l_U(m)``.
    """
    index = matrix.index
    blocks: list[tuple[int, ...]] = []
    owner: dict[int, int] = {}
    for bi, block in enumerate(partition):
        idx = []
        for sig in block:
            sig = tuple(sig)
            if sig not in index:
                raise InvalidInput(f"unknown state {list(sig)} in block {bi}")
            i = index[sig]
            if i in owner:
                raise InvalidInput(f"state {list(sig)} in blocks {owner[i]} and {bi}")
            owner[i] = bi
            idx.append(i)
        if not idx:
            raise InvalidInput(f"block {bi} is empty")
        blocks.append(tuple(idx))
    try:
        reach = reachability_and_period(matrix).reachable
    except EUnreachable:
        reach = frozenset()
    missing = [matrix.states[s] for s in reach if s not in owner]
    if missing:
        raise InvalidInput(f"partition misses reachable state {list(missing[0])}")
    nb = len(blocks)
    quotient = [[0] * nb for _ in range(nb)]
    for bi, block in enumerate(blocks):
        ref = None
        for s in block:
            sums = [0] * nb
            for t, v in matrix.rows[s].items():
                if t not in owner:
                    raise InvalidInput(
                        f"state {list(matrix.states[s])} leads outside the partition to {list(matrix.states[t])}"
                    )
                sums[owner[t]] += v
            if ref is None:
                ref = (s, sums)
            else:
                for bj in range(nb):
                    if sums[bj] != ref[1][bj]:
                        raise NotLumpable(matrix.states[ref[0]], matrix.states[s], bj, ref[1][bj], sums[bj])
        quotient[bi] = ref[1]
    sizes = [sum(matrix.class_sizes[s] for s in b) for b in blocks]
    weighted = [
        [Fraction(sizes[i] * quotient[i][j], sizes[j]) for j in range(nb)] for i in range(nb)
    ]
    return LumpingPartition(blocks, list(labels) if labels else [None] * nb, sizes, quotient, weighted)


# --------------------------------------------------------------------------
# cache


def resolve_cache_dir(flag: str | os.PathLike | None) -> Path | None:
    if flag:
        return Path(flag)
    env = os.environ.get("QG_CACHE_DIR")
    return Path(env) if env else None


def cache_path(cache_dir: Path, table: CayleyTable, k: int, l: int) -> Path:
    return Path(cache_dir) / f"{table.fingerprint()}-k{k}-l{l}.json"


def save_matrix(matrix: TransitionMatrix, path: Path) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(matrix.to_json(), fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cached_transition(
    table: CayleyTable, k: int = 1, l: int | None = None, cache_dir: Path | None = None, **caps
) -> TransitionMatrix:
    """``build_transition`` behind an optional on-disk cache keyed by table fingerprint."""
    l = table.order if l is None else l
    if cache_dir is None:
        return build_transition(table, k, l, **caps)
    path = cache_path(cache_dir, table, k, l)
    if path.exists():
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            if data.get("fingerprint") == table.fingerprint() and data["k"] == k and data["l"] == l:
                return TransitionMatrix.from_json(data)
        except (OSError, ValueError, KeyError):
            pass
    matrix = build_transition(table, k, l, **caps)
    save_matrix(matrix, path)
    return matrix
