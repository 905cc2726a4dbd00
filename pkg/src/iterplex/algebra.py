"""Binary quasigroups given by Cayley tables, and the iterated operations built on them.

Symbols are 1-based everywhere in the public interface.  The symbol 1 is the
distinguished value in the iterated-quasigroup condition
``(...((x0*x1)*x2)...)*xd == 1``; nothing assumes it is an identity element.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    ColumnNotPermutation,
    InvalidInput,
    LengthMismatch,
    NonSquare,
    RowNotPermutation,
    SymbolOutOfRange,
)


@dataclass(frozen=True)
class CayleyTable:
    """A validated n x n latin square; ``cells[a-1][b-1] == a*b``."""

    cells: tuple[tuple[int, ...], ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        cells = tuple(tuple(int(x) for x in row) for row in self.cells)
        object.__setattr__(self, "cells", cells)
        n = len(cells)
        if n == 0:
            raise NonSquare("empty table")
        for r, row in enumerate(cells, 1):
            if len(row) != n:
                raise NonSquare(f"row {r} has {len(row)} entries, expected {n}")
            for x in row:
                if not 1 <= x <= n:
                    raise SymbolOutOfRange(f"symbol {x} in row {r} outside 1..{n}")
        for r, row in enumerate(cells, 1):
            seen = set()
            for x in row:
                if x in seen:
                    raise RowNotPermutation(r, x)
                seen.add(x)
        for c in range(n):
            seen = set()
            for r in range(n):
                x = cells[r][c]
                if x in seen:
                    raise ColumnNotPermutation(c + 1, x)
                seen.add(x)
        # 0-based lookup tables for the hot loops
        mul = tuple(tuple(x - 1 for x in row) for row in cells)
        ldiv = [[0] * n for _ in range(n)]
        rdiv = [[0] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                c = mul[a][b]
                ldiv[a][c] = b
                rdiv[c][b] = a
        object.__setattr__(self, "_mul", mul)
        object.__setattr__(self, "_ldiv", tuple(map(tuple, ldiv)))
        object.__setattr__(self, "_rdiv", tuple(map(tuple, rdiv)))

    @property
    def order(self) -> int:
        return len(self.cells)

    def product(self, a: int, b: int) -> int:
        return self.cells[a - 1][b - 1]

    def left_divide(self, a: int, c: int) -> int:
        """The unique w with ``a*w == c``."""
        return self._ldiv[a - 1][c - 1] + 1

    def right_divide(self, c: int, b: int) -> int:
        """The unique v with ``v*b == c``."""
        return self._rdiv[c - 1][b - 1] + 1

    def left_fold(self, xs: Sequence[int]) -> int:
        if not xs:
            raise InvalidInput("left_fold of an empty vector")
        mul = self._mul
        acc = xs[0] - 1
        for x in xs[1:]:
            acc = mul[acc][x - 1]
        return acc + 1

    def mds_member(self, beta: Sequence[int]) -> bool:
        """Whether ``beta`` is in the support of the MDS code of the iterated quasigroup."""
        return self.left_fold(beta) == 1

    def componentwise_product(self, u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
        if len(u) != len(v):
            raise LengthMismatch(f"lengths {len(u)} and {len(v)} differ")
        return tuple(self.cells[a - 1][b - 1] for a, b in zip(u, v))

    def fingerprint(self) -> str:
        body = ";".join(",".join(map(str, row)) for row in self.cells)
        digest = hashlib.sha256(body.encode()).hexdigest()[:16]
        return f"n{self.order}-{digest}"

    def is_associative(self) -> bool:
        n = self.order
        m = self._mul
        return all(
            m[m[a][b]][c] == m[a][m[b][c]]
            for a in range(n)
            for b in range(n)
            for c in range(n)
        )

    def to_text(self) -> str:
        return "\n".join(" ".join(map(str, row)) for row in self.cells) + "\n"

    def __str__(self):
        label = self.name or "table"
        return f"{label} (order {self.order})"


def parse_cayley_table(text: str | Iterable[str], name: str | None = None) -> CayleyTable:
    """Read a table from whitespace-separated rows; ``#`` lines and blank lines are skipped."""
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = list(text)
    rows = []
    for line in lines:
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rows.append(tuple(int(tok) for tok in s.split()))
        except ValueError as exc:
            raise InvalidInput(f"non-integer entry in line {s!r}") from exc
    if not rows:
        raise NonSquare("no rows")
    n = len(rows)
    for r, row in enumerate(rows, 1):
        if len(row) != n:
            raise NonSquare(f"{n} lines but line {r} has {len(row)} entries")
    return CayleyTable(tuple(rows), name=name)


def load_cayley_table(path) -> CayleyTable:
    with open(path, encoding="utf-8") as fh:
        return parse_cayley_table(fh.read(), name=str(path))


def cyclic_group(n: int) -> CayleyTable:
    if n < 1:
        raise InvalidInput("cyclic group needs n >= 1")
    cells = tuple(tuple((a + b) % n + 1 for b in range(n)) for a in range(n))
    return CayleyTable(cells, name=f"Z{n}")


def direct_product(g: CayleyTable, h: CayleyTable) -> CayleyTable:
    """Product table with the pair (i, j) encoded as ``(i-1)*|h| + j``."""
    n1, n2 = g.order, h.order

    def enc(i, j):
        return (i - 1) * n2 + j

    cells = []
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            cells.append(
                tuple(
                    enc(g.product(i, i2), h.product(j, j2))
                    for i2 in range(1, n1 + 1)
                    for j2 in range(1, n2 + 1)
                )
            )
    name = f"{g.name or 'G'}x{h.name or 'H'}"
    return CayleyTable(tuple(cells), name=name)


def klein_group() -> CayleyTable:
    t = direct_product(cyclic_group(2), cyclic_group(2))
    return CayleyTable(t.cells, name="Z2^2")


_CYCLIC_RE = re.compile(r"^(?:cyclic|z)[:(]?(\d+)\)?$", re.IGNORECASE)


def builtin_table(spec: str) -> CayleyTable:
    """Build a table from a spec string.

    Accepted forms: ``cyclic:5`` (or ``cyclic(5)``), ``klein``,
    ``product:<spec>x<spec>[x...]`` (folded left to right).  A leading
    ``builtin:`` prefix is stripped.
    """
    s = spec.strip()
    if s.startswith("builtin:"):
        s = s[len("builtin:"):]
    if s.lower() == "klein":
        return klein_group()
    m = _CYCLIC_RE.match(s)
    if m:
        return cyclic_group(int(m.group(1)))
    if s.startswith("product:"):
        parts = [p for p in s[len("product:"):].split("x") if p]
        if len(parts) < 2:
            raise InvalidInput(f"product needs two factors: {spec!r}")
        result = builtin_table(parts[0])
        for p in parts[1:]:
            result = direct_product(result, builtin_table(p))
        return result
    raise InvalidInput(f"unknown builtin table {spec!r}")


@dataclass(frozen=True)
class Isotopy:
    """Three permutations of 1..n, each given as the tuple of images of 1..n."""

    sigma0: tuple[int, ...]
    sigma1: tuple[int, ...]
    sigma2: tuple[int, ...]

    def __post_init__(self):
        n = len(self.sigma0)
        for s in (self.sigma0, self.sigma1, self.sigma2):
            if len(s) != n or sorted(s) != list(range(1, n + 1)):
                raise InvalidInput(f"{s} is not a permutation of 1..{n}")

    @classmethod
    def identity(cls, n: int) -> "Isotopy":
        e = tuple(range(1, n + 1))
        return cls(e, e, e)


def apply_isotopy(table: CayleyTable, iso: Isotopy) -> CayleyTable:
    """new(a, b) = sigma0^-1(old(sigma1(a), sigma2(b)))."""
    n = table.order
    if len(iso.sigma0) != n:
        raise InvalidInput(f"isotopy of order {len(iso.sigma0)} for table of order {n}")
    inv0 = [0] * (n + 1)
    for x, y in enumerate(iso.sigma0, 1):
        inv0[y] = x
    cells = tuple(
        tuple(inv0[table.product(iso.sigma1[a - 1], iso.sigma2[b - 1])] for b in range(1, n + 1))
        for a in range(1, n + 1)
    )
    return CayleyTable(cells, name=f"isotope({table.name})" if table.name else None)
