"""Exact dominant eigenvectors and the limit constants c(G, k) and c(G, k, l).

All arithmetic is over :class:`fractions.Fraction`.  The Perron value is
known in advance (the constant row sum lambda), so the work reduces to an
exact kernel computation on the strong component of the all-ones state E.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import CayleyTable
from .chain import (
    ChainStructure,
    TransitionMatrix,
    build_transition,
    count_sequence,
    iterate_counts,
    reachability_and_period,
)
from .errors import EUnreachable, KernelDimensionNotOne, LambdaNotEigenvalue


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of the right kernel of a matrix by exact Gauss-Jordan elimination.

    Rows are kept sparse as dicts so that the mostly-zero transition matrices
    stay cheap.
    """
    work = []
    for r in rows:
        d = {j: Fraction(v) for j, v in enumerate(r) if v}
        if d:
            work.append(d)
    pivots: list[tuple[int, dict]] = []
    for col in range(ncols):
        # sparsest candidate keeps fill-in down
        piv = None
        for i, r in enumerate(work):
            if col in r and (piv is None or len(r) < len(work[piv])):
                piv = i
        if piv is None:
            continue
        prow = work.pop(piv)
        inv = 1 / prow[col]
        prow = {j: v * inv for j, v in prow.items()}
        for r in work:
            f = r.get(col)
            if f:
                for j, v in prow.items():
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
        for _, r in pivots:
            f = r.get(col)
            if f:
                for j, v in prow.items():
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
        pivots.append((col, prow))
        work = [r for r in work if r]
    pivot_cols = {c for c, _ in pivots}
    basis = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for c, r in pivots:
            vec[c] = -r.get(free, Fraction(0))
        basis.append(vec)
    return basis


@dataclass(frozen=True)
class Eigen:
    """Right Perron vector on the E-part of the chain, normalised so that p . chi = 1."""

    states: tuple[int, ...]
    chi: tuple[Fraction, ...]
    eigenvalue: int
    period: int

    def value(self, state: int) -> Fraction:
        return self.chi[self.states.index(state)]

    def aggregate(self, matrix: TransitionMatrix, blocks: Sequence[Sequence[int]]) -> list[Fraction]:
        """Class-size weighted sums of chi over blocks of state indices."""
        pos = {s: i for i, s in enumerate(self.states)}
        p = matrix.class_sizes
        return [sum((p[s] * self.chi[pos[s]] for s in b if s in pos), Fraction(0)) for b in blocks]


def _restricted(matrix: TransitionMatrix, part: Sequence[int], power: int) -> list[list[int]]:
    pos = {s: i for i, s in enumerate(part)}
    m = len(part)
    out = [[0] * m for _ in range(m)]
    if power == 1:
        for s in part:
            for t, v in matrix.rows[s].items():
                if t in pos:
                    out[pos[s]][pos[t]] += v
        return out
    # square of the component block, then keep E's parity class
    for s in part:
        for t, v in matrix.rows[s].items():
            for u, w in matrix.rows[t].items():
                if u in pos:
                    out[pos[s]][pos[u]] += v * w
    return out


def dominant_eigenvector(matrix: TransitionMatrix, structure: ChainStructure | None = None) -> Eigen:
    """Exact kernel of ``A - lambda I`` on E's strong component.

    For a period-2 component the kernel of ``A^2 - lambda^2 I`` is taken on
    the states at even distance from E.  The kernel must be one-dimensional.
    """
    structure = structure or reachability_and_period(matrix)
    period = structure.period
    if period not in (1, 2):
        raise KernelDimensionNotOne(f"unexpected period {period}")
    part = structure.part(0) if period == 2 else structure.scc
    block = _restricted(matrix, part, period)
    lam = matrix.lam**period
    shifted = [[v - (lam if i == j else 0) for j, v in enumerate(row)] for i, row in enumerate(block)]
    basis = nullspace(shifted, len(part))
    if not basis:
        raise LambdaNotEigenvalue(f"{lam} is not an eigenvalue on the E-component")
    if len(basis) != 1:
        raise KernelDimensionNotOne(f"kernel dimension {len(basis)}")
    p = [matrix.class_sizes[s] for s in part]
    # left eigenvector check: class sizes
    for j in range(len(part)):
        if sum(p[i] * block[i][j] for i in range(len(part))) != lam * p[j]:
            left = nullspace([list(col) for col in zip(*shifted)], len(part))
            if len(left) != 1:
                raise KernelDimensionNotOne("left kernel is not one-dimensional")
            p = left[0]
            break
    vec = basis[0]
    norm = sum((pi * vi for pi, vi in zip(p, vec)), Fraction(0))
    chi = tuple(v / norm for v in vec)
    if any(c <= 0 for c in chi):
        raise KernelDimensionNotOne("Perron vector is not strictly positive")
    return Eigen(tuple(part), chi, lam, period)


@dataclass(frozen=True)
class LimitConstant:
    value: Fraction
    subsequence: str
    period: int
    scc_size: int
    part_size: int
    x_limit: Fraction
    lambda_convention: Fraction

    @property
    def decimal(self) -> str:
        return to_decimal(self.value)


def to_decimal(x: Fraction, digits: int = 12) -> str:
    ctx = decimal.Context(prec=digits)
    return str(ctx.divide(decimal.Decimal(x.numerator), decimal.Decimal(x.denominator)))


def _limit_of_x(matrix: TransitionMatrix, structure: ChainStructure, eig: Eigen) -> tuple[Fraction, int]:
    """``lim l_E(m) / lambda^m`` along E's subsequence, and the starting step m0 (1 or 2).

    Uses ``l(m) ~ lambda^(m - m0) chi (p . l(m0))`` restricted to the part that
    E's subsequence runs through.
    """
    part = set(eig.states)
    p = matrix.class_sizes
    e_chi = eig.value(matrix.e_index)
    for cv in count_sequence(matrix, 2):
        mass = sum(p[s] * cv.values[s] for s in part)
        if mass:
            return e_chi * mass / Fraction(matrix.lam) ** cv.step, cv.step
        if structure.period == 1:
            break
    raise EUnreachable("no count mass on the E-component")


def limit_constant(
    table: CayleyTable, k: int = 1, l: int | None = None, matrix: TransitionMatrix | None = None
) -> LimitConstant:
    """c(G, k) (or c(G, k, l)) = lim Per_k M(G^[D-1]) / lambda^(D-2).

    A k-plex is the row set of (kl)! distinct tables, so
    ``c = lambda^2 * lim x_E / (kl)!``.  ``lambda_convention`` divides by
    ``(kl)!/k!^l`` instead; both agree for k = 1.
    """
    matrix = matrix or build_transition(table, k, l)
    structure = reachability_and_period(matrix)
    eig = dominant_eigenvector(matrix, structure)
    x_lim, m0 = _limit_of_x(matrix, structure, eig)
    kl = matrix.k * matrix.l
    lam2 = Fraction(matrix.lam) ** 2
    value = lam2 * x_lim / math.factorial(kl)
    alt = lam2 * x_lim * math.factorial(matrix.k) ** matrix.l / math.factorial(kl)
    if structure.period == 1:
        subseq = "all-d"
    else:
        # l_E(m) > 0 for m = m0 mod 2, hypercube dimension d = m - 1
        subseq = "odd-d-only" if m0 % 2 == 0 else "even-d-only"
    return LimitConstant(
        value=value,
        subsequence=subseq,
        period=structure.period,
        scc_size=len(structure.scc),
        part_size=len(eig.states),
        x_limit=x_lim,
        lambda_convention=alt,
    )


def partial_limit_constant(table: CayleyTable, k: int, l: int, matrix: TransitionMatrix | None = None) -> LimitConstant:
    return limit_constant(table, k, l, matrix)


@dataclass(frozen=True)
class SequenceRow:
    d: int
    table_count: int
    count: int | None
    x_e: Fraction
    deviation: Fraction | None


def sequence_report(
    table: CayleyTable, k: int, d_max: int, l: int | None = None, matrix: TransitionMatrix | None = None
) -> tuple[LimitConstant, list[SequenceRow]]:
    """Per-dimension table counts, normalised ``x_E`` and its distance to the limit.

    The deviation is None on dimensions outside the limit's subsequence.
    """
    matrix = matrix or build_transition(table, k, l)
    const = limit_constant(table, k, l, matrix)
    e = matrix.e_index
    f = math.factorial(matrix.l)
    rows = []
    for cv in count_sequence(matrix, d_max + 1):
        if cv.step < 2:
            continue
        d = cv.step - 1
        l_e = cv.values[e]
        x = Fraction(l_e, matrix.lam**cv.step)
        on = (
            const.subsequence == "all-d"
            or (const.subsequence == "odd-d-only" and d % 2 == 1)
            or (const.subsequence == "even-d-only" and d % 2 == 0)
        )
        count = l_e // f if matrix.k == 1 else None
        rows.append(SequenceRow(d, l_e, count, x, abs(x - const.x_limit) if on else None))
    return const, rows


def x_e(matrix: TransitionMatrix, m: int) -> Fraction:
    return Fraction(iterate_counts(matrix, m).values[matrix.e_index], matrix.lam**m)
