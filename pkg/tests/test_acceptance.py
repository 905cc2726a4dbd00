"""Acceptance criteria 1-12, all exact.

Each test reports one PASS/FAIL line through ``criterion``; the lines are
repeated in the terminal summary (see conftest.py).
"""

import contextlib
import itertools
import math
import sys
import time
from fractions import Fraction

from iterplex.algebra import Isotopy, apply_isotopy, builtin_table, cyclic_group, klein_group, load_cayley_table
from iterplex.chain import (
    build_partial_transition,
    build_transition,
    build_unlumped,
    count_sequence,
    derived_counts,
    iterate_counts,
    load_partition,
    transversal_counts,
    verify_lumping,
)
from iterplex.cli import SUMMARY_GROUPS, summary_closed_form
from iterplex.oracle import (
    check_multiplex,
    classify_multiplex,
    count_partial_multiplexes,
    count_transversals,
    enumerate_multiplexes,
    extend_multiplex,
    iter_multiplexes,
    lemma2_bounds,
    multinomial_lambda,
    zn_obstruction,
)
from iterplex.spectral import dominant_eigenvector, limit_constant, partial_limit_constant

from conftest import FIXTURES
from reference_data import Q5_CHI, Q5_MATRIX, Z5_CHI, Z5_MATRIX

RESULTS: list[str] = []


@contextlib.contextmanager
def criterion(number: int, title: str, seconds: float | None = None):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        if seconds is not None:
            assert elapsed < seconds, f"took {elapsed:.1f}s, limit {seconds}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        line = f"criterion {number:2d}: {status} ({elapsed:.2f}s) {title}"
        RESULTS.append(line)
        print(line, file=sys.stderr)


def q5():
    return load_cayley_table(FIXTURES / "q5.tbl")


def groups_up_to(n):
    out = [cyclic_group(m) for m in range(1, n + 1)]
    if n >= 4:
        out.append(klein_group())
    return out


def aggregate(matrix, eig, path):
    blocks, _ = load_partition(path)
    return eig.aggregate(matrix, [[matrix.index[tuple(s)] for s in b] for b in blocks])


def test_criterion_01_summary_table():
    with criterion(1, "order <= 4 summary table, d = 1..12", seconds=5):
        for g in SUMMARY_GROUPS:
            got = transversal_counts(builtin_table(g), 12)
            assert got == [summary_closed_form(g, d) for d in range(1, 13)], g


def test_criterion_02_oracle_chain_agreement():
    with criterion(2, "oracle and chain transversal counts agree", seconds=120):
        for t in groups_up_to(5) + [q5()]:
            m = build_transition(t, 1)
            ds = (1, 2, 3, 4) if t.order <= 4 else (1, 2, 3)
            for d in ds:
                assert count_transversals(t, d) == derived_counts(t, 1, d, matrix=m).transversal_count, (t, d)


def test_criterion_03_z5():
    with criterion(3, "Z5 matrix, eigenvector and c = 24/125", seconds=10):
        t = cyclic_group(5)
        m = build_transition(t, 1)
        blocks, labels = load_partition(FIXTURES / "z5-4class.json")
        lp = verify_lumping(m, blocks, labels)
        assert lp.block_matrix_int() == Z5_MATRIX
        eig = dominant_eigenvector(m)
        assert aggregate(m, eig, FIXTURES / "z5-4class.json") == [Fraction(x, 125) for x in Z5_CHI]
        assert limit_constant(t, 1, matrix=m).value == Fraction(24, 125)


def test_criterion_04_q5():
    with criterion(4, "order-5 quasigroup matrix, eigenvector and c = 24/625", seconds=30):
        t = q5()
        m = build_transition(t, 1)
        blocks, labels = load_partition(FIXTURES / "q5-13class.json")
        lp = verify_lumping(m, blocks, labels)
        assert lp.block_matrix_int() == Q5_MATRIX
        eig = dominant_eigenvector(m)
        assert aggregate(m, eig, FIXTURES / "q5-13class.json") == [Fraction(x, 625) for x in Q5_CHI]
        assert limit_constant(t, 1, matrix=m).value == Fraction(24, 625)


def test_criterion_05_parity_obstruction():
    with criterion(5, "no multiplexes for even n, even d, odd k"):
        for n, d, k in [(2, 2, 1), (4, 2, 1), (2, 4, 1), (2, 2, 3)]:
            assert enumerate_multiplexes(cyclic_group(n), d + 1, k) == 0, (n, d, k)
            assert zn_obstruction(n, d, k)
        assert enumerate_multiplexes(cyclic_group(2), 3, 2) > 0
        assert not zn_obstruction(2, 2, 2)


def test_criterion_06_two_plexes():
    # a 2-plex needs an n x n latin square, i.e. the three-dimensional code
    with criterion(6, "every group of order 2..5 has a 2-plex"):
        for t in groups_up_to(5)[1:]:
            K = next(iter_multiplexes(t, 3, 2, "sets"), None)
            assert K is not None and K.is_plex, t
            assert check_multiplex(t, K.elements, 2)


def test_criterion_07_doubly_stochastic():
    with criterion(7, "unlumped matrices are doubly stochastic and lump exactly"):
        for n, k in [(2, 1), (3, 1), (2, 2), (3, 2), (5, 1)]:
            t = cyclic_group(n)
            u = build_unlumped(t, k)
            lam = multinomial_lambda(n, k)
            assert u.is_zero_one()
            assert set(u.row_sums()) == {lam}
            assert set(u.column_sums()) == {lam}
            m = build_transition(t, k)
            assert u.lump(m.states) == m.rows, (n, k)


def test_criterion_08_weighted_identity():
    with criterion(8, "l_E(D) equals the weighted multiplex count"):
        cases = [(t, k, D) for t in groups_up_to(3) for k in (1, 2) for D in (2, 3)]
        cases.append((cyclic_group(5), 1, 3))
        for t, k, D in cases:
            m = build_transition(t, k)
            l_e = iterate_counts(m, D).values[m.e_index]
            assert l_e == sum(K.weight() for K in iter_multiplexes(t, D, k)), (t, k, D)
            if k == 1:
                assert l_e == math.factorial(t.order) * count_transversals(t, D - 1)


EXTENSION_CASES = [
    (cyclic_group(2), 2, 1),
    (cyclic_group(3), 2, 1),
    (cyclic_group(3), 3, 1),
    (cyclic_group(2), 2, 2),
    (cyclic_group(3), 2, 2),
    (cyclic_group(2), 3, 2),
    (cyclic_group(4), 2, 1),
    (klein_group(), 2, 1),
    (klein_group(), 3, 1),
]

BOUND_CASES = [(t, D, k) for t in groups_up_to(3) for D in (2, 3) for k in (1, 2)] + [
    (cyclic_group(4), 3, 1),
    (klein_group(), 3, 1),
    (cyclic_group(4), 2, 2),
    (cyclic_group(3), 4, 1),
]


def test_criterion_09_extension_and_bounds():
    with criterion(9, "extension lower bound and counting upper bounds"):
        for t, D, k in EXTENSION_CASES:
            n = t.order
            lam = multinomial_lambda(n, k)
            perms = list(dict.fromkeys(itertools.permutations([s for s in range(1, n + 1) for _ in range(k)])))
            plexes = [K for K in iter_multiplexes(t, D, k, "sets")]
            made = set()
            for K in plexes:
                for U in perms:
                    K2 = extend_multiplex(t, K, U)
                    assert check_multiplex(t, K2.elements, k)
                    made.add(K2.elements)
            assert len(made) == lam * len(plexes)
            assert enumerate_multiplexes(t, D + 2, k, "sets") >= lam * len(plexes), (t, D, k)
        for t, D, k in BOUND_CASES:
            n = t.order
            b = lemma2_bounds(n, D, k)
            Ks = list(iter_multiplexes(t, D, k))
            plex = sum(K.is_plex for K in Ks)
            assert len(Ks) <= b.total
            if k >= 2:
                assert len(Ks) - plex <= b.true_multiplexes
            if not b.plexes_possible(k):
                assert plex == 0
            for n1 in range(1, n):
                disc = 0
                for K in Ks:
                    c = classify_multiplex(K)
                    if not c.connected and any(
                        sum(combo) == n1
                        for r in range(1, len(c.component_orders))
                        for combo in itertools.combinations(c.component_orders, r)
                    ):
                        disc += 1
                assert disc <= lemma2_bounds(n, D, k, n1=n1).disconnected


def test_criterion_10_partial():
    with criterion(10, "partial multiplex counts and constants"):
        for t, D, k in [(cyclic_group(2), 3, 2), (cyclic_group(3), 3, 1), (cyclic_group(3), 3, 2), (klein_group(), 3, 1)]:
            assert count_partial_multiplexes(t, D, k, t.order) == enumerate_multiplexes(t, D, k)
        z3 = cyclic_group(3)
        for l in (1, 2):
            m = build_partial_transition(z3, 1, l)
            for D in (3, 4):
                assert derived_counts(z3, 1, D - 1, l=l, matrix=m).multiplex_count == count_partial_multiplexes(
                    z3, D, 1, l
                ), (l, D)
        for t in (cyclic_group(2), z3, cyclic_group(4), klein_group(), cyclic_group(5), q5()):
            assert partial_limit_constant(t, 1, t.order) == limit_constant(t, 1)


def positivity_tables():
    tables = groups_up_to(5) + [q5()]
    tables.append(apply_isotopy(cyclic_group(4), Isotopy((1, 2, 3, 4), (1, 2, 4, 3), (1, 2, 3, 4))))
    tables.append(apply_isotopy(q5(), Isotopy((2, 1, 3, 4, 5), (1, 3, 2, 5, 4), (5, 4, 3, 2, 1))))
    return tables


def test_criterion_11_even_depth_positivity():
    with criterion(11, "l_E(m) > 0 for even m, and stays positive after the first odd hit"):
        for t in positivity_tables():
            m = build_transition(t, 1)
            seq = [cv.values[m.e_index] for cv in count_sequence(m, 12)]
            for step, v in enumerate(seq, 1):
                if step % 2 == 0:
                    assert v > 0, (t, step)
            odd = [s for s, v in enumerate(seq, 1) if s % 2 and v > 0]
            if odd:
                assert all(v > 0 for v in seq[odd[0] - 1:]), t


def test_criterion_12_convergence():
    with criterion(12, "|x_E(m) - lim| strictly decreases from m to m + 2"):
        for t in (cyclic_group(3), cyclic_group(5), q5()):
            m = build_transition(t, 1)
            c = limit_constant(t, 1, matrix=m)
            assert c.period == 1
            dev = {
                cv.step: abs(Fraction(cv.values[m.e_index], m.lam**cv.step) - c.x_limit)
                for cv in count_sequence(m, 12)
            }
            for step in range(4, 11):
                assert dev[step + 2] < dev[step], (t, step)
