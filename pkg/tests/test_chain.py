import json
import math
from fractions import Fraction

import pytest

from iterplex.algebra import Isotopy, apply_isotopy, cyclic_group, klein_group
from iterplex.chain import (
    build_partial_transition,
    build_states,
    build_transition,
    build_unlumped,
    cache_path,
    cached_transition,
    class_size,
    count_sequence,
    derived_counts,
    iterate_counts,
    load_partition,
    partial_lambda,
    reachability_and_period,
    save_matrix,
    verify_lumping,
)
from iterplex.errors import NotLumpable, StateSpaceTooLarge
from iterplex.oracle import count_partial_multiplexes, iter_multiplexes, iter_partial_multiplexes

from conftest import small_groups
from reference_data import Q5_MATRIX, Z5_MATRIX

Z2, Z3 = cyclic_group(2), cyclic_group(3)


def some_tables(q5):
    iso = apply_isotopy(cyclic_group(4), Isotopy((1, 2, 3, 4), (1, 2, 4, 3), (1, 2, 3, 4)))
    iso5 = apply_isotopy(q5, Isotopy((2, 3, 1, 5, 4), (5, 4, 3, 2, 1), (1, 3, 5, 2, 4)))
    return small_groups(5) + [q5, iso, iso5, cyclic_group(1)]


def test_build_states():
    assert build_states(2, 1) == [(2, 0), (1, 1), (0, 2)]
    assert len(build_states(5, 1)) == math.comb(9, 4) == 126
    assert len(build_states(2, 2)) == 5
    with pytest.raises(StateSpaceTooLarge):
        build_states(6, 3, cap=100)


def test_z2_transition_by_hand():
    # W ranges over (1,2) and (2,1); V is fixed by v_i * w_i = u_i
    m = build_transition(Z2, 1)
    assert m.dense() == [[0, 2, 0], [1, 0, 1], [0, 2, 0]]
    assert m.lam == 2


@pytest.mark.parametrize("k", [1, 2])
def test_row_sums_and_left_eigenvector(q5, k):
    for t in some_tables(q5):
        if k == 2 and t.order > 4:
            continue
        m = build_transition(t, k)
        assert set(m.row_sums()) == {m.lam}
        assert all(x == 0 for x in m.left_eigen_defect())


@pytest.mark.parametrize("n,k", [(3, 1), (2, 2), (2, 1), (3, 2), (5, 1)])
def test_unlumped_doubly_stochastic(n, k):
    t = cyclic_group(n)
    u = build_unlumped(t, k)
    lam = math.factorial(k * n) // math.factorial(k) ** n
    assert u.is_zero_one()
    assert set(u.row_sums()) == {lam}
    assert set(u.column_sums()) == {lam}
    m = build_transition(t, k)
    assert u.lump(m.states) == m.rows


def test_unlumped_sizes():
    assert len(build_unlumped(Z3, 1).rows) == 27
    u = build_unlumped(Z2, 2)
    assert len(u.rows) == 16 and u.lam == 6
    with pytest.raises(StateSpaceTooLarge):
        build_unlumped(cyclic_group(5), 2)


def test_unlumped_lumps_for_quasigroup(q5):
    m = build_transition(q5, 1)
    assert build_unlumped(q5, 1).lump(m.states) == m.rows


def test_periods(z5):
    assert reachability_and_period(build_transition(Z2, 1)).period == 2
    assert reachability_and_period(build_transition(Z3, 1)).period == 1
    assert reachability_and_period(build_transition(z5, 1)).period == 1


def test_period_is_one_or_two(q5):
    for t in some_tables(q5):
        for k in (1, 2):
            if k == 2 and t.order > 4:
                continue
            assert reachability_and_period(build_transition(t, k)).period in (1, 2)


def test_iterate_counts_z2():
    m = build_transition(Z2, 1)
    e = m.e_index
    assert [iterate_counts(m, s).values[e] for s in (2, 3, 4)] == [2, 0, 8]


def test_iterate_counts_z5(z5):
    m = build_transition(z5, 1)
    assert iterate_counts(m, 3).values[m.e_index] // 120 == 15


def test_total_mass(q5):
    for t in some_tables(q5):
        m = build_transition(t, 1)
        for cv in count_sequence(m, 8):
            assert cv.total(m) == m.lam**cv.step


def test_derived_counts_examples():
    assert derived_counts(Z3, 1, 3).transversal_count == 27
    assert derived_counts(klein_group(), 1, 2).transversal_count == 8
    dc = derived_counts(Z2, 2, 1)
    assert dc.table_count == 6 and dc.multiplex_count is None


def weighted_oracle(t, D, k):
    return sum(K.weight() for K in iter_multiplexes(t, D, k, "multisets"))


@pytest.mark.parametrize("t", [cyclic_group(1), Z2, Z3], ids=str)
@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("D", [2, 3])
def test_weighted_count_identity(t, k, D):
    m = build_transition(t, k)
    assert iterate_counts(m, D).values[m.e_index] == weighted_oracle(t, D, k)


def test_z2_doubled_diagonal_weight():
    (K,) = list(iter_multiplexes(Z2, 2, 2))
    assert K.weight() == math.factorial(4) // (2 * 2) == 6


def test_even_depth_positivity(q5):
    for t in some_tables(q5):
        m = build_transition(t, 1)
        seq = [cv.values[m.e_index] for cv in count_sequence(m, 12)]
        for step, v in enumerate(seq, 1):
            if step % 2 == 0:
                assert v > 0
        odd = [s for s, v in enumerate(seq, 1) if s % 2 and v > 0 and s > 1]
        if odd:
            assert all(v > 0 for v in seq[odd[0] - 1:])


# ---------------------------------------------------------------- lumping


def test_verify_lumping_z5(z5, fixtures_dir):
    blocks, labels = load_partition(fixtures_dir / "z5-4class.json")
    lp = verify_lumping(build_transition(z5, 1), blocks, labels)
    assert lp.block_matrix_int() == Z5_MATRIX
    assert lp.block_sizes == [5, 120, 200, 300]


def test_verify_lumping_q5(q5, fixtures_dir):
    blocks, labels = load_partition(fixtures_dir / "q5-13class.json")
    lp = verify_lumping(build_transition(q5, 1), blocks, labels)
    assert lp.block_matrix_int() == Q5_MATRIX
    assert sum(lp.block_sizes) == 5**5


def test_singleton_partition_is_identity(z5):
    m = build_transition(Z3, 1)
    lp = verify_lumping(m, [[s] for s in m.states])
    assert lp.quotient == m.dense()
    p = m.class_sizes
    for i in range(m.size):
        for j in range(m.size):
            assert lp.block_matrix[i][j] == Fraction(p[i] * m.entry(i, j), p[j])


def test_not_lumpable_has_witness(z5, fixtures_dir):
    blocks, labels = load_partition(fixtures_dir / "z5-4class.json")
    # move one state of the singles block into the constant block
    bad = [list(b) for b in blocks]
    bad[0].append(bad[2].pop())
    with pytest.raises(NotLumpable) as exc:
        verify_lumping(build_transition(z5, 1), bad)
    assert exc.value.state_a != exc.value.state_b


# ---------------------------------------------------------------- partial chains


def test_partial_full_length_identical(q5):
    for t in (Z3, q5):
        assert build_partial_transition(t, 1, t.order).rows == build_transition(t, 1).rows


def test_partial_n2_l1():
    m = build_partial_transition(Z2, 1, 1)
    assert m.lam == partial_lambda(2, 1, 1) == 2
    assert m.states == [(1, 0), (0, 1)]
    for D in range(2, 5):
        dc = derived_counts(Z2, 1, D - 1, l=1, matrix=m)
        assert dc.multiplex_count == count_partial_multiplexes(Z2, D, 1, 1)


@pytest.mark.parametrize("D", [2, 3, 4])
@pytest.mark.parametrize("l", [1, 2, 3])
def test_partial_counts_z3(D, l):
    dc = derived_counts(Z3, 1, D - 1, l=l)
    assert dc.multiplex_count == count_partial_multiplexes(Z3, D, 1, l)


@pytest.mark.parametrize("t,k,l,D", [(Z3, 2, 2, 3), (Z3, 2, 1, 3), (klein_group(), 1, 2, 3), (Z2, 2, 1, 4)], ids=str)
def test_partial_weighted_identity(t, k, l, D):
    m = build_partial_transition(t, k, l)
    assert set(m.row_sums()) == {m.lam}
    want = sum(K.weight() for K in iter_partial_multiplexes(t, D, k, l))
    assert iterate_counts(m, D).values[m.e_index] == want


# ---------------------------------------------------------------- cache


def test_cache_round_trip(tmp_path, z5):
    fresh = build_transition(z5, 1)
    m1 = cached_transition(z5, 1, None, tmp_path)
    path = cache_path(tmp_path, z5, 1, 5)
    assert path.exists()
    m2 = cached_transition(z5, 1, None, tmp_path)
    assert m1.rows == m2.rows == fresh.rows and m2.states == fresh.states
    data = json.loads(path.read_text())
    assert all(isinstance(x, str) for row in data["entries"] for x in row)
    assert data["lambda"] == "120"


def test_stale_cache_is_rebuilt(tmp_path, z5):
    path = cache_path(tmp_path, z5, 1, 5)
    wrong = build_transition(cyclic_group(5), 1)
    wrong.fingerprint = "stale"
    wrong.rows = [dict() for _ in wrong.rows]
    save_matrix(wrong, path)
    m = cached_transition(z5, 1, None, tmp_path)
    assert m.rows == build_transition(z5, 1).rows
    assert json.loads(path.read_text())["fingerprint"] == z5.fingerprint()


def test_class_size():
    assert class_size((3, 1, 1, 0, 0)) == 20
    assert class_size((5, 0, 0, 0, 0)) == 1
