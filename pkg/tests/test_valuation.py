from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosmech.errors import GridMisaligned, InvalidParams, InvalidProfile, InvalidValuation
from sosmech.instances import ex_1_2, ex_1_3, gen_random, lb_dsos, oil_lease, ud_det
from sosmech.valuation import (
    Setting,
    Valuation,
    check_all,
    check_d_sos,
    check_separable,
    check_single_crossing_ud,
    check_strong_sos,
    evaluate,
    key_lemma_check,
    sm_sets_check,
    table_d_sos,
    table_d_sos_local,
    table_sos_bruteforce,
    table_strong_sos,
    tightest_d,
    to_fraction,
)

from conftest import comb_single, fill, single_param

F = Fraction


def test_additive_value(additive_pair):
    assert evaluate(additive_pair.valuation, 0, None, (1, 2)) == 3


def test_example_values():
    val = ex_1_2(H=100).instance.valuation
    assert val.value(0, None, (0, 0)) == 1
    assert val.value(0, None, (1, 0)) == 2
    assert val.value(1, None, (0, 0)) == 0
    assert val.value(1, None, (1, 0)) == 100


def test_empty_bundle_is_worth_nothing():
    inst = comb_single(2, 2, 2, lambda i, T, s: 1 + s[i] + T)
    for prof in inst.valuation.profiles():
        assert inst.valuation.value(0, 0, prof) == 0


def test_rejects_floats_and_bad_tables():
    with pytest.raises(TypeError):
        to_fraction(0.5)
    with pytest.raises(InvalidValuation):
        Valuation(Setting.SINGLE_PARAM, [[0, 1]], [[1, 1]])  # flat in own signal
    with pytest.raises(InvalidValuation):
        Valuation(Setting.SINGLE_PARAM, [[0, 1]], [[1, -1]])
    with pytest.raises(InvalidValuation):
        Valuation(Setting.SINGLE_PARAM, [[1, 0]], [[0, 1]])
    # flat own steps are allowed once strictness is relaxed
    Valuation(Setting.SINGLE_PARAM, [[0, 1]], [[1, 1]], strict=False)


def test_profile_validation(additive_pair):
    with pytest.raises(InvalidProfile):
        additive_pair.valuation.validate_profile((0, 3))
    with pytest.raises(InvalidProfile):
        additive_pair.valuation.validate_profile((0,))


# d-SOS


def test_additive_is_sos_with_equality():
    inst = single_param(3, 3, lambda i, s: sum(s))
    rep = check_all(inst.valuation, 1)
    assert rep.holds and rep.tightest_d == 1


def test_lb_dsos_needs_large_d():
    val = lb_dsos(d=16).instance.valuation
    assert check_all(val, 16).holds
    rep = check_all(val, 1)
    assert not rep.holds
    assert tightest_d(val) == 14
    w = rep.witness
    table = val.table(rep.agent)
    assert w.replays(table)
    # the higher pair sits where every other signal is already 1
    others = [j for j in range(val.n) if j not in (rep.agent, w.coord)]
    assert all(w.high_from[j] == 1 for j in others)


def test_product_example_has_no_finite_d():
    val = ex_1_3(n=3).instance.valuation
    assert tightest_d(val) is None
    for i in range(val.n):
        table = val.table(i)
        fast = table_d_sos(table)
        slow = table_sos_bruteforce(table, val.grid(None))
        assert fast.holds == slow.holds
        assert fast.tightest_d == slow.tightest_d


def test_sqrt_like_concave_sum_is_strong_sos():
    f = [0, 6, 11, 15, 18, 20, 21]  # strictly increasing, decreasing steps
    inst = single_param(2, 4, lambda i, s: f[s[0] + s[1]])
    assert check_all(inst.valuation, 1, strong=True).holds


def test_convex_own_term_breaks_strong_sos():
    inst = single_param(2, 4, lambda i, s: s[0] + s[1] + s[i] ** 2)
    assert check_all(inst.valuation, 1).holds
    rep = check_strong_sos(inst.valuation, 0, None, 1)
    assert not rep.holds
    assert rep.witness.replays(inst.valuation.table(0))


@pytest.mark.parametrize("seed", range(6))
def test_fast_checks_agree_with_bruteforce(seed):
    for family in ("SOS_CONCAVE_SUM", "D_SOS", "STRONG_SOS"):
        inst = gen_random(family, 3, 0, 4, seed)
        val = inst.valuation
        for i in range(val.n):
            table = val.table(i)
            grid = val.grid(None)
            for d in (1, 2):
                fast = table_d_sos(table, d)
                slow = table_sos_bruteforce(table, grid, d)
                assert (fast.holds, fast.tightest_d) == (slow.holds, slow.tightest_d)
                fast = table_strong_sos(table, grid, d)
                slow = table_sos_bruteforce(table, grid, d, strong=True)
                assert (fast.holds, fast.tightest_d) == (slow.holds, slow.tightest_d)
            assert table_d_sos_local(table, 1).holds == table_d_sos(table, 1).holds


tables = st.lists(st.integers(0, 6), min_size=9, max_size=9)


@settings(max_examples=60, deadline=None)
@given(tables, st.sampled_from([1, 2, 3]))
def test_checks_match_definition_on_monotone_tables(cells, d):
    raw = np.array(cells).reshape(3, 3)
    mono = np.maximum.accumulate(np.maximum.accumulate(raw, axis=0), axis=1)
    table = fill((3, 3), lambda s: int(mono[s]))
    grid = (tuple(F(x) for x in range(3)),) * 2
    fast = table_d_sos(table, d)
    slow = table_sos_bruteforce(table, grid, d)
    assert fast.holds == slow.holds
    assert fast.tightest_d == slow.tightest_d
    if d == 1:
        assert table_d_sos_local(table, 1).holds == fast.holds
    if not fast.holds:
        assert fast.witness.replays(table)


def test_local_check_misses_long_range_violations_for_d_above_one():
    # steps along axis 0 are 1, 2, 4 as axis 1 rises: each neighbour ratio is 2,
    # the pair two apart has ratio 4
    table = fill((2, 3), lambda s: [[0, 1, 3], [1, 3, 7]][s[0]][s[1]])
    grid = ((F(0), F(1)), (F(0), F(1), F(2)))
    assert table_d_sos_local(table, 2).holds
    assert not table_d_sos(table, 2).holds
    assert not table_sos_bruteforce(table, grid, 2).holds


# separable


def test_fully_separable_found_and_product_rejected():
    inst = single_param(2, 3, lambda i, s: 2 * s[0] + s[1] ** 2 + 3 * s[i])
    dec = check_separable(inst.valuation)
    assert dec is not None
    val = inst.valuation
    for prof in val.profiles():
        pt = val.point(prof, None)
        assert dec.g_value(0, None, pt) + dec.h_value(0, None, pt[0]) == val.value(0, None, prof)
    prod = single_param(2, 3, lambda i, s: s[0] * s[1] + s[i])
    assert check_separable(prod.valuation) is None


def test_generated_separable_round_trips():
    inst = gen_random("SEPARABLE", 3, 1, 4, 7)
    dec = inst.separable
    assert dec is not None
    val = inst.valuation
    for i, T, _ in val.tables():
        for prof in val.profiles():
            pt = val.point(prof, T)
            assert dec.g_value(i, T, pt) + dec.h_value(i, T, pt[i]) == val.value(i, T, prof)
        assert dec.h_value(i, T, 0) == 0


# single crossing


def test_single_crossing():
    assert check_single_crossing_ud(ud_det().instance.valuation).holds
    rep = check_single_crossing_ud(oil_lease().instance.valuation)
    assert not rep.holds and rep.witness is not None
    sym = comb_single(2, 2, 3, lambda i, T, s: s[0] + s[1] + (T == 1))
    assert check_single_crossing_ud(sym.valuation).holds


# zeroing-average inequality and its set form


def test_zeroing_average_additive():
    inst = single_param(3, 7, lambda i, s: sum(s))
    res = key_lemma_check(inst.valuation, 0, None, (2, 4, 6), 1)
    assert (res.lhs, res.rhs, res.holds) == (7, 6, True)


def test_zeroing_average_product_example():
    val = ex_1_3(n=3).instance.valuation
    eps = F(1, 100)
    res = key_lemma_check(val, 0, None, (1, 1, 1), 1)
    assert res.lhs == (1 + 4 * eps) / 4
    assert not res.holds
    assert key_lemma_check(val, 0, None, (1, 1, 1), 3).holds


@pytest.mark.parametrize("seed", range(4))
def test_zeroing_average_on_generated(seed):
    val = gen_random("SOS_CONCAVE_SUM", 3, 0, 4, seed).valuation
    for prof in val.profiles():
        for i in range(val.n):
            assert key_lemma_check(val, i, None, prof, 1).holds


def test_sets_form():
    inst = single_param(3, 4, lambda i, s: sum(s))
    val = inst.valuation
    assert sm_sets_check(val, 0, None, {0: 1}, {0: 2}, {1: 0, 2: 1}, {1: 3, 2: 3})
    assert sm_sets_check(val, 0, None, {0: 1}, {0: 0}, {1: 0, 2: 1}, {1: 3, 2: 3})
    with pytest.raises(GridMisaligned):
        sm_sets_check(val, 0, None, {0: 1}, {0: F(1, 2)}, {1: 0, 2: 0}, {1: 0, 2: 0})
    with pytest.raises(InvalidParams):
        sm_sets_check(val, 0, None, {0: 1}, {0: 1}, {1: 2, 2: 0}, {1: 0, 2: 0})


@pytest.mark.parametrize("seed", range(3))
def test_sets_form_on_generated(seed):
    val = gen_random("SOS_CONCAVE_SUM", 3, 0, 4, seed).valuation
    for a in range(3):
        for ya in range(1, 4 - a):
            for lo in range(4):
                for hi in range(lo, 4):
                    assert sm_sets_check(val, 0, None, {0: a}, {0: ya}, {1: lo, 2: lo}, {1: hi, 2: hi})
