from fractions import Fraction

import pytest

from sosmech.errors import CapExceeded, KNotPowerOfTwo
from sosmech.feasibility import FeasibilitySystem
from sosmech.instance import Instance
from sosmech.instances import ex_1_3, gen_random, lb_sos_2
from sosmech.mechanisms import Kind, MechanismSpec
from sosmech.oracle import (
    coin_space,
    exact_expected_welfare,
    exact_ratio,
    opt_welfare,
    opt_welfare_scan,
    other_self,
)

from conftest import comb_single, single_param

F = Fraction
RS_V = MechanismSpec(Kind.RS_V)


def test_opt_on_named_and_additive(additive_pair):
    inst = lb_sos_2(H=100).instance
    assert opt_welfare(inst, (0, 0))[1] == 1
    assert opt_welfare(inst, (1, 0))[1] == 100
    assert opt_welfare(additive_pair, (1, 2))[1] == 3


@pytest.mark.parametrize("seed", range(5))
def test_opt_matches_scan(seed):
    for inst in (gen_random("SOS_CONCAVE_SUM", 4, 0, 2, seed), gen_random("STRONG_SOS", 3, 2, 2, seed)):
        for prof in inst.valuation.profiles():
            assert opt_welfare(inst, prof)[1] == opt_welfare_scan(inst, prof)


def test_coin_space_sizes(additive_pair):
    coins = coin_space(RS_V, additive_pair)
    assert len(coins) == 4 and all(p == F(1, 4) for _, p in coins)
    inst = comb_single(2, 1, 4, lambda i, T, s: s[0] + s[1] + s[i])
    hl = coin_space(MechanismSpec(Kind.K_HL), inst)
    assert len(hl) == 3 + 4 and hl.total() == 1
    assert sum(p for r, p in hl if r.branch == "THRESHOLD") == F(3, 7)
    ss = coin_space(MechanismSpec(Kind.K_SS), inst)
    assert len(ss) == 2 + 4 and ss.total() == 1
    assert sum(p for r, p in ss if r.branch == "BUCKET") == F(1, 2)


def test_coin_space_guards():
    inst = comb_single(2, 1, 3, lambda i, T, s: s[0] + s[1] + s[i])
    with pytest.raises(KNotPowerOfTwo):
        coin_space(MechanismSpec(Kind.K_SS), inst)
    big = gen_random("SOS_CONCAVE_SUM", 4, 0, 2, 0)
    with pytest.raises(CapExceeded):
        coin_space(RS_V, big, cap_n=3)


def test_rs_v_expected_welfare(additive_pair):
    assert exact_expected_welfare(RS_V, additive_pair, (1, 2)) == F(9, 4)
    assert exact_ratio(RS_V, additive_pair, (1, 2)) == F(3, 4)


def test_single_agent_gets_half():
    inst = single_param(1, 3, lambda i, s: 2 + s[0])
    for prof in inst.valuation.profiles():
        assert exact_expected_welfare(RS_V, inst, prof) == inst.valuation.value(0, None, prof) / 2


def test_empty_family_yields_nothing():
    inst = single_param(2, 2, lambda i, s: 1 + s[0] + s[1], system=FeasibilitySystem(2, [()]))
    for prof in inst.valuation.profiles():
        assert exact_expected_welfare(RS_V, inst, prof) == 0
        assert exact_ratio(RS_V, inst, prof) == 1  # OPT = 0 convention


def test_product_example_ratio_is_small():
    n = 4
    inst = ex_1_3(n=n).instance
    prof = (1,) * (n - 1) + (0,)
    assert exact_ratio(RS_V, inst, prof) <= F(1, n) + (n - 1) * F(1, 100)


def test_other_self_cover_optimum():
    inst = gen_random("SOS_CONCAVE_SUM", 3, 1, 4, 3)
    for prof in inst.valuation.profiles():
        dec = other_self(inst, prof)
        assert dec.other + dec.self_part >= dec.optimum
