from fractions import Fraction

import numpy as np
import pytest

from sosmech.feasibility import single_item
from sosmech.instance import Instance
from sosmech.valuation import Setting, Valuation


def fill(shape, fn):
    arr = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        arr[idx] = Fraction(fn(idx))
    return arr


def single_param(n, k, fn, system=None, strict=True):
    """n agents on grid {0..k-1}; fn(i, s) gives agent i's value."""
    shape = (k,) * n
    tables = [fill(shape, lambda s, i=i: fn(i, s)) for i in range(n)]
    val = Valuation(Setting.SINGLE_PARAM, [range(k)] * n, tables, strict=strict)
    return Instance(val, system or single_item(n))


def comb_single(n, m, k, fn, strict=True):
    """fn(i, T, s) with T a non-empty bundle bitmask."""
    shape = (k,) * n
    tables = [[fill(shape, lambda s, i=i, T=T: fn(i, T, s)) for T in range(1, 2**m)] for i in range(n)]
    return Instance(Valuation(Setting.COMB_SINGLE_SIGNAL, [range(k)] * n, tables, m=m, strict=strict))


@pytest.fixture
def additive_pair():
    """Two agents, one item, v_i = s_0 + s_1 on {0, 1, 2}."""
    return single_param(2, 3, lambda i, s: sum(s))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
