"""Tabulated interdependent valuations over finite signal grids.

A valuation stores one dense table per (agent, bundle).  Each table is indexed
by one coordinate per agent: the agent's signal in the single-signal models,
or the agent's signal for that bundle in the multi-signal model.  Index 0 on
every coordinate is the zero signal.

The structural checks (d-SOS, strong-SOS, separability, single crossing) work
on those tables with exact integer arithmetic after scaling by a common
denominator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import GridMisaligned, InvalidParams, InvalidProfile, InvalidValuation


class Setting(str, Enum):
    SINGLE_PARAM = "single_param"
    COMB_SINGLE_SIGNAL = "comb_single_signal"
    COMB_MULTI_SIGNAL = "comb_multi_signal"


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions and "num/den" strings; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def make_domain(values: Sequence) -> tuple[Fraction, ...]:
    """Validate one signal domain and shift it so its lowest value is 0."""
    dom = [to_fraction(v) for v in values]
    if not dom:
        raise InvalidValuation("empty signal domain")
    if any(v < 0 for v in dom):
        raise InvalidValuation("signal values must be non-negative")
    if any(b <= a for a, b in zip(dom, dom[1:])):
        raise InvalidValuation("signal domain must be strictly ascending")
    base = dom[0]
    return tuple(v - base for v in dom)


def as_table(data, shape: tuple[int, ...] | None = None) -> np.ndarray:
    arr = np.array(data, dtype=object)
    if shape is not None and arr.shape != tuple(shape):
        raise InvalidValuation(f"table shape {arr.shape} does not match grid {tuple(shape)}")
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = to_fraction(arr[idx])
    out.flags.writeable = False
    return out


def _check_table(arr: np.ndarray, own: int, strict: bool, label: str) -> None:
    for idx in np.ndindex(arr.shape):
        if arr[idx] < 0:
            raise InvalidValuation(f"{label}: negative value at {idx}")
    for ax in range(arr.ndim):
        if arr.shape[ax] < 2:
            continue
        inc = np.diff(arr, axis=ax)
        for idx in np.ndindex(inc.shape):
            step = inc[idx]
            if step < 0:
                raise InvalidValuation(f"{label}: decreasing along coordinate {ax} at {idx}")
            if strict and ax == own and step == 0:
                raise InvalidValuation(
                    f"{label}: not strictly increasing in own signal at {idx}"
                )


class Valuation:
    """Interdependent valuations for n agents.

    ``grids`` holds one domain per agent for the single-signal settings and,
    for ``comb_multi_signal``, one list of domains per agent indexed by the
    non-empty bundles 1..2^m-1.  ``tables`` mirrors that layout: one table per
    agent in ``single_param``, otherwise one table per non-empty bundle.
    Bundles are bitmasks over the m items and the empty bundle is worth 0.
    """

    def __init__(self, setting, grids, tables, m: int = 0, strict: bool = True):
        self.setting = Setting(setting)
        self.strict = strict
        n = len(grids)
        if n < 1:
            raise InvalidValuation("need at least one agent")
        if len(tables) != n:
            raise InvalidValuation("one table entry per agent expected")
        self.n = n
        if self.setting is Setting.SINGLE_PARAM:
            if m != 0:
                raise InvalidValuation("single-parameter valuations have m = 0")
            self.m = 0
            self.bundles: tuple = (None,)
        else:
            if m < 1:
                raise InvalidValuation("combinatorial valuations need m >= 1")
            self.m = m
            self.bundles = tuple(range(1, 2**m))

        if self.setting is Setting.COMB_MULTI_SIGNAL:
            per = []
            for i, g in enumerate(grids):
                if len(g) != len(self.bundles):
                    raise InvalidValuation(f"agent {i}: one domain per non-empty bundle expected")
                per.append(tuple(make_domain(d) for d in g))
            self.grids = tuple(per)
        else:
            self.grids = tuple(make_domain(d) for d in grids)

        self._tables: dict = {}
        for i in range(n):
            if self.setting is Setting.SINGLE_PARAM:
                entries = {None: tables[i]}
            else:
                if len(tables[i]) != len(self.bundles):
                    raise InvalidValuation(f"agent {i}: one table per non-empty bundle expected")
                entries = dict(zip(self.bundles, tables[i]))
            for T, data in entries.items():
                grid = self.grid(T)
                arr = as_table(data, tuple(len(d) for d in grid))
                _check_table(arr, i, strict, f"agent {i} bundle {T}")
                self._tables[(i, T)] = arr
        self._types = tuple(self._make_types(i) for i in range(n))

    # grids and profiles

    def grid(self, bundle=None) -> tuple[tuple[Fraction, ...], ...]:
        """Domains of the coordinates of the tables for ``bundle``."""
        if self.setting is Setting.COMB_MULTI_SIGNAL:
            pos = self.bundles.index(bundle)
            return tuple(g[pos] for g in self.grids)
        return self.grids

    def table(self, agent: int, bundle=None) -> np.ndarray:
        if self.setting is Setting.SINGLE_PARAM:
            bundle = None
        return self._tables[(agent, bundle)]

    def tables(self) -> Iterator[tuple[int, object, np.ndarray]]:
        for (i, T), arr in self._tables.items():
            yield i, T, arr

    def _make_types(self, i: int) -> tuple:
        if self.setting is Setting.COMB_MULTI_SIGNAL:
            return tuple(itertools.product(*(range(len(d)) for d in self.grids[i])))
        return tuple(range(len(self.grids[i])))

    def types(self, agent: int) -> tuple:
        """Every report agent ``agent`` can make, as grid indices."""
        return self._types[agent]

    def zero_type(self, agent: int):
        if self.setting is Setting.COMB_MULTI_SIGNAL:
            return (0,) * len(self.bundles)
        return 0

    def profiles(self) -> Iterator[tuple]:
        return itertools.product(*self._types)

    def profile_count(self) -> int:
        return math.prod(len(t) for t in self._types)

    def point(self, profile, bundle=None) -> tuple[int, ...]:
        """Index of ``profile`` in the table for ``bundle``."""
        if self.setting is Setting.COMB_MULTI_SIGNAL:
            pos = bundle - 1
            return tuple(p[pos] for p in profile)
        return tuple(profile)

    def value(self, agent: int, bundle, profile) -> Fraction:
        """Unchecked lookup; bundle 0 is the empty bundle."""
        if self.setting is Setting.SINGLE_PARAM:
            return self._tables[(agent, None)][tuple(profile)]
        if bundle == 0:
            return Fraction(0)
        return self._tables[(agent, bundle)][self.point(profile, bundle)]

    def validate_profile(self, profile) -> tuple:
        profile = tuple(profile)
        if len(profile) != self.n:
            raise InvalidProfile(f"profile has {len(profile)} entries, expected {self.n}")
        for i, t in enumerate(profile):
            if t not in self._types[i]:
                raise InvalidProfile(f"agent {i}: signal index {t!r} out of range")
        return profile

    def signal_value(self, agent: int, index: int, bundle=None) -> Fraction:
        return self.grid(bundle)[agent][index]

    @property
    def k(self) -> int | None:
        """Common grid size when every domain is exactly {0, ..., k-1}."""
        if self.setting is Setting.COMB_MULTI_SIGNAL:
            return None
        sizes = {len(d) for d in self.grids}
        if len(sizes) != 1:
            return None
        (k,) = sizes
        if all(d == tuple(Fraction(x) for x in range(k)) for d in self.grids):
            return k
        return None


def with_type(profile: tuple, agent: int, t) -> tuple:
    return profile[:agent] + (t,) + profile[agent + 1:]


def with_zeros(valuation: Valuation, profile: tuple, agents) -> tuple:
    out = list(profile)
    for j in agents:
        out[j] = valuation.zero_type(j)
    return tuple(out)


def evaluate(valuation: Valuation, agent: int, bundle, profile) -> Fraction:
    if not 0 <= agent < valuation.n:
        raise InvalidProfile(f"no agent {agent}")
    profile = valuation.validate_profile(profile)
    if valuation.setting is not Setting.SINGLE_PARAM:
        if bundle is None or not 0 <= bundle < 2**valuation.m:
            raise InvalidProfile(f"no bundle {bundle!r}")
    return valuation.value(agent, bundle, profile)


# d-SOS and strong-SOS


@dataclass(frozen=True)
class SosWitness:
    """Four table points whose increments break the d-SOS inequality.

    The low increment runs from ``low_from`` to ``low_to`` and the high one
    from ``high_from`` to ``high_to``; ``lhs = d * low`` and ``rhs = high``.
    """

    coord: int
    low_from: tuple[int, ...]
    low_to: tuple[int, ...]
    high_from: tuple[int, ...]
    high_to: tuple[int, ...]
    d: Fraction
    lhs: Fraction
    rhs: Fraction

    def replays(self, table: np.ndarray) -> bool:
        low = table[self.low_to] - table[self.low_from]
        high = table[self.high_to] - table[self.high_from]
        return self.d * low == self.lhs and high == self.rhs and self.lhs < self.rhs


@dataclass(frozen=True)
class SosReport:
    holds: bool
    witness: SosWitness | None
    tightest_d: Fraction | None  # None: no finite d works
    skipped: int = 0
    agent: int | None = None
    bundle: object = None


def scaled_ints(arr: np.ndarray) -> np.ndarray:
    """Multiply a Fraction table by the lcm of its denominators."""
    lcm = 1
    for x in arr.flat:
        lcm = math.lcm(lcm, x.denominator)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        x = arr[idx]
        out[idx] = x.numerator * (lcm // x.denominator)
    return out


def _prefix_min(arr: np.ndarray, axes) -> np.ndarray:
    out = arr
    for ax in axes:
        if out.shape[ax] > 1:
            out = np.minimum.accumulate(out, axis=ax)
    return out


def _worst_ratio(inc: np.ndarray, valid: np.ndarray, axes):
    """Largest inc[hi] / inc[lo] over valid lo <= hi along ``axes``.

    Returns (ratio or None if unbounded, hi index).  Ratios of 0/0 count as 1.
    """
    big = max((v for v in inc[valid].flat), default=0) + 1
    masked = np.where(valid, inc, big)
    pm = _prefix_min(masked, axes)
    worst = Fraction(1)
    where = None
    for idx in np.ndindex(inc.shape):
        if not valid[idx]:
            continue
        hi = inc[idx]
        if hi <= 0:
            continue
        lo = pm[idx]
        if lo == 0:
            return None, idx
        r = Fraction(hi, lo)
        if r > worst:
            worst, where = r, idx
    return worst, where


def _argmin_below(inc: np.ndarray, valid: np.ndarray, hi: tuple, axes) -> tuple:
    ranges = []
    for ax, h in enumerate(hi):
        ranges.append(range(h + 1) if ax in axes else (h,))
    best = None
    for idx in itertools.product(*ranges):
        if valid[idx] and (best is None or inc[idx] < inc[best]):
            best = idx
    return best


def _table_increments(table: np.ndarray, grid, strong: bool):
    """Yield (coord, own_from, own_to, inc, valid, axes, skipped) blocks.

    ``own_from``/``own_to`` map an index on the own axis of ``inc`` to the
    start and end index on the table axis.
    """
    ints = scaled_ints(table)
    nd = table.ndim
    for j in range(nd):
        size = table.shape[j]
        if size < 2:
            continue
        if not strong:
            inc = np.diff(ints, axis=j)
            valid = np.ones(inc.shape, dtype=bool)
            axes = [a for a in range(nd) if a != j]
            yield j, (lambda a: a), (lambda a: a + 1), inc, valid, axes, 0
            continue
        dom = grid[j]
        pos = {v: a for a, v in enumerate(dom)}
        deltas = sorted({b - a for a in dom for b in dom if b > a})
        for delta in deltas:
            target = {a: pos[dom[a] + delta] for a in range(size) if dom[a] + delta in pos}
            inc = np.zeros(ints.shape, dtype=object)
            valid = np.zeros(ints.shape, dtype=bool)
            for a, b in target.items():
                sl_a = [slice(None)] * nd
                sl_b = [slice(None)] * nd
                sl_a[j], sl_b[j] = a, b
                inc[tuple(sl_a)] = ints[tuple(sl_b)] - ints[tuple(sl_a)]
                valid[tuple(sl_a)] = True
            skipped = (size - len(target)) * (ints.size // size)
            yield j, (lambda a: a), (lambda a, t=target: t[a]), inc, valid, list(range(nd)), skipped


def _table_sos(table: np.ndarray, grid, d: Fraction, strong: bool) -> SosReport:
    d = to_fraction(d)
    if d < 1:
        raise InvalidParams("d must be at least 1")
    worst = Fraction(1)
    unbounded = False
    witness = None
    worst_block = None
    skipped = 0
    for j, f_from, f_to, inc, valid, axes, skip in _table_increments(table, grid, strong):
        skipped += skip
        r, hi = _worst_ratio(inc, valid, axes)
        if r is None or (not unbounded and r > worst):
            if r is None:
                unbounded = True
            else:
                worst = r
            worst_block = (j, f_from, f_to, inc, valid, axes, hi)
        if unbounded:
            # keep scanning only for the skip count
            continue
    tightest = None if unbounded else worst
    holds = tightest is not None and tightest <= d
    if not holds:
        j, f_from, f_to, inc, valid, axes, hi = worst_block
        lo = _argmin_below(inc, valid, hi, axes)

        def ends(p):
            a, b = list(p), list(p)
            a[j], b[j] = f_from(p[j]), f_to(p[j])
            return tuple(a), tuple(b)

        lf, lt = ends(lo)
        hf, ht = ends(hi)
        witness = SosWitness(
            coord=j,
            low_from=lf,
            low_to=lt,
            high_from=hf,
            high_to=ht,
            d=d,
            lhs=d * (table[lt] - table[lf]),
            rhs=table[ht] - table[hf],
        )
    return SosReport(holds, witness, tightest, skipped)


def table_d_sos(table: np.ndarray, d=1) -> SosReport:
    """d-SOS over every own-step and every comparable pair of other coordinates."""
    return _table_sos(table, None, d, strong=False)


def table_strong_sos(table: np.ndarray, grid, d=1) -> SosReport:
    """Strong d-SOS: the comparison also shifts the own coordinate."""
    return _table_sos(table, grid, d, strong=True)


def table_d_sos_local(table: np.ndarray, d=1) -> SosReport:
    """Consecutive own steps against single-step neighbours only.

    For d = 1 this is equivalent to the full check; for d > 1 it is only a
    necessary condition, so ``tightest_d`` here is the local ratio.
    """
    d = to_fraction(d)
    worst = Fraction(1)
    unbounded = False
    witness = None
    for j in range(table.ndim):
        if table.shape[j] < 2:
            continue
        inc = np.diff(table, axis=j)
        for idx in np.ndindex(inc.shape):
            for ax in range(table.ndim):
                if ax == j or idx[ax] + 1 >= inc.shape[ax]:
                    continue
                up = list(idx)
                up[ax] += 1
                up = tuple(up)
                lo, hi = inc[idx], inc[up]
                if hi <= 0:
                    continue
                if lo == 0:
                    r = None
                else:
                    r = hi / lo
                bad = r is None or r > d
                if r is None:
                    unbounded = True
                elif r > worst:
                    worst = r
                if bad and witness is None:
                    lf, lt = list(idx), list(idx)
                    lt[j] += 1
                    hf, ht = list(up), list(up)
                    ht[j] += 1
                    witness = SosWitness(j, tuple(lf), tuple(lt), tuple(hf), tuple(ht), d, d * lo, hi)
    return SosReport(witness is None, witness, None if unbounded else worst)


def table_sos_bruteforce(table: np.ndarray, grid, d=1, strong: bool = False) -> SosReport:
    """Literal enumeration of the definition; slow, used as a test oracle."""
    d = to_fraction(d)
    nd = table.ndim
    shape = table.shape
    worst = Fraction(1)
    unbounded = False
    witness = None
    skipped = 0
    pts = list(np.ndindex(shape))
    for j in range(nd):
        dom = grid[j] if grid is not None else tuple(Fraction(a) for a in range(shape[j]))
        pos = {v: a for a, v in enumerate(dom)}
        for lo in pts:
            for hi in pts:
                if any(lo[a] > hi[a] for a in range(nd)):
                    continue
                if not strong and lo[j] != hi[j]:
                    continue
                for b in range(shape[j]):
                    delta = dom[b] - dom[lo[j]]
                    if delta <= 0:
                        continue
                    hb = pos.get(dom[hi[j]] + delta)
                    if hb is None:
                        skipped += 1
                        continue
                    lt = lo[:j] + (b,) + lo[j + 1:]
                    ht = hi[:j] + (hb,) + hi[j + 1:]
                    low = table[lt] - table[lo]
                    high = table[ht] - table[hi]
                    if high <= 0:
                        continue
                    if low == 0:
                        unbounded = True
                        r = None
                    else:
                        r = high / low
                        worst = max(worst, r)
                    if (r is None or r > d) and witness is None:
                        witness = SosWitness(j, lo, lt, hi, ht, d, d * low, high)
    return SosReport(witness is None, witness, None if unbounded else worst, skipped)


def check_d_sos(valuation: Valuation, agent: int, bundle=None, d=1) -> SosReport:
    table = valuation.table(agent, bundle)
    rep = table_d_sos(table, d)
    return SosReport(rep.holds, rep.witness, rep.tightest_d, rep.skipped, agent, bundle)


def check_strong_sos(valuation: Valuation, agent: int, bundle=None, d=1) -> SosReport:
    table = valuation.table(agent, bundle)
    rep = table_strong_sos(table, valuation.grid(bundle), d)
    return SosReport(rep.holds, rep.witness, rep.tightest_d, rep.skipped, agent, bundle)


def check_all(valuation: Valuation, d=1, strong: bool = False) -> SosReport:
    """Run the check on every table; report the first failure and the max tightest d."""
    first_bad = None
    tight: Fraction | None = Fraction(1)
    skipped = 0
    for i in range(valuation.n):
        for T in valuation.bundles:
            rep = (check_strong_sos if strong else check_d_sos)(valuation, i, T, d)
            skipped += rep.skipped
            if rep.tightest_d is None:
                tight = None
            elif tight is not None:
                tight = max(tight, rep.tightest_d)
            if not rep.holds and first_bad is None:
                first_bad = rep
    if first_bad is None:
        return SosReport(True, None, tight, skipped)
    return SosReport(False, first_bad.witness, tight, skipped, first_bad.agent, first_bad.bundle)


def tightest_d(valuation: Valuation, strong: bool = False) -> Fraction | None:
    return check_all(valuation, 1, strong).tightest_d


# separability


@dataclass(frozen=True)
class SeparableDecomposition:
    """v_iT = g_iT(others) + h_iT(own), with g = v(., 0_i) and h(0) = 0.

    ``g[(i, T)]`` is the table with agent i's axis removed and ``h[(i, T)]``
    is indexed by agent i's own grid index.
    """

    g: Mapping
    h: Mapping

    def g_value(self, agent: int, bundle, point: tuple[int, ...]) -> Fraction:
        return self.g[(agent, bundle)][point[:agent] + point[agent + 1:]]

    def h_value(self, agent: int, bundle, own_index: int) -> Fraction:
        return self.h[(agent, bundle)][own_index]


def decompose_table(table: np.ndarray, own: int):
    """Split a table into (g, h) or return None when it is not separable."""
    g = np.take(table, 0, axis=own)
    base = [0] * table.ndim
    h = []
    for a in range(table.shape[own]):
        base[own] = a
        h.append(table[tuple(base)] - table[(0,) * table.ndim])
    for idx in np.ndindex(table.shape):
        if table[idx] != g[idx[:own] + idx[own + 1:]] + h[idx[own]]:
            return None
    if any(b < a for a, b in zip(h, h[1:])):
        return None
    if g.ndim and not table_d_sos(g, 1).holds:
        return None
    g = g.copy()
    g.flags.writeable = False
    return g, tuple(h)


def check_separable(valuation: Valuation) -> SeparableDecomposition | None:
    gs, hs = {}, {}
    for i, T, table in valuation.tables():
        parts = decompose_table(table, i)
        if parts is None:
            return None
        gs[(i, T)], hs[(i, T)] = parts
    return SeparableDecomposition(gs, hs)


# single crossing for unit demand


@dataclass(frozen=True)
class CrossingWitness:
    agent: int
    item: int
    rival: int
    low: tuple
    high: tuple
    own_increment: Fraction
    rival_increment: Fraction


@dataclass(frozen=True)
class CrossingReport:
    holds: bool
    witness: CrossingWitness | None = None


def check_single_crossing_ud(valuation: Valuation) -> CrossingReport:
    """Own signal moves own singleton value at least as much as any rival's.

    Only singleton bundles are inspected; unit-demand values of larger
    bundles are determined by them.
    """
    if valuation.setting is not Setting.COMB_SINGLE_SIGNAL:
        raise InvalidParams("single crossing is checked on single-signal combinatorial valuations")
    n = valuation.n
    for i in range(n):
        for low in valuation.profiles():
            if low[i] + 1 >= len(valuation.types(i)):
                continue
            high = with_type(low, i, low[i] + 1)
            for item in range(valuation.m):
                T = 1 << item
                own = valuation.value(i, T, high) - valuation.value(i, T, low)
                for l in range(n):
                    if l == i:
                        continue
                    other = valuation.value(l, T, high) - valuation.value(l, T, low)
                    if other > own:
                        return CrossingReport(False, CrossingWitness(i, item, l, low, high, own, other))
    return CrossingReport(True)


# averaging inequalities


@dataclass(frozen=True)
class KeyLemmaResult:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def key_lemma_check(valuation: Valuation, agent: int, bundle, profile, d=1) -> KeyLemmaResult:
    """Average of v_i over all ways of zeroing a subset of the other agents.

    The claim is that this average is at least v_i(s) / (d + 1).
    """
    d = to_fraction(d)
    profile = valuation.validate_profile(profile)
    others = [j for j in range(valuation.n) if j != agent]
    total = Fraction(0)
    for r in range(len(others) + 1):
        for zeroed in itertools.combinations(others, r):
            total += valuation.value(agent, bundle, with_zeros(valuation, profile, zeroed))
    lhs = total / 2 ** len(others)
    rhs = valuation.value(agent, bundle, profile) / (d + 1)
    return KeyLemmaResult(lhs, rhs, lhs >= rhs)


def sm_sets_check(
    valuation: Valuation,
    agent: int,
    bundle,
    s_a: Mapping[int, Fraction],
    y_a: Mapping[int, Fraction],
    s_b: Mapping[int, Fraction],
    s_b_high: Mapping[int, Fraction],
    d=1,
) -> bool:
    """Raising the A-coordinates by y_A gains more at s_B than at s'_B >= s_B.

    Signals are given as values on the grid of the table for ``bundle``.
    """
    d = to_fraction(d)
    grid = valuation.grid(bundle)
    table = valuation.table(agent, bundle)
    a_set, b_set = set(s_a), set(s_b)
    if set(y_a) != a_set or set(s_b_high) != b_set or a_set & b_set:
        raise InvalidParams("A and B must partition the coordinates")
    if a_set | b_set != set(range(valuation.n)):
        raise InvalidParams("A and B must cover every agent")

    def index(j, v):
        try:
            return grid[j].index(to_fraction(v))
        except ValueError:
            raise GridMisaligned(f"coordinate {j}: value {v} is not on the grid") from None

    if any(to_fraction(s_b[j]) > to_fraction(s_b_high[j]) for j in b_set):
        raise InvalidParams("need s_B <= s'_B")
    if any(to_fraction(y_a[j]) < 0 for j in a_set):
        raise InvalidParams("y_A must be non-negative")

    def point(a_vals, b_vals):
        pt = [0] * valuation.n
        for j in a_set:
            pt[j] = index(j, a_vals[j])
        for j in b_set:
            pt[j] = index(j, b_vals[j])
        return tuple(pt)

    raised = {j: to_fraction(s_a[j]) + to_fraction(y_a[j]) for j in a_set}
    low_gain = table[point(raised, s_b)] - table[point(s_a, s_b)]
    high_gain = table[point(raised, s_b_high)] - table[point(s_a, s_b_high)]
    return d * low_gain >= high_gain
