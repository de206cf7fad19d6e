"""Named counterexample instances, random valuation families, lower-bound searches."""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapExceeded, GenerationFailed, InvalidParams
from .feasibility import FeasibilitySystem, close_downward, enumerate_allocations, single_item
from .instance import Instance, welfare
from .oracle import opt_welfare
from .valuation import (
    Setting,
    Valuation,
    check_all,
    check_separable,
    to_fraction,
    with_type,
)
from .verifier import (
    audit_monotone,
    build_cycle_graph,
    min_cycle_weight,
    tabulated_lotteries,
)

SQRT2_UPPER = Fraction(239, 169)


@dataclass(frozen=True)
class Claim:
    quantity: str
    bound: Fraction
    direction: str  # "<=", ">=" or "~"


@dataclass(frozen=True)
class NamedInstance:
    id: str
    params: dict
    instance: Instance
    expected_claim: Claim


def _fill(shape, fn):
    arr = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        arr[idx] = Fraction(fn(idx))
    return arr


def _unit_demand(tables_by_item: list) -> list:
    """Per-bundle tables for one agent: a bundle is worth its best item."""
    m = len(tables_by_item)
    out = []
    for T in range(1, 2**m):
        items = [tables_by_item[j] for j in range(m) if T >> j & 1]
        best = items[0]
        for t in items[1:]:
            best = np.maximum(best, t)
        out.append(best)
    return out


def ex_1_2(H=100) -> NamedInstance:
    H = to_fraction(H)
    val = Valuation(
        Setting.SINGLE_PARAM,
        [[0, 1], [0]],
        [[[1], [2]], [[0], [H]]],
    )
    inst = Instance(val, single_item(2), name="EX_1_2", metadata={"H": str(H)})
    return NamedInstance("EX_1_2", {"H": H}, inst, Claim("best deterministic ratio", 2 / H, "<="))


def ex_1_3(n=3, eps=Fraction(1, 100)) -> NamedInstance:
    eps = to_fraction(eps)
    if n < 2:
        raise InvalidParams("EX_1_3 needs n >= 2")
    shape = (2,) * n
    tables = [_fill(shape, lambda s, i=i: math.prod(s[j] for j in range(n) if j != i) + eps * s[i]) for i in range(n)]
    val = Valuation(Setting.SINGLE_PARAM, [[0, 1]] * n, tables)
    inst = Instance(val, single_item(n), name="EX_1_3", metadata={"eps": str(eps)})
    bound = Fraction(1, n) + (n - 1) * eps
    return NamedInstance("EX_1_3", {"n": n, "eps": eps}, inst, Claim("best ratio at (1,...,1,0)", bound, "<="))


def lb_sos_2(H=100, eps=Fraction(1, 100)) -> NamedInstance:
    H, eps = to_fraction(H), to_fraction(eps)
    val = Valuation(Setting.SINGLE_PARAM, [[0, 1], [0]], [[[1], [1 + eps]], [[0], [H]]])
    inst = Instance(val, single_item(2), name="LB_SOS_2", metadata={"H": str(H), "eps": str(eps)})
    return NamedInstance(
        "LB_SOS_2", {"H": H, "eps": eps}, inst, Claim("best monotone randomized ratio", Fraction(1, 2) + 2 / H, "<=")
    )


def lb_dsos(d=16, eps=Fraction(1, 100)) -> NamedInstance:
    d, eps = to_fraction(d), to_fraction(eps)
    root = math.isqrt(int(d)) if d.denominator == 1 else 0
    if root < 2 or root * root != d:
        raise InvalidParams("LB_DSOS needs d a perfect square >= 4")
    n = root

    def v(i, s):
        others = [s[j] for j in range(n) if j != i]
        base = d if all(others) else sum(others)
        return base + eps * s[i]

    tables = [_fill((2,) * n, lambda s, i=i: v(i, s)) for i in range(n)]
    val = Valuation(Setting.SINGLE_PARAM, [[0, 1]] * n, tables)
    inst = Instance(val, single_item(n), name="LB_DSOS", metadata={"d": str(d), "eps": str(eps)})
    return NamedInstance(
        "LB_DSOS", {"d": d, "eps": eps}, inst, Claim("best monotone randomized ratio", Fraction(2 * root) / d, "<=")
    )


def lb_dc_n1(n=3, H=1000) -> NamedInstance:
    H = to_fraction(H)
    if n < 3:
        raise InvalidParams("LB_DC_N1 needs n >= 3")
    shape = (2,) + (1,) * (n - 1)
    tables = [_fill(shape, lambda s: 1 + H * s[0])]
    tables += [_fill(shape, lambda s: H * s[0]) for _ in range(n - 1)]
    val = Valuation(Setting.SINGLE_PARAM, [[0, 1]] + [[0]] * (n - 1), tables)
    rest = range(1, n)
    family = [(0,)] + [c for r in range(n) for c in itertools.combinations(rest, r)]
    inst = Instance(val, FeasibilitySystem(n, family), name="LB_DC_N1", metadata={"H": str(H)})
    return NamedInstance(
        "LB_DC_N1", {"n": n, "H": H}, inst, Claim("best deterministic ratio", Fraction(1, n - 1) + 1 / H, "<=")
    )


def ud_det(H=100, eps=Fraction(1, 100)) -> NamedInstance:
    H, eps = to_fraction(H), to_fraction(eps)
    col = lambda lo, hi: _fill((2, 1), lambda s: hi if s[0] else lo)  # noqa: E731
    agent0 = _unit_demand([col(1, 1 + H + eps), col(0, H)])
    agent1 = _unit_demand([col(0, H), col(1, 1)])
    val = Valuation(Setting.COMB_SINGLE_SIGNAL, [[0, 1], [0]], [agent0, agent1], m=2)
    inst = Instance(val, name="UD_DET", metadata={"H": str(H), "eps": str(eps), "unit_demand": True})
    return NamedInstance(
        "UD_DET", {"H": H, "eps": eps}, inst, Claim("best deterministic ratio", Fraction(1, 2) + 3 / H, "<=")
    )


def ud_rand(H=10000) -> NamedInstance:
    H = to_fraction(H)
    r = SQRT2_UPPER

    def tab(v00, v01, v10, v11):
        return _fill((2, 2), lambda s: ((v00, v01), (v10, v11))[s[0]][s[1]])

    agent0 = _unit_demand([tab(1, 1, 1 + r * H, 1 + r * H), tab(0, H, H, H)])
    agent1 = _unit_demand([tab(0, H, H, H), tab(1, 1 + r * H, 1, 1 + r * H)])
    # values follow the construction exactly, which keeps some own steps flat
    val = Valuation(Setting.COMB_SINGLE_SIGNAL, [[0, 1], [0, 1]], [agent0, agent1], m=2, strict=False)
    inst = Instance(val, name="UD_RAND", metadata={"H": str(H), "sqrt2": f"{r.numerator}/{r.denominator}", "unit_demand": True})
    target = (2 + r) / 4
    return NamedInstance("UD_RAND", {"H": H}, inst, Claim("best randomized ratio", target, "~"))


def oil_lease() -> NamedInstance:
    """One item; the rival's value reacts more to agent 0's signal than agent 0's own."""
    val = Valuation(
        Setting.COMB_SINGLE_SIGNAL,
        [[1, 2], [0]],
        [[[[1], [3]]], [[[1], [4]]]],
        m=1,
    )
    inst = Instance(val, name="OIL_LEASE")
    return NamedInstance("OIL_LEASE", {}, inst, Claim("single crossing", Fraction(0), "fails"))


NAMED = {
    "EX_1_2": ex_1_2,
    "EX_1_3": ex_1_3,
    "LB_SOS_2": lb_sos_2,
    "LB_DSOS": lb_dsos,
    "LB_DC_N1": lb_dc_n1,
    "UD_DET": ud_det,
    "UD_RAND": ud_rand,
    "OIL_LEASE": oil_lease,
}


def make_named(id: str, **params) -> NamedInstance:
    try:
        build = NAMED[id.upper()]
    except KeyError:
        raise InvalidParams(f"unknown named instance {id!r}; choose from {sorted(NAMED)}") from None
    return build(**params)


# random families

FAMILIES = ("SOS_CONCAVE_SUM", "SEPARABLE", "STRONG_SOS", "D_SOS", "D_STRONG_SOS")


def parse_family(family: str, d=None) -> tuple[str, Fraction]:
    """Accept "D_SOS(2)" style names as well as a separate d."""
    m = re.fullmatch(r"\s*([A-Z_]+)\s*(?:\(\s*([0-9/]+)\s*\))?\s*", family.upper())
    if not m or m.group(1) not in FAMILIES:
        raise InvalidParams(f"unknown family {family!r}; choose from {FAMILIES}")
    name = m.group(1)
    if m.group(2):
        d = Fraction(m.group(2))
    if name.startswith("D_"):
        d = Fraction(2) if d is None else to_fraction(d)
        if d < 1:
            raise InvalidParams("d must be at least 1")
    else:
        d = Fraction(1)
    return name, d


def _steps(rng: random.Random, k: int, strict: bool, concave: bool) -> list[int]:
    lo = 1 if strict else 0
    inc = [rng.randint(lo, 3) for _ in range(k - 1)]
    if concave:
        inc.sort(reverse=True)
    out = [0]
    for x in inc:
        out.append(out[-1] + x)
    return out


def _outer(rng: random.Random, top: int, kind: str, d: Fraction) -> list[Fraction]:
    """f on 0..top as cumulative slopes; concave, or slopes within [1, d]."""
    if kind == "concave":
        slopes = sorted((Fraction(rng.randint(1, 8), 2) for _ in range(top)), reverse=True)
    else:
        num = int(d * 4)
        slopes = [Fraction(rng.randint(4, max(4, num)), 4) for _ in range(top)]
    f = [Fraction(rng.randint(0, 3))]
    for s in slopes:
        f.append(f[-1] + s)
    return f


def _sum_table(rng, n, k, own, kind, d, concave_inner, scale=Fraction(1)):
    """v(s) = f(sum_j g_j(s_j)) with g_own strictly increasing."""
    gs = [_steps(rng, k, strict=(j == own), concave=concave_inner) for j in range(n)]
    top = sum(g[-1] for g in gs)
    f = _outer(rng, top, kind, d)
    return _fill((k,) * n, lambda s: scale * f[sum(gs[j][s[j]] for j in range(n))])


def _random_system(rng: random.Random, n: int) -> FeasibilitySystem:
    gens = []
    for _ in range(rng.randint(1, 3)):
        size = rng.randint(1, n)
        gens.append(tuple(sorted(rng.sample(range(n), size))))
    return close_downward(gens, n)


def _separable_tables(rng, n, k, own):
    others = [j for j in range(n) if j != own]
    if others:
        gs = {j: _steps(rng, k, strict=False, concave=False) for j in others}
        f = _outer(rng, sum(g[-1] for g in gs.values()), "concave", Fraction(1))
    h = _steps(rng, k, strict=True, concave=False)
    shift = rng.randint(0, 2)

    def v(s):
        g = f[sum(gs[j][s[j]] for j in others)] if others else Fraction(0)
        return g + h[s[own]] + shift

    return _fill((k,) * n, v)


def gen_random(family: str, n: int, m: int, k: int, seed: int, d=None, *, max_tries: int = 20) -> Instance:
    """Random instance from a structured family, deterministic per arguments.

    m = 0 gives a single-parameter instance with a random downward-closed
    system; m >= 1 gives a combinatorial one (multi-signal for SEPARABLE).
    """
    name, d = parse_family(family, d)
    if not 1 <= n <= 6:
        raise InvalidParams("gen_random supports 1 <= n <= 6")
    if not 0 <= m <= 3:
        raise InvalidParams("gen_random supports 0 <= m <= 3")
    if k not in (2, 4, 8):
        raise InvalidParams("gen_random supports k in {2, 4, 8}")
    rng = random.Random(f"{name}|{d}|{n}|{m}|{k}|{seed}")
    strong = name in ("STRONG_SOS", "D_STRONG_SOS")
    kind = "concave" if name in ("SOS_CONCAVE_SUM", "STRONG_SOS", "SEPARABLE") else "bounded"
    bundles = [None] if m == 0 else list(range(1, 2**m))
    for _ in range(max_tries):
        try:
            tables = []
            for i in range(n):
                per = []
                for _T in bundles:
                    scale = Fraction(rng.randint(1, 3))
                    if name == "SEPARABLE":
                        per.append(_separable_tables(rng, n, k, i))
                    else:
                        per.append(_sum_table(rng, n, k, i, kind, d, concave_inner=strong, scale=scale))
                tables.append(per[0] if m == 0 else per)
            if m == 0:
                val = Valuation(Setting.SINGLE_PARAM, [range(k)] * n, tables)
                system = _random_system(rng, n)
            elif name == "SEPARABLE":
                grids = [[range(k)] * len(bundles) for _ in range(n)]
                val = Valuation(Setting.COMB_MULTI_SIGNAL, grids, tables, m=m)
                system = None
            else:
                val = Valuation(Setting.COMB_SINGLE_SIGNAL, [range(k)] * n, tables, m=m)
                system = None
        except ValueError:
            continue
        if name == "SEPARABLE":
            ok = check_separable(val) is not None
        else:
            ok = check_all(val, d, strong=strong).holds
        if ok:
            meta = {"family": name, "seed": seed, "d": str(d), "n": n, "m": m, "k": k}
            return Instance(val, system, name=f"{name}-n{n}-m{m}-k{k}-s{seed}", metadata=meta)
    raise GenerationFailed(f"{name}: no valid instance after {max_tries} tries")


# lower-bound searches


@dataclass(frozen=True)
class LowerBoundResult:
    best_ratio: Fraction
    argmax: dict
    evaluated: int
    details: dict = field(default_factory=dict)


def _grid_count(step) -> int:
    step = to_fraction(step)
    if step <= 0 or step.numerator != 1:
        raise InvalidParams("grid_step must be 1/N for a positive integer N")
    return step.denominator


def verify_lb_sos2(H=100, eps=Fraction(1, 100), grid_step=Fraction(1, 200)) -> LowerBoundResult:
    """Best worst-case ratio of a monotone randomized single-item rule.

    Variables are x1(0), x1(1), x2(1); agent 2 has no signal and is worthless
    at s1 = 0, so x2(0) cannot help.  Floats steer the search; the returned
    ratio is recomputed exactly at the chosen grid point.
    """
    inst = lb_sos_2(H, eps).instance
    val = inst.valuation
    N = _grid_count(grid_step)
    a0, a1 = val.value(0, None, (0, 0)), val.value(0, None, (1, 0))
    b0, b1 = val.value(1, None, (0, 0)), val.value(1, None, (1, 0))
    opt0, opt1 = opt_welfare(inst, (0, 0))[1], opt_welfare(inst, (1, 0))[1]
    g = np.arange(N + 1) / N
    x10, x21 = np.meshgrid(g, g, indexing="ij")
    best, arg, count = -1.0, None, 0
    for j, x11 in enumerate(g):
        ok = (x10 <= x11 + 1e-12) & (x21 <= 1 - x11 + 1e-12)
        r0 = (x10 * float(a0) + (1 - x10) * float(b0)) / float(opt0)
        r0 = np.maximum(r0, x10 * float(a0) / float(opt0))
        r1 = (x11 * float(a1) + x21 * float(b1)) / float(opt1)
        worst = np.where(ok, np.minimum(r0, r1), -1.0)
        count += int(ok.sum())
        idx = np.unravel_index(int(np.argmax(worst)), worst.shape)
        if worst[idx] > best:
            best, arg = float(worst[idx]), (idx[0], j, idx[1])
    x10e, x11e, x21e = (Fraction(v, N) for v in arg)
    # at s1 = 0 the leftover probability may go to agent 2 when that helps
    r0 = max(x10e * a0 + (1 - x10e) * b0, x10e * a0) / opt0
    r1 = (x11e * a1 + x21e * b1) / opt1
    return LowerBoundResult(min(r0, r1), {"x1(0)": x10e, "x1(1)": x11e, "x2(1)": x21e}, count)


def _ud_rule(p: Fraction, q: Fraction):
    both_good = (1, 2)  # agent 0 gets a, agent 1 gets b
    swapped = (2, 1)
    return {
        (0, 0): [(both_good, q), ((0, 0), 1 - q)],
        (1, 0): [(both_good, p), (swapped, 1 - p)],
        (0, 1): [(both_good, p), (swapped, 1 - p)],
        (1, 1): [(both_good, Fraction(1))],
    }


def ud_rule_report(inst: Instance, p: Fraction, q: Fraction) -> tuple[Fraction, Fraction]:
    """(worst ratio, most negative cycle) of the symmetric rule with parameters p, q."""
    table = _ud_rule(p, q)
    x = tabulated_lotteries(inst, table)
    worst_cycle = Fraction(0)
    for i in range(2):
        for other in (0, 1):
            base = (None, other) if i == 0 else (other, None)
            worst_cycle = min(worst_cycle, min_cycle_weight(build_cycle_graph(x, inst, i, base)))
    ratios = []
    for prof, lottery in table.items():
        got = sum((pr * welfare(inst, alloc, prof) for alloc, pr in lottery), Fraction(0))
        ratios.append(got / opt_welfare(inst, prof)[1])
    return min(ratios), worst_cycle


def verify_lb_ud_rand(H=10000, grid_step=Fraction(1, 1000)) -> LowerBoundResult:
    """Search symmetric randomized unit-demand rules over (p, q).

    q is the chance of the efficient outcome at (0,0) and p the chance of the
    inefficient "own item" outcome when exactly one signal is high.  Only rules
    whose cycle graphs have no negative cycle are admitted.
    """
    inst = ud_rand(H).instance
    val = inst.valuation
    N = _grid_count(grid_step)

    def v(i, T, s):
        return float(val.value(i, T, s))

    A, B = 1, 2
    opt00 = float(opt_welfare(inst, (0, 0))[1])
    opt10 = float(opt_welfare(inst, (1, 0))[1])
    g = np.arange(N + 1) / N
    p, q = np.meshgrid(g, g, indexing="ij")
    # agent 0's two-cycle between own reports 0 and 1 with agent 1 at 0
    w_00 = q * v(0, A, (0, 0))
    w_01 = p * v(0, A, (0, 0)) + (1 - p) * v(0, B, (0, 0))
    w_11 = p * v(0, A, (1, 0)) + (1 - p) * v(0, B, (1, 0))
    w_10 = q * v(0, A, (1, 0))
    cycle = (w_00 - w_01) + (w_11 - w_10)
    r00 = q * (v(0, A, (0, 0)) + v(1, B, (0, 0))) / opt00
    r10 = (p * (v(0, A, (1, 0)) + v(1, B, (1, 0))) + (1 - p) * (v(0, B, (1, 0)) + v(1, A, (1, 0)))) / opt10
    worst = np.where(cycle >= -1e-9, np.minimum(r00, r10), -1.0)
    order = np.argsort(-worst, axis=None, kind="stable")
    for flat in order[:50]:
        i, j = np.unravel_index(int(flat), worst.shape)
        pe, qe = Fraction(int(i), N), Fraction(int(j), N)
        ratio, cyc = ud_rule_report(inst, pe, qe)
        if cyc >= 0:
            return LowerBoundResult(ratio, {"p": pe, "q": qe}, int((cycle >= -1e-9).sum()), {"min_cycle": cyc})
    raise GenerationFailed("no exactly feasible rule near the float optimum")


def verify_lb_dsos(d=16, eps=Fraction(1, 100), grid_step=Fraction(1, 50)) -> LowerBoundResult:
    """Grid search over monotone randomized rules on the d-SOS construction.

    The search fixes y = x(1, ..., 1) on the simplex grid.  At the profile
    where only agent i is low, monotonicity caps agent i's share at y_i and
    the rest goes to the best other agent; every other profile is left
    unconstrained.  That is a relaxation, so the value found bounds every
    monotone rule from above.
    """
    inst = lb_dsos(d, eps).instance
    val = inst.valuation
    n = inst.n
    N = _grid_count(grid_step)
    ones = (1,) * n
    top = [val.value(i, None, ones) for i in range(n)]
    opt_top = opt_welfare(inst, ones)[1]
    low = []
    for i in range(n):
        prof = with_type(ones, i, 0)
        own = val.value(i, None, prof)
        rival = max(val.value(j, None, prof) for j in range(n) if j != i)
        low.append((own, rival, opt_welfare(inst, prof)[1]))

    def exact(y):
        r = [sum((y[i] * top[i] for i in range(n)), Fraction(0)) / opt_top]
        for i, (own, rival, opt) in enumerate(low):
            share = y[i] if own >= rival else Fraction(0)
            r.append((share * own + (1 - share) * rival) / opt)
        return min(r)

    g = np.arange(N + 1)
    rest = np.array(list(itertools.product(range(N + 1), repeat=n - 1)), dtype=np.int64)
    best, arg, count = -1.0, None, 0
    topf = [float(t) for t in top]
    lowf = [(float(a), float(b), float(c)) for a, b, c in low]
    for y0 in g:
        ys = np.column_stack([np.full(len(rest), y0), rest])
        ok = ys.sum(axis=1) <= N
        ys = ys[ok] / N
        count += len(ys)
        if not len(ys):
            continue
        worst = ys @ np.array(topf) / float(opt_top)
        for i, (own, rival, opt) in enumerate(lowf):
            share = ys[:, i] if own >= rival else 0.0
            worst = np.minimum(worst, (share * own + (1 - share) * rival) / opt)
        k = int(np.argmax(worst))
        if worst[k] > best:
            best, arg = float(worst[k]), tuple(int(round(v * N)) for v in ys[k])
    y = [Fraction(a, N) for a in arg]
    return LowerBoundResult(exact(y), {f"x{i}(1..1)": y[i] for i in range(n)}, count)


def verify_lb_deterministic(id: str, *, max_profiles: int = 16, max_outcomes: int = 16, **params) -> LowerBoundResult:
    """Best worst-case ratio over every IC deterministic allocation rule.

    Rules are explored profile by profile with two prunings: an outcome whose
    own ratio cannot beat the best rule found so far is skipped, and for
    single-parameter instances a partial rule that already breaks
    monotonicity between two assigned profiles is abandoned.  Complete rules
    pass audit_monotone (single-parameter) or have no negative cycle on any
    agent's graph (combinatorial).
    """
    if id.upper() not in ("EX_1_2", "LB_DC_N1", "UD_DET"):
        raise InvalidParams("deterministic search supports EX_1_2, LB_DC_N1 and UD_DET")
    inst = make_named(id, **params).instance
    val = inst.valuation
    profiles = list(val.profiles())
    if len(profiles) > max_profiles:
        raise CapExceeded(f"{len(profiles)} profiles exceed the cap {max_profiles}")
    if inst.single_param:
        outcomes = list(inst.system.feasible_sets)
    else:
        outcomes = list(enumerate_allocations(inst.n, inst.m))
    if len(outcomes) > max_outcomes:
        raise CapExceeded(f"{len(outcomes)} outcomes per profile exceed the cap {max_outcomes}")

    options = []
    for prof in profiles:
        opt = opt_welfare(inst, prof)[1]
        scored = []
        for out in outcomes:
            w = welfare(inst, out, prof)
            scored.append((Fraction(1) if opt == 0 else w / opt, out))
        scored.sort(key=lambda t: -t[0])
        options.append(scored)

    def neighbours_ok(rule, pos):
        if not inst.single_param:
            return True
        prof = profiles[pos]
        for i in range(inst.n):
            for other, alloc in rule.items():
                if other[:i] + other[i + 1:] != prof[:i] + prof[i + 1:] or other == prof:
                    continue
                lo, hi = (other, prof) if other[i] < prof[i] else (prof, other)
                if i in rule[lo] and i not in rule[hi]:
                    return False
        return True

    def complete_ok(rule):
        if inst.single_param:
            return audit_monotone(lambda p: rule[p], inst).ok
        x = tabulated_lotteries(inst, {p: [(a, Fraction(1))] for p, a in rule.items()})
        for i in range(inst.n):
            seen = set()
            for prof in profiles:
                base = prof[:i] + (None,) + prof[i + 1:]
                if base in seen:
                    continue
                seen.add(base)
                if min_cycle_weight(build_cycle_graph(x, inst, i, base)) < 0:
                    return False
        return True

    best = [Fraction(-1), None]
    explored = [0]

    def search(pos, rule, current):
        if pos == len(profiles):
            explored[0] += 1
            if complete_ok(rule):
                best[0], best[1] = current, dict(rule)
            return
        prof = profiles[pos]
        for ratio, out in options[pos]:
            cand = min(current, ratio)
            if cand <= best[0]:
                break
            rule[prof] = out
            if neighbours_ok(rule, pos):
                search(pos + 1, rule, cand)
            del rule[prof]

    search(0, {}, Fraction(10**9))
    if best[1] is None:
        raise GenerationFailed("no IC deterministic rule found")
    return LowerBoundResult(best[0], {str(p): a for p, a in best[1].items()}, explored[0])
