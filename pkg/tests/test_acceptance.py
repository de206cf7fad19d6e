"""Acceptance suite: one PASS/FAIL line per criterion.

Every ratio and inequality is compared in exact rational arithmetic with zero
tolerance, except the randomized unit-demand constant, which is matched
within 0.01 of (2 + sqrt 2) / 4.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import single_param  # noqa: E402
from sosmech.errors import NegativeCycle  # noqa: E402
from sosmech.instances import (  # noqa: E402
    gen_random,
    ud_det,
    verify_lb_deterministic,
    verify_lb_dsos,
    verify_lb_sos2,
    verify_lb_ud_rand,
)
from sosmech.mechanisms import CoinRealization, Kind, MechanismOutcome, MechanismSpec, deterministic  # noqa: E402
from sosmech.oracle import coin_space, exact_expected_welfare, opt_welfare, other_self  # noqa: E402
from sosmech.sabotage import SABOTAGES, unclosed_system  # noqa: E402
from sosmech.valuation import check_all, key_lemma_check, with_type  # noqa: E402
from sosmech.verifier import (  # noqa: E402
    audit_downward_closure,
    audit_ic_ir,
    audit_monotone,
    build_cycle_graph,
    certify_ratio,
    deterministic_lotteries,
    find_negative_cycle,
    min_cycle_weight,
    realization_rule,
    replay_violation,
    synthesize_payments,
    utility,
    with_synthesized_payments,
)

F = Fraction
RESULTS: list[str] = []


def verdict(num: int, title: str, ok: bool, detail: str, started: float) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title} -- {detail} ({time.perf_counter() - started:.1f}s)"
    RESULTS.append(line)
    print(line)
    assert ok, line


def corpus(family, shapes, count, d=None):
    """``count`` instances cycling through (n, m, k) shapes, seeds 0, 1, ..."""
    return [gen_random(family, *shapes[j % len(shapes)], j, d=d) for j in range(count)]


def ratios_ok(spec, instances, bound_for):
    """Exact minimum ratio minus its bound over every profile; (ok, worst, profiles)."""
    worst, checked = None, 0
    for inst in instances:
        bound = bound_for(inst)
        rep = certify_ratio(spec, [inst], bound)
        checked += rep.checked
        if worst is None or rep.min_ratio - bound < worst[0] - worst[1]:
            worst = (rep.min_ratio, bound)
    return worst[0] >= worst[1], worst, checked


# 1. RS-V on single-parameter SOS instances

RS_V_SHAPES = [(n, 0, k) for k in (2, 4) for n in (2, 3, 4, 5)]


def test_rs_v_four_approximation():
    t0 = time.perf_counter()
    insts = corpus("SOS_CONCAVE_SUM", RS_V_SHAPES, 200)
    rep = certify_ratio(MechanismSpec(Kind.RS_V), insts, F(1, 4))
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 120
    verdict(1, "RS-V ratio >= 1/4", ok, f"{len(insts)} instances, {rep.checked} profiles, min {rep.min_ratio}, budget 120s", t0)


# 2. RS-V on d-SOS instances, d = 2


def test_rs_v_d_sos():
    t0 = time.perf_counter()
    d = 2
    insts = corpus("D_SOS", [(n, 0, k) for k in (2, 4) for n in (2, 3, 4)], 50, d=d)
    bound = F(1, 2 * (d + 1))
    rep = certify_ratio(MechanismSpec(Kind.RS_V, d=d), insts, bound)
    verdict(2, "RS-V on 2-SOS ratio >= 1/6", rep.passed, f"{len(insts)} instances, {rep.checked} profiles, min {rep.min_ratio}", t0)


# 3. RS-VCG: exhaustive audit and ratio

VCG_SHAPES = [(2, 1, 2), (2, 1, 4), (3, 1, 2), (3, 1, 4), (4, 1, 2), (4, 1, 4), (2, 2, 2), (3, 2, 2)]


def test_rs_vcg_audit_and_ratio():
    t0 = time.perf_counter()
    insts = corpus("SEPARABLE", VCG_SHAPES, 96) + [gen_random("SEPARABLE", 2, 2, 4, s) for s in range(4)]
    spec = MechanismSpec(Kind.RS_VCG)
    deviations, failures = 0, []
    for inst in insts:
        rep = audit_ic_ir(spec, inst, max_violations=1)
        deviations += rep.checked
        if not rep.ok:
            failures.append((inst.name, rep.first()))
    ratio = certify_ratio(spec, insts, F(1, 4))
    elapsed = time.perf_counter() - t0
    ok = not failures and ratio.passed and elapsed < 600
    detail = (
        f"{len(insts)} instances, {deviations} misreports audited, {len(failures)} violations, "
        f"min ratio {ratio.min_ratio}, budget 600s"
    )
    verdict(3, "RS-VCG IC-IR and ratio >= 1/4", ok, detail, t0)


# 4. k-HL and its two components

HL_SHAPES = [(n, m, k) for k in (2, 4) for n, m in ((2, 1), (3, 1), (2, 2), (3, 2))]


def component_bounds(inst, spec, part_kind, part_share, d=1):
    """Worst margin of the mechanism ratio and of both component inequalities."""
    k = inst.valuation.k
    hl = spec.kind is Kind.K_HL
    part_spec = MechanismSpec(part_kind)
    samp = MechanismSpec(Kind.RANDOM_SAMPLING_COMB)
    mix_coins = coin_space(spec, inst)
    ok = True
    worst = None
    for prof in inst.valuation.profiles():
        dec = other_self(inst, prof, d)
        if dec.optimum == 0:
            continue
        got = exact_expected_welfare(spec, inst, prof, coins=mix_coins)
        bound = F(1, k + 3) if hl else F(1, 2 * int(math.log2(k)) + 4)
        ratio = got / dec.optimum
        part = exact_expected_welfare(part_spec, inst, prof)
        sampled = exact_expected_welfare(samp, inst, prof)
        ok &= ratio >= bound
        ok &= part >= dec.self_part * part_share
        if hl:
            ok &= sampled >= dec.other / 4
        if worst is None or ratio < worst:
            worst = ratio
    return ok, worst


def test_k_hl_and_components():
    t0 = time.perf_counter()
    insts = corpus("SOS_CONCAVE_SUM", HL_SHAPES, 100)
    spec = MechanismSpec(Kind.K_HL)
    ok, worst = True, None
    for inst in insts:
        k = inst.valuation.k
        good, w = component_bounds(inst, spec, Kind.RANDOM_THRESHOLD, F(1, k - 1))
        ok &= good
        worst = w if worst is None or (w is not None and w < worst) else worst
    verdict(
        4,
        "k-HL >= 1/(k+3), threshold >= SELF/(k-1), sampling >= OTHER/4",
        ok,
        f"{len(insts)} instances, min mechanism ratio {worst}",
        t0,
    )


# 5. k-SS and the bucket component


def test_k_ss_and_bucket():
    t0 = time.perf_counter()
    insts = corpus("STRONG_SOS", HL_SHAPES, 100)
    spec = MechanismSpec(Kind.K_SS)
    ok, worst = True, None
    for inst in insts:
        lg = int(math.log2(inst.valuation.k))
        good, w = component_bounds(inst, spec, Kind.RANDOM_BUCKET, F(1, 2 * lg))
        ok &= good
        worst = w if worst is None or (w is not None and w < worst) else worst
    verdict(5, "k-SS >= 1/(2 log k + 4), bucket >= SELF/(2 log k)", ok, f"{len(insts)} instances, min mechanism ratio {worst}", t0)


# 6. d = 2 versions of both mixtures


def test_d_relaxed_mixtures():
    t0 = time.perf_counter()
    d = 2
    hl = MechanismSpec(Kind.K_HL, d=d)
    ss = MechanismSpec(Kind.K_SS, d=d)
    dsos = corpus("D_SOS", HL_SHAPES, 50, d=d)
    dstrong = corpus("D_STRONG_SOS", HL_SHAPES, 50, d=d)
    ok_hl, worst_hl, n_hl = ratios_ok(hl, dsos, lambda i: F(1, d * (i.valuation.k + 1) + 2))
    ok_ss, worst_ss, n_ss = ratios_ok(
        ss, dstrong, lambda i: F(1, d * (d + 1) * int(math.log2(i.valuation.k)) + 2 * (d + 1))
    )
    detail = (
        f"k-HL on {len(dsos)} 2-SOS instances worst {worst_hl[0]} vs {worst_hl[1]}; "
        f"k-SS on {len(dstrong)} strong 2-SOS instances worst {worst_ss[0]} vs {worst_ss[1]}"
    )
    verdict(6, "d = 2 mixture bounds", ok_hl and ok_ss, detail, t0)


# 7. averaging inequality at each instance's tightest d


def test_zeroing_average_on_corpus():
    t0 = time.perf_counter()
    insts = (
        corpus("SOS_CONCAVE_SUM", RS_V_SHAPES[:6], 30)
        + corpus("D_SOS", HL_SHAPES, 30, d=2)
        + corpus("STRONG_SOS", HL_SHAPES, 20)
        + corpus("D_STRONG_SOS", HL_SHAPES, 20, d=2)
        + corpus("SEPARABLE", VCG_SHAPES[:6], 20)
    )
    checked, bad = 0, []
    for inst in insts:
        val = inst.valuation
        d = check_all(val, 1).tightest_d
        if d is None:
            bad.append((inst.name, "no finite d"))
            continue
        for prof in val.profiles():
            for i in range(val.n):
                for T in val.bundles:
                    checked += 1
                    res = key_lemma_check(val, i, T, prof, d)
                    if not res.holds:
                        bad.append((inst.name, i, T, prof))
    verdict(7, "averaging inequality at tightest d", not bad, f"{len(insts)} instances, {checked} (agent, bundle, profile) checks, {len(bad)} failures", t0)


# 8. IC audit versus negative cycles


def efficient_rule(realization, instance, reports, with_payments=True):
    """Welfare-maximizing allocation with no payments; often not implementable."""
    return MechanismOutcome(opt_welfare(instance, reports)[0], (F(0),) * instance.n)


def graph_sources():
    spec_rsv, spec_thr = MechanismSpec(Kind.RS_V), MechanismSpec(Kind.RANDOM_THRESHOLD)
    spec_hl, spec_vcg = MechanismSpec(Kind.K_HL), MechanismSpec(Kind.RS_VCG)
    out = []
    for j in range(6):
        inst = gen_random("SOS_CONCAVE_SUM", 3, 0, 4, j)
        out += [(inst, deterministic(spec_rsv), r) for r, _ in coin_space(spec_rsv, inst)]
        comb = gen_random("SOS_CONCAVE_SUM", 2, 1, 4, j)
        out += [(comb, deterministic(spec_thr), r) for r, _ in coin_space(spec_thr, comb)]
        out += [(comb, deterministic(spec_hl), r) for r, _ in coin_space(spec_hl, comb)]
        sep = gen_random("SEPARABLE", 3, 1, 2, j)
        out += [(sep, deterministic(spec_vcg), r) for r, _ in coin_space(spec_vcg, sep)]
        # allocation rules with no valid payments
        out.append((comb, efficient_rule, CoinRealization()))
        out.append((gen_random("SOS_CONCAVE_SUM", 3, 1, 2, j), efficient_rule, CoinRealization()))
    out.append((ud_det().instance, efficient_rule, CoinRealization()))
    flat = single_param(2, 3, lambda i, s: 1, strict=False)
    parity = SABOTAGES["parity_tiebreak"][1]
    out += [(flat, parity, r) for r, _ in coin_space(MechanismSpec(Kind.RS_V), flat)]
    return out


def slice_audit(outcomes, instance, agent, base, types):
    """Direct IC check for one (agent, s_-i) using mechanism outcomes."""
    for a, t in enumerate(types):
        truth = with_type(base, agent, t)
        honest = utility(instance, agent, outcomes[a], truth)
        if any(utility(instance, agent, o, truth) > honest for o in outcomes):
            return False
    return True


def test_cycle_characterization():
    t0 = time.perf_counter()
    graphs = agree = negative = synthesized = synth_fail = realizations_audited = 0
    for inst, run, real in graph_sources():
        val = inst.valuation
        x = deterministic_lotteries(run, real, inst)
        realization_clean = True
        for i in range(inst.n):
            types = val.types(i)
            axes = [val.types(j) if j != i else (None,) for j in range(inst.n)]
            for base in itertools.product(*axes):
                graphs += 1
                outcomes = [run(real, inst, with_type(base, i, t)) for t in types]
                own_ok = slice_audit(outcomes, inst, i, base, types)
                graph = build_cycle_graph(x, inst, i, base)
                no_neg = find_negative_cycle(graph) is None and min_cycle_weight(graph) >= 0
                implementable = own_ok
                if no_neg:
                    synth = synthesize_payments(graph)
                    synthesized += 1
                    priced = [
                        MechanismOutcome(o.allocation, tuple(synth.payment(t) if j == i else F(0) for j in range(inst.n)))
                        for o, t in zip(outcomes, types)
                    ]
                    synth_ok = slice_audit(priced, inst, i, base, types)
                    synth_fail += not synth_ok
                    implementable = implementable or synth_ok
                else:
                    negative += 1
                    realization_clean = False
                    with pytest.raises(NegativeCycle):
                        synthesize_payments(graph)
                agree += implementable == no_neg
        if realization_clean:
            swapped = with_synthesized_payments(run, real, inst)
            rep = audit_ic_ir(MechanismSpec(Kind.RS_V), inst, mechanism=swapped, coins=[(real, F(1))])
            realizations_audited += 1
            synth_fail += not rep.ok
    ok = graphs >= 500 and agree == graphs and synth_fail == 0 and negative > 0
    detail = (
        f"{graphs} graphs, {agree} agree, {negative} with negative cycles, "
        f"{synthesized} synthesized, {realizations_audited} realizations re-audited, {synth_fail} synthesis failures"
    )
    verdict(8, "IC audit <=> no negative cycle", ok, detail, t0)


# 9. lower-bound searches


def test_lower_bound_searches():
    t0 = time.perf_counter()
    parts, ok = [], True
    runs = [
        ("two-agent SOS H=100", lambda: verify_lb_sos2(H=100), lambda r: r <= F(52, 100)),
        ("downward-closed n=3 H=1000", lambda: verify_lb_deterministic("LB_DC_N1", n=3, H=1000), lambda r: r <= F(501, 1000)),
        ("randomized unit-demand H=1e4", lambda: verify_lb_ud_rand(H=10**4), lambda r: abs(float(r) - (math.sqrt(2) + 2) / 4) <= 0.01),
        ("deterministic unit-demand H=100", lambda: verify_lb_deterministic("UD_DET", H=100), lambda r: r <= F(53, 100)),
    ]
    for label, search, check in runs:
        s = time.perf_counter()
        res = search()
        took = time.perf_counter() - s
        good = check(res.best_ratio) and took < 60
        ok &= good
        parts.append(f"{label}: {float(res.best_ratio):.4f} in {took:.1f}s")
    verdict(9, "lower-bound searches", ok, "; ".join(parts), t0)


# 10. d-SOS lower bound construction


def test_d_sos_lower_bound():
    t0 = time.perf_counter()
    d = 16
    res = verify_lb_dsos(d=d, grid_step=F(1, 50))
    target = 2 * math.sqrt(d) / d + 0.05
    ok = float(res.best_ratio) <= target
    verdict(10, "d=16 construction caps monotone rules", ok, f"best {float(res.best_ratio):.4f} <= {target:.2f} over {res.evaluated} rules", t0)


# 11. sabotaged variants


def test_sabotages_are_caught():
    t0 = time.perf_counter()
    caught = {}

    spec, broken = SABOTAGES["threshold_pays_too_little"]
    inst = gen_random("SOS_CONCAVE_SUM", 2, 1, 4, 2)
    v = audit_ic_ir(spec, inst, mechanism=broken).first()
    caught["off-by-one threshold payment"] = v is not None and replay_violation(v, broken, inst)

    spec, broken = SABOTAGES["parity_tiebreak"]
    flat = single_param(2, 3, lambda i, s: 1, strict=False)
    witness = None
    for r, _ in coin_space(spec, flat):
        rep = audit_monotone(realization_rule(spec, r, flat, broken), flat)
        if not rep.ok:
            agent, lo, hi = rep.witness
            rule = realization_rule(spec, r, flat, broken)
            witness = agent in rule(lo) and agent not in rule(hi) and lo[agent] < hi[agent]
            break
    caught["non-monotone tie-break"] = bool(witness)

    spec, broken = SABOTAGES["sampling_reads_own_signal"]
    v = audit_ic_ir(spec, inst, mechanism=broken).first()
    caught["B-signals in sampling weights"] = v is not None and replay_violation(v, broken, inst)

    spec, broken = SABOTAGES["vcg_without_externality"]
    sep = gen_random("SEPARABLE", 3, 1, 2, 2)
    v = audit_ic_ir(spec, sep, mechanism=broken).first()
    caught["RS-VCG without w_-i"] = v is not None and replay_violation(v, broken, sep)

    open_inst = single_param(2, 2, lambda i, s: 1 + s[i], system=unclosed_system(2, [(), (0, 1)]))
    rep = audit_downward_closure(open_inst)
    caught["skipped downward closure"] = (
        not rep.ok and rep.witness[1] < rep.witness[0] and not open_inst.system.is_feasible(rep.witness[1])
    )

    ok = all(caught.values())
    detail = ", ".join(f"{k}: {'caught' if v else 'MISSED'}" for k, v in caught.items())
    verdict(11, "all five sabotages caught with witnesses", ok, detail, t0)


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
