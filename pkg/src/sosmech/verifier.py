"""Exhaustive incentive audits, cycle monotonicity, and ratio certification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InvalidParams, NegativeCycle
from .instance import Instance, agent_value
from .mechanisms import (
    SAMPLING,
    CoinRealization,
    Kind,
    Mechanism,
    MechanismOutcome,
    MechanismSpec,
    deterministic,
)
from .oracle import CoinSpace, coin_space, exact_expected_welfare, opt_welfare
from .valuation import with_type

# IC / IR audit


@dataclass(frozen=True)
class Violation:
    """``kind`` is IC (a lie pays), IR (truth loses money) or PAYMENT (negative charge)."""

    kind: str
    realization: CoinRealization
    agent: int
    true_profile: tuple
    misreport: object
    utility_truth: Fraction
    utility_lie: Fraction | None = None


@dataclass(frozen=True)
class DeviationReport:
    ok: bool
    violations: tuple[Violation, ...]
    checked: int

    def first(self, kind: str | None = None) -> Violation | None:
        return next((v for v in self.violations if kind is None or v.kind == kind), None)


def utility(instance: Instance, agent: int, outcome: MechanismOutcome, true_profile) -> Fraction:
    return agent_value(instance, agent, outcome.allocation, true_profile) - outcome.payments[agent]


def _cached(run: Mechanism, realization, instance) -> Callable[[tuple], MechanismOutcome]:
    cache: dict = {}

    def outcome(profile):
        out = cache.get(profile)
        if out is None:
            out = cache[profile] = run(realization, instance, profile)
        return out

    return outcome


def _slices(instance: Instance, agent: int):
    """Every s_-i as a profile with None in the agent's slot."""
    val = instance.valuation
    axes = [val.types(j) if j != agent else (None,) for j in range(instance.n)]
    return itertools.product(*axes)


def audit_realization(
    run: Mechanism,
    realization: CoinRealization,
    instance: Instance,
    *,
    check_ir: bool = True,
    check_payments: bool = True,
    max_violations: int = 100,
) -> tuple[list[Violation], int]:
    val = instance.valuation
    outcome = _cached(run, realization, instance)
    found: list[Violation] = []
    checked = 0
    if check_payments:
        for prof in val.profiles():
            out = outcome(prof)
            for i, pay in enumerate(out.payments):
                if pay < 0:
                    found.append(Violation("PAYMENT", realization, i, prof, None, utility(instance, i, out, prof)))
    for i in range(instance.n):
        types = val.types(i)
        for base in _slices(instance, i):
            outs = [outcome(with_type(base, i, t)) for t in types]
            for a, t in enumerate(types):
                truth = with_type(base, i, t)
                u_truth = utility(instance, i, outs[a], truth)
                if check_ir and u_truth < 0:
                    found.append(Violation("IR", realization, i, truth, None, u_truth))
                for b, r in enumerate(types):
                    if b == a:
                        continue
                    checked += 1
                    u_lie = utility(instance, i, outs[b], truth)
                    if u_lie > u_truth:
                        found.append(Violation("IC", realization, i, truth, r, u_truth, u_lie))
                if len(found) >= max_violations:
                    return found, checked
    return found, checked


def audit_ic_ir(
    spec: MechanismSpec,
    instance: Instance,
    *,
    mechanism: Mechanism | None = None,
    coins: CoinSpace | Iterable | None = None,
    check_ir: bool = True,
    max_violations: int = 100,
) -> DeviationReport:
    """Every realization, true profile, agent and unilateral misreport.

    In the multi-signal model a misreport is a whole per-bundle signal vector.
    """
    run = deterministic(spec) if mechanism is None else mechanism
    coins = coin_space(spec, instance) if coins is None else coins
    found: list[Violation] = []
    checked = 0
    for realization, _ in coins:
        v, c = audit_realization(
            run, realization, instance, check_ir=check_ir, max_violations=max_violations - len(found)
        )
        found.extend(v)
        checked += c
        if len(found) >= max_violations:
            break
    return DeviationReport(not found, tuple(found), checked)


def replay_violation(violation: Violation, run: Mechanism, instance: Instance) -> bool:
    """Recompute the utilities behind a violation and confirm it."""
    truth = violation.true_profile
    i = violation.agent
    honest = run(violation.realization, instance, truth)
    u_truth = utility(instance, i, honest, truth)
    if violation.kind == "IC":
        lie = run(violation.realization, instance, with_type(truth, i, violation.misreport))
        u_lie = utility(instance, i, lie, truth)
        return u_lie == violation.utility_lie and u_truth == violation.utility_truth and u_lie > u_truth
    if violation.kind == "IR":
        return u_truth == violation.utility_truth < 0
    return honest.payments[i] < 0


@dataclass(frozen=True)
class InvarianceReport:
    ok: bool
    witness: tuple | None = None  # (realization, agent, profile, misreport)


def audit_report_invariance(spec: MechanismSpec, instance: Instance, *, mechanism: Mechanism | None = None) -> InvarianceReport:
    """On sampling realizations, a B-agent's own report never changes the outcome."""
    run = deterministic(spec) if mechanism is None else mechanism
    val = instance.valuation
    for realization, _ in coin_space(spec, instance):
        if realization.partition is None:
            continue
        if spec.kind not in (Kind.RANDOM_SAMPLING_COMB,) and realization.branch != SAMPLING:
            continue
        outcome = _cached(run, realization, instance)
        for i in sorted(realization.partition):
            for base in _slices(instance, i):
                ref = outcome(with_type(base, i, val.types(i)[0]))
                for t in val.types(i)[1:]:
                    prof = with_type(base, i, t)
                    if outcome(prof) != ref:
                        return InvarianceReport(False, (realization, i, with_type(base, i, val.types(i)[0]), t))
    return InvarianceReport(True)


# monotonicity


@dataclass(frozen=True)
class MonotoneReport:
    ok: bool
    witness: tuple | None = None  # (agent, winning profile, losing higher profile)


def audit_monotone(rule: Callable[[tuple], frozenset], instance: Instance) -> MonotoneReport:
    """Raising one's own signal never turns a winner into a loser."""
    val = instance.valuation
    cache: dict = {}

    def winners(p):
        if p not in cache:
            cache[p] = rule(p)
        return cache[p]

    for i in range(instance.n):
        types = val.types(i)
        for base in _slices(instance, i):
            for lo, hi in zip(types, types[1:]):
                p_lo, p_hi = with_type(base, i, lo), with_type(base, i, hi)
                if i in winners(p_lo) and i not in winners(p_hi):
                    return MonotoneReport(False, (i, p_lo, p_hi))
    return MonotoneReport(True)


def realization_rule(spec: MechanismSpec, realization: CoinRealization, instance: Instance, mechanism: Mechanism | None = None):
    run = deterministic(spec) if mechanism is None else mechanism
    return lambda profile: run(realization, instance, profile, with_payments=False).allocation


# cycle monotonicity

Lottery = Mapping[object, Fraction]  # bundle -> probability for one agent


def lotteries_from_allocation(instance: Instance, allocation) -> list[dict]:
    if instance.single_param:
        return [{None: Fraction(1)} if i in allocation else {} for i in range(instance.n)]
    return [{T: Fraction(1)} if T else {} for T in allocation]


def deterministic_lotteries(run: Mechanism, realization: CoinRealization, instance: Instance):
    def x(profile):
        out = run(realization, instance, profile, with_payments=False)
        return lotteries_from_allocation(instance, out.allocation)

    return x


def tabulated_lotteries(instance: Instance, table: Mapping[tuple, Sequence[tuple[object, Fraction]]]):
    """Explicit randomized rule: profile -> [(allocation, probability), ...]."""

    def x(profile):
        acc = [dict() for _ in range(instance.n)]
        for allocation, p in table[profile]:
            for i, lot in enumerate(lotteries_from_allocation(instance, allocation)):
                for T, q in lot.items():
                    acc[i][T] = acc[i].get(T, Fraction(0)) + p * q
        return acc

    return x


@dataclass(frozen=True)
class CycleGraph:
    """Complete digraph over agent i's own reports with s_-i fixed.

    ``worth[a][b]`` is the expected value, at true report ``nodes[a]``, of the
    lottery the rule hands out at report ``nodes[b]``; the edge a -> b has
    weight worth[a][a] - worth[a][b].
    """

    agent: int
    others: tuple
    nodes: tuple
    worth: tuple[tuple[Fraction, ...], ...]

    def weight(self, a: int, b: int) -> Fraction:
        return self.worth[a][a] - self.worth[a][b]

    def cycle_weight(self, cycle: Sequence[int]) -> Fraction:
        return sum((self.weight(a, b) for a, b in zip(cycle, cycle[1:] + type(cycle)(cycle[:1]))), Fraction(0))


def build_cycle_graph(x, instance: Instance, agent: int, others: tuple) -> CycleGraph:
    val = instance.valuation
    nodes = val.types(agent)
    lots = [x(with_type(others, agent, t))[agent] for t in nodes]
    worth = []
    for s in nodes:
        truth = with_type(others, agent, s)
        row = []
        for lot in lots:
            row.append(sum((p * val.value(agent, T, truth) for T, p in lot.items()), Fraction(0)))
        worth.append(tuple(row))
    return CycleGraph(agent, tuple(others), tuple(nodes), tuple(worth))


def _relax(graph: CycleGraph):
    """Shortest distances from a dummy node joined to every node by 0-weight edges."""
    k = len(graph.nodes)
    dist = [Fraction(0)] * k
    pred: list[int | None] = [None] * k
    last = None
    for _ in range(k):
        last = None
        for a in range(k):
            for b in range(k):
                if a == b:
                    continue
                cand = dist[a] + graph.weight(a, b)
                if cand < dist[b]:
                    dist[b], pred[b], last = cand, a, b
        if last is None:
            return dist, None
    v = last
    for _ in range(k):
        v = pred[v]
    cycle = [v]
    u = pred[v]
    while u != v:
        cycle.append(u)
        u = pred[u]
    cycle.reverse()
    return dist, cycle


def find_negative_cycle(graph: CycleGraph) -> list[int] | None:
    """Node positions of a negative cycle, or None."""
    _, cycle = _relax(graph)
    if cycle is not None:
        return cycle
    return None


def min_cycle_weight(graph: CycleGraph) -> Fraction:
    """Weight of the most negative cycle found, 0 when none is negative.

    Relaxation detects a negative cycle whenever one exists; the reported value
    is the smaller of that cycle and the best two-cycle.
    """
    best = Fraction(0)
    cycle = find_negative_cycle(graph)
    if cycle is not None:
        best = min(best, graph.cycle_weight(cycle))
    k = len(graph.nodes)
    for a in range(k):
        for b in range(a + 1, k):
            best = min(best, graph.weight(a, b) + graph.weight(b, a))
    return best


@dataclass(frozen=True)
class SynthesizedPayments:
    nodes: tuple
    payments: tuple[Fraction, ...]
    distances: tuple[Fraction, ...]

    def payment(self, node) -> Fraction:
        return self.payments[self.nodes.index(node)]


def graph_ic(graph: CycleGraph, payments: Sequence[Fraction]) -> bool:
    k = len(graph.nodes)
    return all(
        graph.worth[a][a] - payments[a] >= graph.worth[a][b] - payments[b] for a in range(k) for b in range(k)
    )


def synthesize_payments(graph: CycleGraph) -> SynthesizedPayments:
    """p(s) = -delta(s), delta the shortest distance from the dummy node."""
    dist, cycle = _relax(graph)
    if cycle is not None:
        raise NegativeCycle(
            f"agent {graph.agent}: negative cycle, no payments exist",
            cycle=[graph.nodes[c] for c in cycle],
            weight=graph.cycle_weight(cycle),
        )
    pays = tuple(-d for d in dist)
    if not graph_ic(graph, pays):
        raise AssertionError("synthesized payments fail the pairwise IC check")
    return SynthesizedPayments(graph.nodes, pays, tuple(dist))


def with_synthesized_payments(run: Mechanism, realization: CoinRealization, instance: Instance) -> Mechanism:
    """The same allocation rule charging cycle-synthesized payments instead."""
    x = deterministic_lotteries(run, realization, instance)
    memo: dict = {}

    def payments_for(agent, others):
        key = (agent, others)
        if key not in memo:
            memo[key] = synthesize_payments(build_cycle_graph(x, instance, agent, others))
        return memo[key]

    def substituted(real, inst, profile, with_payments=True):
        out = run(real, inst, profile, with_payments=False)
        if not with_payments:
            return out
        pays = []
        for i in range(inst.n):
            others = profile[:i] + (None,) + profile[i + 1:]
            pays.append(payments_for(i, others).payment(profile[i]))
        return MechanismOutcome(out.allocation, tuple(pays))

    return substituted


@dataclass(frozen=True)
class GraphCheck:
    realization: CoinRealization
    agent: int
    others: tuple
    audit_ok: bool
    no_negative_cycle: bool
    synthesized_ok: bool | None  # None when synthesis does not apply


def compare_characterizations(run: Mechanism, realization: CoinRealization, instance: Instance) -> list[GraphCheck]:
    """For each (agent, s_-i) graph: the mechanism's own IC audit, the cycle test,
    and an IC audit of the synthesized payments where they exist."""
    val = instance.valuation
    outcome = _cached(run, realization, instance)
    x = deterministic_lotteries(run, realization, instance)
    checks = []
    for i in range(instance.n):
        types = val.types(i)
        for base in _slices(instance, i):
            outs = [outcome(with_type(base, i, t)) for t in types]
            audit_ok = True
            for a, t in enumerate(types):
                truth = with_type(base, i, t)
                u_truth = utility(instance, i, outs[a], truth)
                if any(utility(instance, i, o, truth) > u_truth for o in outs):
                    audit_ok = False
                    break
            graph = build_cycle_graph(x, instance, i, base)
            no_neg = min_cycle_weight(graph) >= 0
            synth_ok = None
            if no_neg:
                synth = synthesize_payments(graph)
                synth_ok = graph_ic(graph, synth.payments)
            checks.append(GraphCheck(realization, i, base, audit_ok, no_neg, synth_ok))
    return checks


# approximation ratios


@dataclass(frozen=True)
class RatioReport:
    passed: bool
    bound: Fraction
    min_ratio: Fraction | None
    worst: tuple | None  # (instance index, profile)
    checked: int


def profile_ratios(spec: MechanismSpec, instance: Instance, *, mechanism: Mechanism | None = None):
    """Yield (profile, expected welfare, optimum) for every profile."""
    coins = coin_space(spec, instance)
    for prof in instance.valuation.profiles():
        _, opt = opt_welfare(instance, prof)
        got = exact_expected_welfare(spec, instance, prof, coins=coins, mechanism=mechanism)
        yield prof, got, opt


def certify_ratio(
    spec: MechanismSpec,
    corpus: Sequence[Instance],
    bound,
    *,
    mechanism: Mechanism | None = None,
) -> RatioReport:
    bound = Fraction(bound)
    if bound < 0:
        raise InvalidParams("bound must be non-negative")
    worst_ratio, worst, checked = None, None, 0
    for idx, inst in enumerate(corpus):
        for prof, got, opt in profile_ratios(spec, inst, mechanism=mechanism):
            ratio = Fraction(1) if opt == 0 else got / opt
            checked += 1
            if worst_ratio is None or ratio < worst_ratio:
                worst_ratio, worst = ratio, (idx, prof)
    passed = worst_ratio is None or worst_ratio >= bound
    return RatioReport(passed, bound, worst_ratio, worst, checked)


@dataclass(frozen=True)
class ClosureReport:
    ok: bool
    witness: tuple | None = None  # (feasible set, subset missing from the family)


def audit_downward_closure(instance: Instance) -> ClosureReport:
    """Single-parameter families must contain every subset of a feasible set."""
    if instance.system is None:
        return ClosureReport(True)
    gap = instance.system.closure_gap()
    return ClosureReport(gap is None, gap)
