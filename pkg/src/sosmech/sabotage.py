"""Deliberately broken mechanism variants for mutation testing.

Each one mirrors a mechanism in ``mechanisms`` with a single bug planted.
The audits in ``verifier`` are expected to catch every one of them.
"""

from __future__ import annotations

from fractions import Fraction

from .feasibility import FeasibilitySystem, max_weight_allocation
from .instance import Instance
from .mechanisms import (
    CoinRealization,
    Kind,
    MechanismOutcome,
    MechanismSpec,
    critical_payment,
    grid_k,
    rs_v_weights,
    rs_vcg_weights,
    threshold_outcome,
    _bundle_weights,
    _partition,
)
from .valuation import with_type, with_zeros


def threshold_pays_too_little(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True):
    """Random Threshold charging the value one grid step below l - 1.

    At l = 1 there is no such step and the item is handed out for free.
    """
    grid_k(instance)
    ell = realization.threshold
    out = threshold_outcome(ell, instance, tuple(reports), with_payments=False)
    pays = [Fraction(0)] * instance.n
    if with_payments:
        for i, T in enumerate(out.allocation):
            if T and ell >= 2:
                pays[i] = instance.valuation.value(i, T, with_type(tuple(reports), i, ell - 2))
    return MechanismOutcome(out.allocation, tuple(pays))


def _parity_winners(B, instance: Instance, reports):
    """Heaviest feasible set, but ties drop agents reporting an odd index."""
    weights = rs_v_weights(B, instance, reports)
    system = instance.system
    best, tied = None, []
    for S in system.feasible_sets:
        if not S <= B:
            continue
        w = sum((weights[a] for a in S), Fraction(0))
        if best is None or w > best:
            best, tied = w, [S]
        elif w == best:
            tied.append(S)
    odd = {i for i in range(instance.n) if reports[i] % 2}
    tied.sort(key=lambda S: (len(S & odd), -len(S), sorted(S)))
    return tied[0]


def rs_v_parity_tiebreak(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True):
    reports = tuple(reports)
    B = _partition(realization, instance.n)
    winners = _parity_winners(B, instance, reports)
    pays = [Fraction(0)] * instance.n
    if with_payments:
        rule = lambda prof: _parity_winners(B, instance, prof)  # noqa: E731
        for i in winners:
            pays[i] = critical_payment(rule, instance, reports, i)
    return MechanismOutcome(winners, tuple(pays))


def sampling_reads_own_signal(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True):
    """Random Sampling that keeps each B-agent's own signal in its weights."""
    reports = tuple(reports)
    B = _partition(realization, instance.n)
    val = instance.valuation
    w = _bundle_weights(instance, B, lambda j: with_zeros(val, reports, B - {j}))
    alloc, _ = max_weight_allocation(w, B)
    return MechanismOutcome(alloc, (Fraction(0),) * instance.n)


def rs_vcg_without_externality(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True):
    """RS-VCG payment with the best-allocation-without-i term left out."""
    reports = tuple(reports)
    dec = instance.separable
    val = instance.valuation
    B = _partition(realization, instance.n)
    w = rs_vcg_weights(B, instance, reports)
    alloc, _ = max_weight_allocation(w, B)
    pays = [Fraction(0)] * instance.n
    if with_payments:
        sampled_only = with_zeros(val, reports, B)
        for i in B:
            T = alloc[i]
            if T:
                rivals = sum((w[j][alloc[j]] for j in B if j != i), Fraction(0))
                pays[i] = (
                    dec.g_value(i, T, val.point(reports, T))
                    - dec.g_value(i, T, val.point(sampled_only, T))
                    - rivals
                )
    return MechanismOutcome(alloc, tuple(pays))


def unclosed_system(n: int, family) -> FeasibilitySystem:
    """A feasibility family taken as given, without downward closure."""
    return FeasibilitySystem(n, family, check=False)


SABOTAGES = {
    "threshold_pays_too_little": (MechanismSpec(Kind.RANDOM_THRESHOLD), threshold_pays_too_little),
    "parity_tiebreak": (MechanismSpec(Kind.RS_V), rs_v_parity_tiebreak),
    "sampling_reads_own_signal": (MechanismSpec(Kind.RANDOM_SAMPLING_COMB), sampling_reads_own_signal),
    "vcg_without_externality": (MechanismSpec(Kind.RS_VCG), rs_vcg_without_externality),
}
