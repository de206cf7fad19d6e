"""Randomized IC-IR mechanisms, each as a deterministic rule per coin realization.

Every function here takes a ``CoinRealization`` that fixes the randomness,
the instance, and the reported profile, and returns the allocation together
with payments.  The randomized mechanism is the distribution over
realizations given by ``oracle.coin_space``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable

from .errors import InvalidInstance, InvalidParams, KNotPowerOfTwo, NotSeparable
from .feasibility import max_weight_allocation, max_weight_feasible_set
from .instance import Instance
from .valuation import Setting, to_fraction, with_type, with_zeros


class Kind(str, Enum):
    RS_V = "RS_V"
    RS_VCG = "RS_VCG"
    RANDOM_THRESHOLD = "RANDOM_THRESHOLD"
    RANDOM_SAMPLING_COMB = "RANDOM_SAMPLING_COMB"
    K_HL = "K_HL"
    RANDOM_BUCKET = "RANDOM_BUCKET"
    K_SS = "K_SS"


def log2_exact(k: int) -> int:
    if k < 2 or k & (k - 1):
        raise KNotPowerOfTwo(f"k = {k} is not a power of two >= 2")
    return k.bit_length() - 1


@dataclass(frozen=True)
class MechanismSpec:
    kind: Kind
    d: Fraction = Fraction(1)
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "d", to_fraction(self.d))
        if self.d < 1:
            raise InvalidParams("d must be at least 1")

    def mixing_probability(self, k: int | None = None) -> Fraction | None:
        """Probability of the threshold/bucket branch; None for unmixed kinds."""
        k = self.k if k is None else k
        d = self.d
        if self.kind is Kind.K_HL:
            if k is None or k < 2:
                raise InvalidParams("K_HL needs k >= 2")
            return Fraction((k - 1) * d) / (d * (k + 1) + 2)
        if self.kind is Kind.K_SS:
            if k is None:
                raise InvalidParams("K_SS needs k")
            lg = log2_exact(k)
            return Fraction(d * lg) / (d * lg + 2)
        return None


@dataclass(frozen=True)
class CoinRealization:
    """Fixed randomness: a sampled set B (A is the rest), a threshold index, a branch."""

    branch: str | None = None
    partition: frozenset | None = None
    threshold: int | None = None

    def describe(self) -> str:
        parts = []
        if self.branch:
            parts.append(self.branch)
        if self.partition is not None:
            parts.append("B={" + ",".join(map(str, sorted(self.partition))) + "}")
        if self.threshold is not None:
            parts.append(f"l={self.threshold}")
        return " ".join(parts) or "deterministic"


THRESHOLD, BUCKET, SAMPLING = "THRESHOLD", "BUCKET", "SAMPLING"


@dataclass(frozen=True)
class MechanismOutcome:
    allocation: object  # frozenset of winners, or per-agent bundle tuple
    payments: tuple[Fraction, ...]


def grid_k(instance: Instance) -> int:
    """k for threshold mechanisms: every agent's grid must be {0, ..., k-1}."""
    if instance.setting is not Setting.COMB_SINGLE_SIGNAL:
        raise InvalidInstance("threshold mechanisms need a single-signal combinatorial instance")
    k = instance.valuation.k
    if k is None or k < 2:
        raise InvalidInstance("threshold mechanisms need every grid equal to {0, ..., k-1}, k >= 2")
    return k


def _zero_payments(n: int) -> tuple[Fraction, ...]:
    return (Fraction(0),) * n


def _partition(realization: CoinRealization, n: int) -> frozenset:
    if realization.partition is None:
        raise InvalidParams("this mechanism needs a partition realization")
    B = frozenset(realization.partition)
    if any(not 0 <= i < n for i in B):
        raise InvalidParams("partition names an unknown agent")
    return B


# single-parameter: random sampling Vickrey


def rs_v_weights(B: frozenset, instance: Instance, reports: tuple) -> list[Fraction]:
    """w_i = v_i(s_A, s_i, 0 for the rest of B) for i in B, else 0."""
    val = instance.valuation
    weights = [Fraction(0)] * instance.n
    for i in B:
        weights[i] = val.value(i, None, with_zeros(val, reports, B - {i}))
    return weights


def rs_v_winners(B: frozenset, instance: Instance, reports: tuple) -> frozenset:
    winners, _ = max_weight_feasible_set(instance.system, rs_v_weights(B, instance, reports), B)
    return winners


def critical_payment(winners: Callable[[tuple], frozenset], instance: Instance, reports: tuple, agent: int) -> Fraction:
    """Value at the lowest own report that still wins, others' reports fixed."""
    val = instance.valuation
    for t in val.types(agent):
        probe = with_type(reports, agent, t)
        if agent in winners(probe):
            return val.value(agent, None, probe)
    raise InvalidParams(f"agent {agent} never wins; no critical value")


def rs_v(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True) -> MechanismOutcome:
    if not instance.single_param:
        raise InvalidInstance("RS-V runs on single-parameter instances")
    reports = instance.valuation.validate_profile(reports)
    B = _partition(realization, instance.n)
    winners = rs_v_winners(B, instance, reports)
    pays = [Fraction(0)] * instance.n
    if with_payments:
        rule = lambda prof: rs_v_winners(B, instance, prof)  # noqa: E731
        for i in winners:
            pays[i] = critical_payment(rule, instance, reports, i)
    return MechanismOutcome(winners, tuple(pays))


# combinatorial: random sampling VCG


def _bundle_weights(instance: Instance, agents, profile_for) -> list[list[Fraction]]:
    val = instance.valuation
    size = 2**instance.m
    w = [[Fraction(0)] * size for _ in range(instance.n)]
    for j in agents:
        prof = profile_for(j)
        for T in val.bundles:
            w[j][T] = val.value(j, T, prof)
    return w


def rs_vcg_weights(B: frozenset, instance: Instance, reports: tuple) -> list[list[Fraction]]:
    val = instance.valuation
    return _bundle_weights(instance, B, lambda j: with_zeros(val, reports, B - {j}))


def rs_vcg(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True) -> MechanismOutcome:
    if instance.single_param:
        raise InvalidInstance("RS-VCG runs on combinatorial instances")
    dec = instance.separable
    if dec is None:
        raise NotSeparable("valuation has no separable SOS decomposition")
    val = instance.valuation
    reports = val.validate_profile(reports)
    B = _partition(realization, instance.n)
    w = rs_vcg_weights(B, instance, reports)
    alloc, _ = max_weight_allocation(w, B)
    pays = [Fraction(0)] * instance.n
    if with_payments:
        sampled_only = with_zeros(val, reports, B)
        for i in B:
            T = alloc[i]
            if not T:
                continue
            g_all = dec.g_value(i, T, val.point(reports, T))
            g_sampled = dec.g_value(i, T, val.point(sampled_only, T))
            rivals = sum((w[j][alloc[j]] for j in B if j != i), Fraction(0))
            _, without_i = max_weight_allocation(w, B - {i})
            pays[i] = g_all - g_sampled - rivals + without_i
    return MechanismOutcome(alloc, tuple(pays))


# combinatorial, k-sized signals: thresholds and sampling


def threshold_outcome(theta: int, instance: Instance, reports: tuple, with_payments: bool = True) -> MechanismOutcome:
    """Serve only agents reporting >= theta, valued as if they reported exactly theta.

    A winner pays its value for the won bundle at own signal theta - 1.
    """
    val = instance.valuation
    high = frozenset(i for i in range(instance.n) if reports[i] >= theta)
    capped = tuple(theta if i in high else s for i, s in enumerate(reports))
    w = _bundle_weights(instance, high, lambda j: capped)
    alloc, _ = max_weight_allocation(w, high)
    pays = [Fraction(0)] * instance.n
    if with_payments:
        for i, T in enumerate(alloc):
            if T:
                pays[i] = val.value(i, T, with_type(reports, i, theta - 1))
    return MechanismOutcome(alloc, tuple(pays))


def random_threshold(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True) -> MechanismOutcome:
    k = grid_k(instance)
    reports = instance.valuation.validate_profile(reports)
    ell = realization.threshold
    if ell is None or not 1 <= ell <= k - 1:
        raise InvalidParams(f"threshold must lie in 1..{k - 1}")
    return threshold_outcome(ell, instance, reports, with_payments)


def random_bucket(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True) -> MechanismOutcome:
    k = grid_k(instance)
    lg = log2_exact(k)
    reports = instance.valuation.validate_profile(reports)
    ell = realization.threshold
    if ell is None or not 1 <= ell <= lg:
        raise InvalidParams(f"bucket index must lie in 1..{lg}")
    return threshold_outcome(2 ** (ell - 1), instance, reports, with_payments)


def sampling_weights(B: frozenset, instance: Instance, reports: tuple) -> list[list[Fraction]]:
    """v_iT(s_A, 0_B) for i in B: the sampled agents' own reports are ignored."""
    val = instance.valuation
    blind = with_zeros(val, reports, B)
    return _bundle_weights(instance, B, lambda j: blind)


def random_sampling_comb(realization: CoinRealization, instance: Instance, reports, with_payments: bool = True) -> MechanismOutcome:
    if instance.single_param:
        raise InvalidInstance("random sampling runs on combinatorial instances")
    reports = instance.valuation.validate_profile(reports)
    B = _partition(realization, instance.n)
    alloc, _ = max_weight_allocation(sampling_weights(B, instance, reports), B)
    return MechanismOutcome(alloc, _zero_payments(instance.n))


def mixture(spec: MechanismSpec, realization: CoinRealization, instance: Instance, reports, with_payments: bool = True) -> MechanismOutcome:
    if spec.kind is Kind.K_HL:
        branches = {THRESHOLD: random_threshold, SAMPLING: random_sampling_comb}
    elif spec.kind is Kind.K_SS:
        branches = {BUCKET: random_bucket, SAMPLING: random_sampling_comb}
    else:
        raise InvalidParams(f"{spec.kind.value} is not a mixture")
    try:
        fn = branches[realization.branch]
    except KeyError:
        raise InvalidParams(f"branch {realization.branch!r} does not belong to {spec.kind.value}") from None
    return fn(realization, instance, reports, with_payments)


_SIMPLE = {
    Kind.RS_V: rs_v,
    Kind.RS_VCG: rs_vcg,
    Kind.RANDOM_THRESHOLD: random_threshold,
    Kind.RANDOM_SAMPLING_COMB: random_sampling_comb,
    Kind.RANDOM_BUCKET: random_bucket,
}

Mechanism = Callable[..., MechanismOutcome]


def deterministic(spec: MechanismSpec) -> Mechanism:
    """The rule (realization, instance, reports, with_payments=True) -> outcome."""
    if spec.kind in (Kind.K_HL, Kind.K_SS):
        return lambda realization, instance, reports, with_payments=True: mixture(
            spec, realization, instance, reports, with_payments
        )
    return _SIMPLE[spec.kind]
