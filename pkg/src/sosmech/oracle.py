"""Ground truth: optimal welfare and exact expectations over a mechanism's coins."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import CapExceeded
from .feasibility import max_weight_allocation, max_weight_feasible_set
from .instance import Instance, agent_value, welfare
from .mechanisms import (
    BUCKET,
    SAMPLING,
    THRESHOLD,
    CoinRealization,
    Kind,
    Mechanism,
    MechanismSpec,
    deterministic,
    grid_k,
    log2_exact,
)

PARTITION_CAP = 12


@dataclass(frozen=True)
class CoinSpace:
    atoms: tuple[tuple[CoinRealization, Fraction], ...]

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def total(self) -> Fraction:
        return sum((p for _, p in self.atoms), Fraction(0))


def _partitions(n: int, cap_n: int, branch=None, weight=Fraction(1)):
    if n > cap_n:
        raise CapExceeded(f"n = {n} exceeds the exact partition cap {cap_n}")
    p = weight / 2**n
    out = []
    for mask in range(2**n):
        B = frozenset(i for i in range(n) if mask >> i & 1)
        out.append((CoinRealization(branch=branch, partition=B), p))
    return out


def _thresholds(count: int, branch=None, weight=Fraction(1)):
    p = weight / count
    return [(CoinRealization(branch=branch, threshold=ell), p) for ell in range(1, count + 1)]


def coin_space(spec: MechanismSpec, instance: Instance, cap_n: int = PARTITION_CAP) -> CoinSpace:
    """Every deterministic mechanism in the support, with its exact probability."""
    n = instance.n
    kind = spec.kind
    if kind in (Kind.RS_V, Kind.RS_VCG, Kind.RANDOM_SAMPLING_COMB):
        atoms = _partitions(n, cap_n)
    elif kind is Kind.RANDOM_THRESHOLD:
        atoms = _thresholds(grid_k(instance) - 1)
    elif kind is Kind.RANDOM_BUCKET:
        atoms = _thresholds(log2_exact(grid_k(instance)))
    elif kind is Kind.K_HL:
        k = grid_k(instance)
        p = spec.mixing_probability(k)
        atoms = _thresholds(k - 1, THRESHOLD, p) + _partitions(n, cap_n, SAMPLING, 1 - p)
    else:
        k = grid_k(instance)
        p = spec.mixing_probability(k)
        atoms = _thresholds(log2_exact(k), BUCKET, p) + _partitions(n, cap_n, SAMPLING, 1 - p)
    return CoinSpace(tuple(atoms))


def opt_welfare(instance: Instance, profile) -> tuple[object, Fraction]:
    val = instance.valuation
    profile = val.validate_profile(profile)
    if instance.single_param:
        weights = [val.value(i, None, profile) for i in range(instance.n)]
        return max_weight_feasible_set(instance.system, weights)
    weights = [[val.value(i, T, profile) for T in range(2**instance.m)] for i in range(instance.n)]
    return max_weight_allocation(weights)


def opt_welfare_scan(instance: Instance, profile) -> Fraction:
    """Independent scan used to cross-check ``opt_welfare``."""
    if instance.single_param:
        return max(welfare(instance, frozenset(S), profile) for S in instance.system.feasible_sets)
    from .feasibility import enumerate_allocations

    return max(welfare(instance, a, profile) for a in enumerate_allocations(instance.n, instance.m))


def exact_expected_welfare(
    spec: MechanismSpec,
    instance: Instance,
    profile,
    *,
    coins: CoinSpace | None = None,
    mechanism: Mechanism | None = None,
) -> Fraction:
    profile = instance.valuation.validate_profile(profile)
    coins = coin_space(spec, instance) if coins is None else coins
    run = deterministic(spec) if mechanism is None else mechanism
    total = Fraction(0)
    for realization, p in coins:
        out = run(realization, instance, profile, with_payments=False)
        total += p * welfare(instance, out.allocation, profile)
    return total


def exact_ratio(spec: MechanismSpec, instance: Instance, profile, **kw) -> Fraction:
    _, opt = opt_welfare(instance, profile)
    if opt == 0:
        return Fraction(1)
    return exact_expected_welfare(spec, instance, profile, **kw) / opt


@dataclass(frozen=True)
class Decomposition:
    optimum: Fraction
    other: Fraction
    self_part: Fraction


def other_self(instance: Instance, profile, d=1) -> Decomposition:
    """OTHER = sum v_iT*(s_-i, 0_i); SELF = d * sum over s_i > 0 of v_iT*(0_-i, s_i)."""
    val = instance.valuation
    profile = val.validate_profile(profile)
    alloc, opt = opt_welfare(instance, profile)
    other = Fraction(0)
    self_part = Fraction(0)
    for i in range(instance.n):
        zero_own = profile[:i] + (val.zero_type(i),) + profile[i + 1:]
        other += agent_value(instance, i, alloc, zero_own)
        if profile[i] != val.zero_type(i):
            only_own = tuple(profile[j] if j == i else val.zero_type(j) for j in range(instance.n))
            self_part += agent_value(instance, i, alloc, only_own)
    return Decomposition(opt, other, Fraction(d) * self_part)
