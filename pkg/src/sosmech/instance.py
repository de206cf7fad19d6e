"""An auction instance: valuations plus, for single-parameter settings, feasibility."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import InvalidInstance
from .feasibility import FeasibilitySystem
from .valuation import SeparableDecomposition, Setting, Valuation, check_separable


@dataclass(frozen=True, eq=False)
class Instance:
    valuation: Valuation
    system: FeasibilitySystem | None = None
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        single = self.valuation.setting is Setting.SINGLE_PARAM
        if single and self.system is None:
            raise InvalidInstance("single-parameter instances need a feasibility system")
        if not single and self.system is not None:
            raise InvalidInstance("combinatorial instances take no feasibility system")
        if single and self.system.n != self.valuation.n:
            raise InvalidInstance("feasibility system and valuation disagree on n")

    @property
    def n(self) -> int:
        return self.valuation.n

    @property
    def m(self) -> int:
        return self.valuation.m

    @property
    def setting(self) -> Setting:
        return self.valuation.setting

    @property
    def single_param(self) -> bool:
        return self.valuation.setting is Setting.SINGLE_PARAM

    @cached_property
    def separable(self) -> SeparableDecomposition | None:
        return check_separable(self.valuation)

    def empty_allocation(self):
        return frozenset() if self.single_param else (0,) * self.n


def agent_value(instance: Instance, agent: int, allocation, profile) -> Fraction:
    """Value agent ``agent`` gets from ``allocation`` at the true ``profile``."""
    val = instance.valuation
    if instance.single_param:
        return val.value(agent, None, profile) if agent in allocation else Fraction(0)
    return val.value(agent, allocation[agent], profile)


def welfare(instance: Instance, allocation, profile) -> Fraction:
    return sum((agent_value(instance, i, allocation, profile) for i in range(instance.n)), Fraction(0))
