"""Downward-closed feasibility systems and brute-force bundle assignment."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import CapExceeded, InvalidInstance

Allocation = tuple  # per-agent bundle bitmask, 0 meaning nothing


def _mask(agents: Iterable[int]) -> int:
    m = 0
    for a in agents:
        m |= 1 << a
    return m


def _members(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _preference_key(mask: int):
    # larger sets first, then the lexicographically smallest sorted member tuple
    members = _members(mask)
    return (-len(members), members)


class FeasibilitySystem:
    """Explicit family of servable agent sets over agents 0..n-1."""

    def __init__(self, n: int, sets: Iterable[Iterable[int]], *, check: bool = True):
        self.n = n
        masks = set()
        for s in sets:
            s = tuple(s)
            if any(not 0 <= a < n for a in s):
                raise InvalidInstance(f"set {s} mentions an agent outside 0..{n - 1}")
            masks.add(_mask(s))
        if check:
            if 0 not in masks:
                raise InvalidInstance("the empty set must be feasible")
            for m in masks:
                for a in _members(m):
                    if m & ~(1 << a) not in masks:
                        raise InvalidInstance(
                            f"not downward closed: {set(_members(m))} feasible but "
                            f"{set(_members(m & ~(1 << a)))} is not"
                        )
        self._masks = tuple(sorted(masks, key=_preference_key))
        self._members = {m: _members(m) for m in self._masks}

    @property
    def feasible_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(self._members[m]) for m in self._masks)

    def is_feasible(self, agents: Iterable[int]) -> bool:
        return _mask(agents) in self._members

    def is_downward_closed(self) -> bool:
        return self.closure_gap() is None

    def closure_gap(self):
        """A (feasible set, missing subset) pair, or None if closed."""
        masks = set(self._masks)
        if 0 not in masks:
            return frozenset(), frozenset()
        for m in self._masks:
            for a in self._members[m]:
                sub = m & ~(1 << a)
                if sub not in masks:
                    return frozenset(self._members[m]), frozenset(_members(sub))
        return None

    def __eq__(self, other):
        return isinstance(other, FeasibilitySystem) and self.n == other.n and set(self._masks) == set(other._masks)

    def __hash__(self):
        return hash((self.n, frozenset(self._masks)))

    def __repr__(self):
        sets = ", ".join("{" + ",".join(map(str, self._members[m])) + "}" for m in self._masks)
        return f"FeasibilitySystem(n={self.n}, [{sets}])"


def close_downward(family: Iterable[Iterable[int]], n: int | None = None) -> FeasibilitySystem:
    family = [tuple(s) for s in family]
    if n is None:
        n = 1 + max((a for s in family for a in s), default=-1)
    closed = {()}
    for s in family:
        for r in range(len(s) + 1):
            closed.update(itertools.combinations(sorted(set(s)), r))
    return FeasibilitySystem(n, closed)


def single_item(n: int) -> FeasibilitySystem:
    return FeasibilitySystem(n, [()] + [(i,) for i in range(n)])


def k_units(n: int, k: int) -> FeasibilitySystem:
    sets = [c for r in range(k + 1) for c in itertools.combinations(range(n), r)]
    return FeasibilitySystem(n, sets)


def max_weight_feasible_set(
    system: FeasibilitySystem,
    weights: Sequence[Fraction],
    restrict_to: Iterable[int] | None = None,
) -> tuple[frozenset, Fraction]:
    """Heaviest feasible subset of ``restrict_to``.

    Ties go to the larger set, then to the lexicographically smallest sorted
    member tuple.  That order does not depend on the weights, which keeps the
    winner set monotone in every agent's weight.
    """
    allowed = _mask(range(system.n)) if restrict_to is None else _mask(restrict_to)
    best_mask, best = 0, None
    for m in system._masks:
        if m & ~allowed:
            continue
        w = sum((weights[a] for a in system._members[m]), Fraction(0))
        if best is None or w > best:
            best_mask, best = m, w
    return frozenset(system._members[best_mask]), best if best is not None else Fraction(0)


@lru_cache(maxsize=4096)
def _allocation_table(n: int, m: int, agents: tuple[int, ...]):
    rows = []
    for owners in itertools.product((None,) + agents, repeat=m):
        bundles = [0] * n
        for item, owner in enumerate(owners):
            if owner is not None:
                bundles[owner] |= 1 << item
        pairs = tuple((i, b) for i, b in enumerate(bundles) if b)
        rows.append((tuple(bundles), pairs))
    return tuple(rows)


def enumerate_allocations(
    n_agents: int, m_items: int, restrict_to: Iterable[int] | None = None, cap_m: int = 5
) -> Iterator[Allocation]:
    """Every assignment of items to agents in ``restrict_to`` or to nobody.

    Item 0 varies slowest; "unassigned" comes before any agent, so the empty
    allocation is always first.
    """
    if m_items > cap_m:
        raise CapExceeded(f"m = {m_items} exceeds the enumeration cap {cap_m}")
    agents = tuple(range(n_agents)) if restrict_to is None else tuple(sorted(set(restrict_to)))
    for bundles, _ in _allocation_table(n_agents, m_items, agents):
        yield bundles


def max_weight_allocation(
    weights: Sequence[Sequence[Fraction]],
    restrict_to: Iterable[int] | None = None,
    cap_m: int = 5,
) -> tuple[Allocation, Fraction]:
    """Heaviest allocation; ``weights[i][T]`` for bundle bitmask T.

    The first maximum in enumeration order wins.
    """
    n = len(weights)
    m = (len(weights[0]) - 1).bit_length() if n else 0
    if m > cap_m:
        raise CapExceeded(f"m = {m} exceeds the enumeration cap {cap_m}")
    agents = tuple(range(n)) if restrict_to is None else tuple(sorted(set(restrict_to)))
    best_alloc, best = None, None
    for bundles, pairs in _allocation_table(n, m, agents):
        w = Fraction(0)
        for i, b in pairs:
            w += weights[i][b]
        if best is None or w > best:
            best_alloc, best = bundles, w
    return best_alloc, best
