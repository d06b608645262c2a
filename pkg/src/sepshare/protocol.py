"""Separable cost sharing protocols and their verifiers.

A protocol is induced by a sharing table for one base profile: on any
profile with the same user set on a resource it charges the table share,
and off the table it follows a fixed case rule that charges joining or
shrunken user sets to the smallest player id involved.  This makes the
protocol separable by construction and budget balanced everywhere provided
the table itself is balanced on the base profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .errors import InputError, TooLarge
from .game import GameModel, Profile, private_cost
from .rationals import rat

_ZERO = Fraction(0)


class SharingTable:
    """Nonnegative shares for (player, resource) pairs of one base profile.

    Only pairs with the resource in the player's base strategy may carry a
    share.  Budget balance on the base is a property to verify, not a
    construction-time requirement, so deliberately unbalanced tables can be
    built for testing.
    """

    def __init__(self, base: Profile, shares: Mapping[tuple[int, int], Fraction]) -> None:
        self.base = base
        table: dict[tuple[int, int], Fraction] = {}
        for (i, e), v in shares.items():
            if not (0 <= i < len(base)):
                raise InputError(f"share for unknown player {i}")
            if e not in base[i]:
                raise InputError(f"share for ({i}, {e}) but resource not in base choice")
            value = rat(v)
            if value < 0:
                raise InputError(f"negative share for ({i}, {e})")
            if value != 0:
                table[(i, e)] = value
        self.shares = table

    def share(self, i: int, e: int) -> Fraction:
        return self.shares.get((i, e), _ZERO)


class SeparableProtocol:
    """Cost shares for every profile, induced by one sharing table."""

    def __init__(self, game: GameModel, table: SharingTable) -> None:
        if len(table.base) != game.n:
            raise InputError("table base does not match player count")
        self.game = game
        self.table = table

    @property
    def base(self) -> Profile:
        return self.table.base

    def cost_share(self, profile: Profile, i: int, e: int) -> Fraction:
        """Share of player i on resource e under the given profile.

        Case rule relative to the base occupancy N_e:
        same users -> table share; new users present -> smallest joining
        player pays the full cost; strictly fewer users -> smallest
        remaining player pays; everyone else pays nothing.  For set
        costs "full cost" is evaluated at the profile's own user set.
        """
        if e not in profile[i]:
            return _ZERO
        users = profile.users(e)
        base_users = self.base.users(e)
        if users == base_users:
            return self.table.share(i, e)
        joined = users - base_users
        if joined:
            return self.game.cost(e, users) if i == min(joined) else _ZERO
        # users is a strict subset of the base occupancy
        return self.game.cost(e, users) if i == min(users) else _ZERO


@dataclass(frozen=True)
class BalanceViolation:
    resource: int
    paid: Fraction
    cost: Fraction


@dataclass(frozen=True)
class BalanceReport:
    ok: bool
    violations: tuple[BalanceViolation, ...] = ()


def verify_budget_balance(
    game: GameModel, protocol: SeparableProtocol, profile: Profile
) -> BalanceReport:
    """Exact budget balance of the protocol on one profile."""
    game.validate_profile(profile)
    bad = []
    for e in game.resources:
        users = profile.users(e)
        paid = sum((protocol.cost_share(profile, i, e) for i in range(game.n)), _ZERO)
        cost = game.cost(e, users) if users else _ZERO
        if paid != cost:
            bad.append(BalanceViolation(e, paid, cost))
    return BalanceReport(ok=not bad, violations=tuple(bad))


@dataclass(frozen=True)
class Deviation:
    player: int
    current_cost: Fraction
    best_cost: Fraction
    better_choice: frozenset


@dataclass(frozen=True)
class PneReport:
    ok: bool
    deviations: tuple[Deviation, ...] = ()


def _deviation_weight(game: GameModel, protocol: SeparableProtocol, i: int):
    """Per-resource cost of player i's unilateral deviations from the base.

    Staying on a base resource keeps the table share; joining a resource
    charges the full cost at the joined user set (the case rule makes the
    single newcomer pay).  Either way the deviation cost is additive, so
    best responses are shortest paths / min-weight bases in these weights.
    """
    base = protocol.base

    def weight(e: int) -> Fraction:
        if e in base[i]:
            return protocol.table.share(i, e) + game.delay(i, e)
        return game.cost(e, base.users(e) | {i}) + game.delay(i, e)

    return weight


def _greedy_min_basis(oracle, weight, order_key) -> frozenset:
    picked: set[int] = set()
    for e in sorted(oracle.ground, key=lambda e: (weight(e), order_key(e))):
        if oracle.is_independent(frozenset(picked | {e})):
            picked.add(e)
    return frozenset(picked)


def best_response(
    game: GameModel, protocol: SeparableProtocol, i: int
) -> tuple[frozenset, Fraction]:
    """Cheapest unilateral deviation of player i from the protocol's base."""
    weight = _deviation_weight(game, protocol, i)
    sp = game.spaces[i]
    if sp.kind == "matroid":
        choice = _greedy_min_basis(sp.oracle, weight, game.resource_key)
    else:
        hit = game.network.shortest_path(sp.terminal, sp.source, weight)
        if hit is None:
            raise InputError(f"player {i} has no feasible path")
        choice = frozenset(hit[2])
    value = sum((weight(e) for e in choice), _ZERO)
    return choice, value


def verify_pne(game: GameModel, protocol: SeparableProtocol) -> PneReport:
    """Check the protocol's base profile is a pure Nash equilibrium."""
    base = protocol.base
    game.validate_profile(base)
    bad = []
    for i in range(game.n):
        weight = _deviation_weight(game, protocol, i)
        current = sum((weight(e) for e in base[i]), _ZERO)
        choice, value = best_response(game, protocol, i)
        if value < current:
            bad.append(Deviation(i, current, value, choice))
    return PneReport(ok=not bad, deviations=tuple(bad))


@dataclass(frozen=True)
class SeparabilityReport:
    ok: bool
    profiles_checked: int
    counterexample: Optional[tuple] = None  # (resource, users, details)


def verify_separability_bruteforce(
    game: GameModel, protocol: SeparableProtocol, max_profiles: int = 10**5
) -> SeparabilityReport:
    """Exhaustively confirm equal user sets always get equal share vectors.

    Enumerates every profile of the game (raising TooLarge beyond
    `max_profiles`) and indexes share vectors by (resource, user set);
    any clash is returned as a counterexample.
    """
    from .oracle import EnumerationBudget, enumerate_strategies

    import itertools

    budget = EnumerationBudget(max_profiles=max_profiles, max_paths_per_player=max_profiles)
    all_choices = [enumerate_strategies(game, i, budget) for i in range(game.n)]
    count = 1
    for c in all_choices:
        count *= max(len(c), 1)
    if count > max_profiles:
        raise TooLarge(f"{count} profiles exceed limit {max_profiles}")
    seen: dict[tuple[int, frozenset], tuple] = {}
    checked = 0
    for combo in itertools.product(*all_choices) if game.n else [()]:
        profile = Profile(combo)
        checked += 1
        for e in game.resources:
            users = profile.users(e)
            if not users:
                continue
            vec = tuple(protocol.cost_share(profile, i, e) for i in sorted(users))
            key = (e, users)
            if key not in seen:
                seen[key] = vec
            elif seen[key] != vec:
                return SeparabilityReport(
                    ok=False,
                    profiles_checked=checked,
                    counterexample=(e, tuple(sorted(users)), (seen[key], vec)),
                )
    return SeparabilityReport(ok=True, profiles_checked=checked)


def protocol_private_cost(
    game: GameModel, protocol: SeparableProtocol, profile: Profile, i: int
) -> Fraction:
    return private_cost(game, protocol, profile, i)
