"""Core game model: resources, cost functions, strategy spaces, profiles.

A game has players 0..n-1 (this numbering is the global player order used
by every tie-break in the package), an ordered list of resource ids, a
shareable cost function per resource, a non-shareable delay per (player,
resource), and one strategy space per player.  Strategy spaces are either
matroid bases over a subset of the resources or simple source-terminal
paths in an attached network.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import InfeasibleProfile, InputError, InvalidCostOracle, UnsupportedSpace
from .network import Network, Vertex
from .rationals import rat

_ZERO = Fraction(0)

PlayerSet = frozenset  # of player ids


class CostFunction:
    """Shareable cost of one resource as a function of its user set.

    Two flavours: a fixed cost (same value for every non-empty user set)
    and a general monotone subadditive set function given by a table or
    callable oracle.  Oracles are validated lazily: every newly cached
    value is checked against all previously cached values for monotonicity
    and (where the relevant union is cached) subadditivity, raising
    InvalidCostOracle on the first violation.

    Instances cache oracle answers and are not thread-safe.
    """

    def __init__(self, fixed=None, oracle=None, table: Optional[Mapping] = None) -> None:
        if sum(x is not None for x in (fixed, oracle, table)) != 1:
            raise InputError("exactly one of fixed / oracle / table required")
        self._fixed: Optional[Fraction] = None
        self._oracle = None
        if fixed is not None:
            value = rat(fixed)
            if value < 0:
                raise InputError(f"negative cost {value}")
            self._fixed = value
        elif table is not None:
            tbl = {frozenset(key): rat(val) for key, val in table.items()}
            if frozenset() in tbl and tbl[frozenset()] != 0:
                raise InvalidCostOracle("cost of the empty set must be 0")

            def lookup(users: frozenset) -> Fraction:
                try:
                    return tbl[users]
                except KeyError:
                    raise InputError(
                        f"cost table has no entry for user set {sorted(users)}"
                    ) from None

            self._oracle = lookup
            self._table: Optional[dict[frozenset, Fraction]] = tbl
        else:
            self._oracle = oracle
        if not hasattr(self, "_table"):
            self._table = None
        self._cache: dict[frozenset, Fraction] = {}

    @property
    def table(self) -> Optional[dict]:
        """The explicit table this function was built from, if any."""
        return None if self._table is None else dict(self._table)

    @property
    def is_fixed(self) -> bool:
        return self._fixed is not None

    @property
    def fixed_value(self) -> Fraction:
        if self._fixed is None:
            raise UnsupportedSpace("cost function is not fixed")
        return self._fixed

    def value(self, users: Iterable[int]) -> Fraction:
        s = frozenset(users)
        if not s:
            return _ZERO
        if self._fixed is not None:
            return self._fixed
        if s in self._cache:
            return self._cache[s]
        v = rat(self._oracle(s))
        if v < 0:
            raise InvalidCostOracle(f"negative cost {v} for {sorted(s)}")
        self._check_against_cache(s, v)
        self._cache[s] = v
        return v

    def _check_against_cache(self, s: frozenset, v: Fraction) -> None:
        for t, w in self._cache.items():
            if s <= t and v > w:
                raise InvalidCostOracle(
                    f"monotonicity violated: c({sorted(s)})={v} > c({sorted(t)})={w}"
                )
            if t <= s and w > v:
                raise InvalidCostOracle(
                    f"monotonicity violated: c({sorted(t)})={w} > c({sorted(s)})={v}"
                )
            union = s | t
            if union != s and union != t and union in self._cache:
                if self._cache[union] > v + w:
                    raise InvalidCostOracle(
                        f"subadditivity violated on {sorted(s)} and {sorted(t)}"
                    )


@dataclass(frozen=True)
class PathSpace:
    """Simple paths between `terminal` and `source` in the game network.

    In directed networks players walk terminal -> source, so a feasible
    strategy is an edge set forming a directed simple path in that
    direction.  `source == terminal` admits exactly the empty strategy.
    """

    source: Vertex
    terminal: Vertex

    kind = "path"


class MatroidSpace:
    """Bases of a matroid over a subset of the resources."""

    kind = "matroid"

    def __init__(self, oracle) -> None:
        self.oracle = oracle

    @property
    def ground(self) -> tuple[int, ...]:
        return self.oracle.ground


class Profile:
    """One strategy per player, as frozensets of resource ids."""

    def __init__(self, choices: Iterable[Iterable[int]]) -> None:
        self.choices: tuple[frozenset, ...] = tuple(frozenset(c) for c in choices)
        self._occupancy: Optional[dict[int, frozenset]] = None

    def __len__(self) -> int:
        return len(self.choices)

    def __getitem__(self, i: int) -> frozenset:
        return self.choices[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Profile) and self.choices == other.choices

    def __hash__(self) -> int:
        return hash(self.choices)

    def __repr__(self) -> str:
        parts = ", ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in self.choices)
        return f"Profile({parts})"

    def users(self, rid: int) -> frozenset:
        if self._occupancy is None:
            occ: dict[int, set] = {}
            for i, choice in enumerate(self.choices):
                for e in choice:
                    occ.setdefault(e, set()).add(i)
            self._occupancy = {e: frozenset(s) for e, s in occ.items()}
        return self._occupancy.get(rid, frozenset())

    def used_resources(self) -> frozenset:
        return frozenset().union(*self.choices) if self.choices else frozenset()

    def replace(self, i: int, choice: Iterable[int]) -> "Profile":
        new = list(self.choices)
        new[i] = frozenset(choice)
        return Profile(new)


class GameModel:
    """Immutable description of one congestion game with shareable costs."""

    def __init__(
        self,
        players: int,
        resources: Sequence[int],
        costs: Mapping[int, CostFunction],
        spaces: Sequence,
        delays: Optional[Mapping] = None,
        network: Optional[Network] = None,
    ) -> None:
        if players < 0:
            raise InputError("negative player count")
        if len(set(resources)) != len(resources):
            raise InputError("duplicate resource ids")
        self.n = players
        self.resources: tuple[int, ...] = tuple(resources)
        self.resource_order: dict[int, int] = {e: k for k, e in enumerate(self.resources)}
        self.costs = dict(costs)
        for e in self.resources:
            if e not in self.costs:
                raise InputError(f"resource {e} has no cost function")
        self.network = network
        if len(spaces) != players:
            raise InputError("one strategy space per player required")
        self.spaces = tuple(spaces)
        for i, sp in enumerate(self.spaces):
            if sp.kind == "path":
                if network is None:
                    raise InputError("path spaces require a network")
                for v in (sp.source, sp.terminal):
                    if not network.has_vertex(v):
                        raise InputError(f"vertex {v!r} of player {i} not in network")
            elif sp.kind == "matroid":
                for e in sp.ground:
                    if e not in self.resource_order:
                        raise InputError(f"matroid ground element {e} is not a resource")
            else:
                raise UnsupportedSpace(f"unknown space kind {sp.kind!r}")
        self._delay: dict[tuple[int, int], Fraction] = {}
        if delays:
            for (i, e), d in delays.items():
                if not (0 <= i < players) or e not in self.resource_order:
                    raise InputError(f"delay for unknown pair ({i}, {e})")
                dv = rat(d)
                if dv < 0:
                    raise InputError(f"negative delay for ({i}, {e})")
                if dv != 0:
                    self._delay[(i, e)] = dv

    def delay(self, i: int, e: int) -> Fraction:
        return self._delay.get((i, e), _ZERO)

    @property
    def has_delays(self) -> bool:
        return bool(self._delay)

    def cost(self, e: int, users: Iterable[int]) -> Fraction:
        return self.costs[e].value(users)

    def resource_key(self, e: int) -> int:
        """Position of e in the global resource order, for tie-breaking."""
        return self.resource_order[e]

    def is_feasible_choice(self, i: int, choice: frozenset) -> bool:
        sp = self.spaces[i]
        if sp.kind == "matroid":
            return set(choice) <= set(sp.ground) and sp.oracle.is_basis(choice)
        return self.network.is_path_edge_set(choice, frm=sp.terminal, to=sp.source)

    def validate_profile(self, profile: Profile) -> None:
        if len(profile) != self.n:
            raise InfeasibleProfile(
                f"profile has {len(profile)} choices for {self.n} players"
            )
        for i, choice in enumerate(profile.choices):
            for e in choice:
                if e not in self.resource_order:
                    raise InfeasibleProfile(f"player {i} uses unknown resource {e}")
            if not self.is_feasible_choice(i, choice):
                raise InfeasibleProfile(f"choice of player {i} is not in their space")


def total_cost(game: GameModel, profile: Profile) -> Fraction:
    """Shareable costs of used resources plus all incurred delays."""
    game.validate_profile(profile)
    total = _ZERO
    for e in game.resources:
        users = profile.users(e)
        if users:
            total += game.cost(e, users)
    for i in range(game.n):
        for e in profile[i]:
            total += game.delay(i, e)
    return total


def private_cost(game: GameModel, protocol, profile: Profile, i: int) -> Fraction:
    """Player i's shares under the protocol plus their delays."""
    game.validate_profile(profile)
    out = _ZERO
    for e in profile[i]:
        out += protocol.cost_share(profile, i, e) + game.delay(i, e)
    return out
