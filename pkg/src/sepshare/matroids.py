"""Matroid strategy spaces: oracles, enforceability, and the transform
that turns any basis profile into an enforceable one.

The transform repeatedly moves single packets (one player leaves a
resource for an exchange partner of strictly smaller virtual cost), so it
terminates and never raises total cost.  Virtual costs price a resource as
if the player were alone on it; checking stability against virtual
deviations is what makes the local moves sound for general monotone
subadditive costs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    InputError,
    InternalInvariant,
    InvalidCostOracle,
    InvalidMatroid,
    NotABasis,
    NotEnforceable,
    NotInBasis,
    UnsupportedSpace,
)
from .game import GameModel, MatroidSpace, Profile, total_cost
from .protocol import SeparableProtocol, SharingTable

_ZERO = Fraction(0)


class MatroidOracle:
    """Independence oracle with caching and lazy axiom checks.

    Subclasses implement `_independent`.  Every newly cached answer is
    checked for the hereditary axiom against all comparable cached sets;
    `validate_axioms` runs the full (exponential) axiom check and is meant
    for tests and small grounds only.  Instances cache and are not
    thread-safe.
    """

    def __init__(self, ground: Iterable[int]) -> None:
        self.ground: tuple[int, ...] = tuple(sorted(set(ground)))
        self._cache: dict[frozenset, bool] = {frozenset(): True}
        self._rank: Optional[int] = None

    def _independent(self, subset: frozenset) -> bool:
        raise NotImplementedError

    def is_independent(self, subset: Iterable[int]) -> bool:
        s = frozenset(subset)
        if not s <= set(self.ground):
            return False
        if s in self._cache:
            return self._cache[s]
        answer = bool(self._independent(s))
        for t, t_answer in self._cache.items():
            if s < t and t_answer and not answer:
                raise InvalidMatroid(
                    f"hereditary axiom violated: {sorted(s)} dependent inside "
                    f"independent {sorted(t)}"
                )
            if t < s and answer and not t_answer:
                raise InvalidMatroid(
                    f"hereditary axiom violated: {sorted(t)} dependent inside "
                    f"independent {sorted(s)}"
                )
        self._cache[s] = answer
        return answer

    @property
    def rank(self) -> int:
        if self._rank is None:
            current: set[int] = set()
            for e in self.ground:
                if self.is_independent(frozenset(current | {e})):
                    current.add(e)
            self._rank = len(current)
        return self._rank

    def is_basis(self, subset: Iterable[int]) -> bool:
        s = frozenset(subset)
        return len(s) == self.rank and self.is_independent(s)

    def bases(self) -> Iterator[frozenset]:
        for combo in itertools.combinations(self.ground, self.rank):
            s = frozenset(combo)
            if self.is_independent(s):
                yield s

    def validate_axioms(self) -> None:
        """Full axiom check by enumeration; exponential in |ground|."""
        if len(self.ground) > 16:
            raise InputError("ground too large for exhaustive validation")
        subsets = [
            frozenset(c)
            for r in range(len(self.ground) + 1)
            for c in itertools.combinations(self.ground, r)
        ]
        indep = {s for s in subsets if self.is_independent(s)}
        if frozenset() not in indep:
            raise InvalidMatroid("empty set must be independent")
        for s in indep:
            for e in s:
                if s - {e} not in indep:
                    raise InvalidMatroid(f"hereditary axiom violated at {sorted(s)}")
        for s in indep:
            for t in indep:
                if len(s) < len(t):
                    if not any(s | {e} in indep for e in t - s):
                        raise InvalidMatroid(
                            f"exchange axiom violated for {sorted(s)}, {sorted(t)}"
                        )


class UniformMatroid(MatroidOracle):
    def __init__(self, ground: Iterable[int], rank: int) -> None:
        super().__init__(ground)
        if not (0 <= rank <= len(self.ground)):
            raise InputError(f"rank {rank} out of range for {len(self.ground)} elements")
        self._k = rank

    def _independent(self, subset: frozenset) -> bool:
        return len(subset) <= self._k

    @property
    def descriptor(self) -> dict:
        return {"uniform": {"ground": list(self.ground), "rank": self._k}}


class PartitionMatroid(MatroidOracle):
    def __init__(self, blocks: Sequence[Iterable[int]], quotas: Sequence[int]) -> None:
        block_sets = [frozenset(b) for b in blocks]
        if len(block_sets) != len(quotas):
            raise InputError("one quota per block required")
        ground: set[int] = set()
        for b in block_sets:
            if ground & b:
                raise InputError("partition blocks must be disjoint")
            ground |= b
        super().__init__(ground)
        self._blocks = block_sets
        self._quotas = [int(q) for q in quotas]
        for b, q in zip(self._blocks, self._quotas):
            if not (0 <= q <= len(b)):
                raise InputError(f"quota {q} out of range for block of size {len(b)}")

    def _independent(self, subset: frozenset) -> bool:
        return all(len(subset & b) <= q for b, q in zip(self._blocks, self._quotas))

    @property
    def descriptor(self) -> dict:
        return {
            "partition": {
                "blocks": [sorted(b) for b in self._blocks],
                "quotas": list(self._quotas),
            }
        }


class GraphicMatroid(MatroidOracle):
    """Forests of a multigraph; element ids map to edges."""

    def __init__(self, edges: Mapping[int, tuple]) -> None:
        super().__init__(edges.keys())
        self._edges = {eid: (u, v) for eid, (u, v) in edges.items()}

    def _independent(self, subset: frozenset) -> bool:
        parent: dict = {}

        def find(x):
            root = x
            while parent.get(root, root) != root:
                root = parent[root]
            while parent.get(x, x) != x:
                parent[x], x = root, parent[x]
            return root

        for eid in subset:
            u, v = self._edges[eid]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    @property
    def descriptor(self) -> dict:
        # edges listed in ground order; "ground" pins the element ids
        return {
            "graphic": {
                "ground": list(self.ground),
                "edges": [list(self._edges[eid]) for eid in self.ground],
            }
        }


def matroid_from_descriptor(desc: Mapping) -> MatroidOracle:
    """Inverse of the `descriptor` properties."""
    if not isinstance(desc, Mapping) or len(desc) != 1:
        raise InputError("matroid descriptor must have exactly one kind")
    kind, body = next(iter(desc.items()))
    if kind == "uniform":
        return UniformMatroid(body["ground"], int(body["rank"]))
    if kind == "partition":
        return PartitionMatroid(body["blocks"], body["quotas"])
    if kind == "graphic":
        edges = body["edges"]
        ground = body.get("ground", list(range(len(edges))))
        if len(ground) != len(edges):
            raise InputError("graphic descriptor ground/edges length mismatch")
        return GraphicMatroid({g: (u, v) for g, (u, v) in zip(ground, edges)})
    raise InputError(f"unknown matroid kind {kind!r}")


# -- deviation costs -------------------------------------------------------


def _matroid_space(game: GameModel, i: int) -> MatroidSpace:
    sp = game.spaces[i]
    if sp.kind != "matroid":
        raise UnsupportedSpace(f"player {i} does not have a matroid space")
    return sp


def virtual_cost(game: GameModel, i: int, e: int) -> Fraction:
    """Cost of the resource as if player i were alone on it, plus delay."""
    return game.cost(e, frozenset((i,))) + game.delay(i, e)


def exchange_candidates(oracle: MatroidOracle, basis: frozenset, e: int) -> list[int]:
    """Elements f with basis - e + f again a basis; contains e itself."""
    if not oracle.is_basis(basis):
        raise NotABasis(f"{sorted(basis)} is not a basis")
    if e not in basis:
        raise NotInBasis(f"{e} not in basis {sorted(basis)}")
    rest = basis - {e}
    out = [e]
    for f in oracle.ground:
        if f in basis:
            continue
        if oracle.is_independent(rest | {f}):
            out.append(f)
    out.sort()
    return out


def deviation_cost(
    game: GameModel, profile: Profile, i: int, e: int, virtual: bool = False
) -> tuple[Fraction, int]:
    """Cheapest packet move for player i away from e (staying counts).

    True mode prices the landing resource at the user set it would have
    after the move; virtual mode prices it as if i were alone.  Returns
    (value, chosen element), ties to the smallest resource in global order.
    """
    sp = _matroid_space(game, i)
    best: Optional[tuple[Fraction, int]] = None
    for f in exchange_candidates(sp.oracle, profile[i], e):
        if virtual:
            value = virtual_cost(game, i, f)
        else:
            users_after = (profile.users(f) - {i}) | {i}
            value = game.cost(f, users_after) + game.delay(i, f)
        key = (value, game.resource_key(f))
        if best is None or key < (best[0], game.resource_key(best[1])):
            best = (value, f)
    assert best is not None  # e itself is always a candidate
    return best


@dataclass(frozen=True)
class EnforceabilityViolation:
    kind: str  # "delay" or "cover"
    resource: int
    player: Optional[int]
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class EnforceabilityReport:
    ok: bool
    virtual: bool
    violations: tuple[EnforceabilityViolation, ...] = ()


def check_enforceable_matroid(
    game: GameModel, profile: Profile, virtual: bool = False
) -> EnforceabilityReport:
    """Delay and coverage conditions characterizing enforceable profiles.

    Per resource in a player's basis the delay may not exceed the player's
    cheapest exchange ("delay" condition); per used resource the headroom
    of its users must cover the shareable cost ("cover" condition).
    Virtual mode replaces exchange costs by virtual ones, giving a
    sufficient condition that the transform below establishes.
    """
    game.validate_profile(profile)
    bad = []
    deltas: dict[tuple[int, int], Fraction] = {}
    for i in range(game.n):
        _matroid_space(game, i)
        for e in profile[i]:
            value, _f = deviation_cost(game, profile, i, e, virtual=virtual)
            deltas[(i, e)] = value
            d = game.delay(i, e)
            if d > value:
                bad.append(EnforceabilityViolation("delay", e, i, d, value))
    for e in game.resources:
        users = profile.users(e)
        if not users:
            continue
        headroom = sum((deltas[(i, e)] - game.delay(i, e) for i in sorted(users)), _ZERO)
        cost = game.cost(e, users)
        if cost > headroom:
            bad.append(EnforceabilityViolation("cover", e, None, cost, headroom))
    return EnforceabilityReport(ok=not bad, virtual=virtual, violations=tuple(bad))


# -- the transform ---------------------------------------------------------


@dataclass(frozen=True)
class PacketMove:
    player: int
    source: int
    target: int
    reason: str  # "delay" or "cover"


@dataclass(frozen=True)
class MatroidTransformResult:
    profile: Profile
    moves: tuple[PacketMove, ...]

    @property
    def iterations(self) -> int:
        return len(self.moves)


def _first_violation(game: GameModel, profile: Profile) -> Optional[tuple[str, int]]:
    virt: dict[tuple[int, int], Fraction] = {}

    def vdev(i: int, e: int) -> Fraction:
        if (i, e) not in virt:
            virt[(i, e)] = deviation_cost(game, profile, i, e, virtual=True)[0]
        return virt[(i, e)]

    for e in game.resources:
        users = profile.users(e)
        if not users:
            continue
        for i in sorted(users):
            if game.delay(i, e) > vdev(i, e):
                return ("delay", e)
        headroom = sum((vdev(i, e) - game.delay(i, e) for i in sorted(users)), _ZERO)
        if game.cost(e, users) > headroom:
            return ("cover", e)
    return None


def transform_matroid(game: GameModel, profile: Profile) -> MatroidTransformResult:
    """Rewrite a basis profile into one the virtual conditions accept.

    Packet moves send one player from a violated resource to their
    cheapest virtual exchange.  Each move strictly lowers the moving
    packet's virtual cost, total cost never increases (strictly per delay
    move and per cover batch), and the move count stays below
    n * m * max-rank; all three facts are asserted.
    """
    game.validate_profile(profile)
    for i in range(game.n):
        _matroid_space(game, i)
    bound = game.n * len(game.resources) * max(
        (sp.oracle.rank for sp in game.spaces), default=0
    )
    current = profile
    cost_now = total_cost(game, current)
    moves: list[PacketMove] = []

    def move_packet(i: int, e: int, reason: str) -> None:
        nonlocal current
        value, f = deviation_cost(game, current, i, e, virtual=True)
        if virtual_cost(game, i, e) <= value or f == e:
            raise InternalInvariant("packet move must strictly reduce virtual cost")
        current = current.replace(i, (current[i] - {e}) | {f})
        moves.append(PacketMove(i, e, f, reason))
        if len(moves) > bound:
            raise InternalInvariant(f"transform exceeded {bound} packet moves")

    while True:
        hit = _first_violation(game, current)
        if hit is None:
            break
        kind, e = hit
        if kind == "delay":
            users = sorted(current.users(e))
            i = next(
                i
                for i in users
                if game.delay(i, e) > deviation_cost(game, current, i, e, virtual=True)[0]
            )
            move_packet(i, e, "delay")
            after = total_cost(game, current)
            if after >= cost_now:
                raise InternalInvariant("delay move failed to reduce total cost")
            cost_now = after
            continue
        # cover condition: drain players whose virtual cost on e is not
        # already their cheapest option, until the rest can pay for e.
        while True:
            users = sorted(current.users(e))
            vdev = {
                i: deviation_cost(game, current, i, e, virtual=True)[0] for i in users
            }
            headroom = sum((vdev[i] - game.delay(i, e) for i in users), _ZERO)
            if game.cost(e, frozenset(users)) <= headroom:
                break
            movable = [i for i in users if virtual_cost(game, i, e) > vdev[i]]
            if not movable:
                raise InvalidCostOracle(
                    f"cover condition stuck on resource {e}; cost function is "
                    "not subadditive on the queried sets"
                )
            move_packet(movable[0], e, "cover")
        after = total_cost(game, current)
        if after >= cost_now:
            raise InternalInvariant("cover batch failed to reduce total cost")
        cost_now = after

    report = check_enforceable_matroid(game, current, virtual=True)
    if not report.ok:
        raise InternalInvariant("transform terminated on a violated profile")
    return MatroidTransformResult(profile=current, moves=tuple(moves))


def build_matroid_protocol(game: GameModel, profile: Profile) -> SeparableProtocol:
    """Water-fill shares within deviation headroom; smallest players first.

    Requires the (true mode) enforceability conditions; raises
    NotEnforceable otherwise.
    """
    report = check_enforceable_matroid(game, profile, virtual=False)
    if not report.ok:
        raise NotEnforceable(f"{len(report.violations)} condition(s) violated")
    shares: dict[tuple[int, int], Fraction] = {}
    for e in game.resources:
        users = sorted(profile.users(e))
        if not users:
            continue
        remaining = game.cost(e, frozenset(users))
        for i in users:
            cap = deviation_cost(game, profile, i, e, virtual=False)[0] - game.delay(i, e)
            take = min(cap, remaining)
            shares[(i, e)] = take
            remaining -= take
        if remaining != 0:
            raise InternalInvariant(f"water-filling left {remaining} unpaid on {e}")
    return SeparableProtocol(game, SharingTable(profile, shares))
