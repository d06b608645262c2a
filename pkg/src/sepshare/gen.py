"""Seeded random instance generators.

Every generator takes a `random.Random` so identical seeds reproduce
identical instances byte for byte.  Distributions are simple on purpose:
small integer costs, geometric-ish sizes, uniform structure choices.

Families:
  - UFL: facilities with opening costs, clients as rank-1 matroid players,
    connection distances as delays.
  - general matroid games: uniform / partition / graphic bases per player,
    fixed or subadditive-table costs, optional delays.
  - single-source graph games: random connected graphs, fixed costs.
  - series-parallel games: a chain of parallel bundles, so every
    player pair along the chain induces a two-terminal series-parallel
    subgraph; random delays.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .errors import InternalInvariant
from .game import CostFunction, GameModel, MatroidSpace, PathSpace, Profile
from .matroids import GraphicMatroid, PartitionMatroid, UniformMatroid
from .network import Network

_ZERO = Fraction(0)


def _subadditive_table(rng: random.Random, players: int) -> dict[frozenset, Fraction]:
    """Monotone subadditive set function over all player subsets.

    Two families: concave in cardinality (nonincreasing increments) and
    budget-capped additive min(B, sum of weights)."""
    everyone = range(players)
    if rng.random() < 1 / 2:
        first = rng.randint(2, 12)
        increments = [first]
        for _ in range(players - 1):
            increments.append(rng.randint(0, increments[-1]))
        table = {}
        for size in range(players + 1):
            for subset in combinations(everyone, size):
                table[frozenset(subset)] = Fraction(sum(increments[:size]))
        return table
    weights = [rng.randint(1, 9) for _ in everyone]
    budget = rng.randint(4, 18)
    return {
        frozenset(sub): Fraction(min(budget, sum(weights[i] for i in sub)))
        for size in range(players + 1)
        for sub in combinations(everyone, size)
    }


def gen_ufl(
    rng: random.Random, players: int, facilities: int, max_cost: int = 20
) -> GameModel:
    """Facility location: every client picks exactly one open facility."""
    resources = list(range(facilities))
    costs = {
        e: CostFunction(fixed=Fraction(rng.randint(1, max_cost))) for e in resources
    }
    delays = {}
    for i in range(players):
        for e in resources:
            d = rng.randint(0, 9)
            if d:
                delays[(i, e)] = Fraction(d)
    spaces = [MatroidSpace(UniformMatroid(resources, 1)) for _ in range(players)]
    return GameModel(
        players=players, resources=resources, costs=costs, spaces=spaces, delays=delays
    )


def gen_matroid(
    rng: random.Random,
    players: Optional[int] = None,
    resources: Optional[int] = None,
    with_delays: bool = True,
) -> GameModel:
    n = players if players is not None else rng.randint(1, 5)
    m = resources if resources is not None else rng.randint(2, 8)
    ids = list(range(m))
    costs: dict[int, CostFunction] = {}
    for e in ids:
        if rng.random() < 1 / 3:
            costs[e] = CostFunction(table=_subadditive_table(rng, n))
        else:
            costs[e] = CostFunction(fixed=Fraction(rng.randint(1, 20)))
    spaces = []
    for _ in range(n):
        size = rng.randint(1, m)
        ground = sorted(rng.sample(ids, size))
        kind = rng.choice(("uniform", "partition", "graphic"))
        if kind == "uniform":
            spaces.append(MatroidSpace(UniformMatroid(ground, rng.randint(1, size))))
        elif kind == "partition":
            cut = sorted(rng.sample(range(1, size), rng.randint(0, min(2, size - 1))) if size > 1 else [])
            bounds = [0, *cut, size]
            blocks = [ground[a:b] for a, b in zip(bounds, bounds[1:]) if a < b]
            quotas = [rng.randint(1, len(b)) for b in blocks]
            spaces.append(MatroidSpace(PartitionMatroid(blocks, quotas)))
        else:
            verts = list(range(rng.randint(2, size + 1)))
            edges = {}
            for eid in ground:
                u = rng.choice(verts)
                v = rng.choice([x for x in verts if x != u] or verts)
                edges[eid] = (f"g{u}", f"g{v}")
            spaces.append(MatroidSpace(GraphicMatroid(edges)))
    delays = {}
    if with_delays:
        for i in range(n):
            for e in ids:
                d = rng.randint(0, 6)
                if d and rng.random() < 1 / 2:
                    delays[(i, e)] = Fraction(d)
    return GameModel(
        players=n, resources=ids, costs=costs, spaces=spaces, delays=delays
    )


def random_bases_profile(rng: random.Random, game: GameModel) -> Profile:
    """Feasible matroid profile: greedy bases under random element orders."""
    choices = []
    for i in range(game.n):
        oracle = game.spaces[i].oracle
        order = list(oracle.ground)
        rng.shuffle(order)
        picked: set[int] = set()
        for e in order:
            if oracle.is_independent(frozenset(picked | {e})):
                picked.add(e)
        choices.append(frozenset(picked))
    return Profile(choices)


def gen_tree(
    rng: random.Random,
    vertices: Optional[int] = None,
    players: Optional[int] = None,
    max_cost: int = 20,
) -> tuple[GameModel, Profile]:
    """Random connected single-source instance plus a feasible profile."""
    nv = vertices if vertices is not None else rng.randint(3, 10)
    verts = [f"v{k}" for k in range(nv)]
    pairs = []
    for k in range(1, nv):  # spanning tree first, so it is connected
        pairs.append((verts[rng.randrange(k)], verts[k]))
    seen = {frozenset(p) for p in pairs}
    for _ in range(rng.randint(0, nv)):
        u, v = rng.sample(verts, 2)
        if frozenset((u, v)) not in seen:
            seen.add(frozenset((u, v)))
            pairs.append((u, v))
    net = Network([(i, u, v) for i, (u, v) in enumerate(pairs)])
    ids = list(range(len(pairs)))
    costs = {e: CostFunction(fixed=Fraction(rng.randint(1, max_cost))) for e in ids}
    n = players if players is not None else rng.randint(1, 4)
    source = verts[0]
    spaces = [
        PathSpace(source=source, terminal=rng.choice(verts)) for _ in range(n)
    ]
    game = GameModel(
        players=n, resources=ids, costs=costs, spaces=spaces, network=net
    )
    choices = []
    for i in range(n):
        weights = {e: Fraction(rng.randint(1, 30)) for e in ids}
        hit = net.shortest_path(spaces[i].terminal, source, lambda e: weights[e])
        choices.append(frozenset(hit[2]))
    return game, Profile(choices)


def gen_sp(
    rng: random.Random,
    players: Optional[int] = None,
    max_edges: int = 12,
    with_delays: bool = True,
    max_cost: int = 20,
) -> tuple[GameModel, Profile]:
    """Chain of parallel bundles of short paths; player pairs sit on chain
    cut vertices, so every induced subgraph is two-terminal series-parallel."""
    n = players if players is not None else rng.randint(1, 3)
    cuts = ["c0"]
    pairs: list[tuple[str, str]] = []
    fresh = 0
    while len(pairs) < max_edges - 2 and (len(cuts) < 2 or rng.random() < 2 / 3):
        a = cuts[-1]
        b = f"c{len(cuts)}"
        arms = rng.randint(1, 3)
        for _ in range(arms):
            length = rng.randint(1, 2)
            prev = a
            for step in range(length - 1):
                mid = f"m{fresh}"
                fresh += 1
                pairs.append((prev, mid))
                prev = mid
            pairs.append((prev, b))
            if len(pairs) >= max_edges:
                break
        cuts.append(b)
    net = Network([(i, u, v) for i, (u, v) in enumerate(pairs)])
    ids = list(range(len(pairs)))
    costs = {e: CostFunction(fixed=Fraction(rng.randint(1, max_cost))) for e in ids}
    spaces = []
    for _ in range(n):
        a, b = sorted(rng.sample(range(len(cuts)), 2)) if len(cuts) > 1 else (0, 0)
        if a == b:
            raise InternalInvariant("degenerate chain")
        spaces.append(PathSpace(source=cuts[a], terminal=cuts[b]))
    delays = {}
    if with_delays:
        for i in range(n):
            for e in ids:
                d = rng.randint(0, 5)
                if d and rng.random() < 1 / 3:
                    delays[(i, e)] = Fraction(d)
    game = GameModel(
        players=n,
        resources=ids,
        costs=costs,
        spaces=spaces,
        delays=delays,
        network=net,
    )
    choices = []
    for i in range(n):
        weights = {e: Fraction(rng.randint(1, 30)) for e in ids}
        hit = net.shortest_path(spaces[i].terminal, spaces[i].source, lambda e: weights[e])
        choices.append(frozenset(hit[2]))
    return game, Profile(choices)
