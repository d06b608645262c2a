"""Multi-pair path games on series-parallel player subgraphs.

For a profile P of source-terminal paths, enforceability is characterized
by a linear program: maximize the total assigned shares subject to
nonnegativity, per-resource capacity, and one stability row per deviation.
P is enforceable exactly when the optimum pays for every used edge.  On
series-parallel player subgraphs the exponentially many deviation rows
collapse to one row per "alternative", an edge-disjoint detour between two
nodes of the player's path, and the transform below rewrites any profile
into an enforceable one by letting players slide along tight alternatives.

Fixed edge costs throughout; delays are allowed and always charged on top.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .errors import (
    BudgetExceeded,
    InputError,
    InternalInvariant,
    NoTightAlternative,
    NotSeriesParallel,
    TooManyPaths,
    UnsupportedSpace,
)
from .game import CostFunction, GameModel, PathSpace, Profile, total_cost
from .lp import OPTIMAL, LinearProgram, Solution, solve
from .network import Network, Vertex
from .oracle import DEFAULT_BUDGET, EnumerationBudget
from .protocol import SeparableProtocol, SharingTable

_ZERO = Fraction(0)


def _require_path_game(game: GameModel) -> None:
    for i, sp in enumerate(game.spaces):
        if sp.kind != "path":
            raise UnsupportedSpace(f"player {i} does not have a path space")
    if game.network is None:
        raise InputError("game has no network")
    if game.network.directed:
        raise UnsupportedSpace("series-parallel analysis expects undirected networks")


def _fixed_cost(game: GameModel, e: int) -> Fraction:
    return game.costs[e].fixed_value


def player_subnetwork(network: Network, s: Vertex, t: Vertex) -> frozenset:
    """Edge ids of the union of all simple s-t paths (blocks on the s-t
    chain of the block-cut tree)."""
    return network.blocks_between(s, t)


def irredundant(network: Network, pairs: Sequence[tuple[Vertex, Vertex]]) -> Network:
    """Drop every edge no player can ever use."""
    keep: set[int] = set()
    anchors: list[Vertex] = []
    for s, t in pairs:
        keep |= player_subnetwork(network, s, t)
        anchors.extend((s, t))
    return network.subnetwork(keep, vertices=anchors)


# -- series-parallel recognition ------------------------------------------


def is_two_terminal_sp(network: Network, s: Vertex, t: Vertex, edge_ids=None) -> bool:
    """Reduce by parallel merges and degree-2 contractions; SP iff a single
    s-t edge remains.  s == t counts as SP only without edges."""
    eids = set(network.edge_ids if edge_ids is None else edge_ids)
    edges: dict[object, frozenset] = {
        eid: frozenset(network.endpoints[eid]) for eid in eids
    }
    if s == t:
        return not edges
    if not edges:
        return False
    fresh = itertools.count()
    changed = True
    while changed:
        changed = False
        by_ends: dict[frozenset, list] = {}
        for eid, ends in edges.items():
            by_ends.setdefault(ends, []).append(eid)
        for ends, group in by_ends.items():
            if len(group) > 1:
                for extra in group[1:]:
                    del edges[extra]
                changed = True
        if changed:
            continue
        degree: dict[Vertex, list] = {}
        for eid, ends in edges.items():
            for v in ends:
                degree.setdefault(v, []).append(eid)
        for v, incident in degree.items():
            if v in (s, t) or len(incident) != 2:
                continue
            e1, e2 = incident
            (a,) = edges[e1] - {v}
            (b,) = edges[e2] - {v}
            if a == b:
                continue  # becomes a parallel pair next round instead
            del edges[e1]
            del edges[e2]
            edges[("sp", next(fresh))] = frozenset((a, b))
            changed = True
            break
    return len(edges) == 1 and next(iter(edges.values())) == frozenset((s, t))


def is_n_series_parallel(network: Network, pairs: Sequence[tuple[Vertex, Vertex]]) -> bool:
    """True iff every player's usable subgraph is two-terminal SP for their
    own pair.  Players with no source-terminal connection make this false."""
    for s, t in pairs:
        if s == t:
            continue
        if not network.has_vertex(s) or not network.has_vertex(t):
            return False
        try:
            sub = player_subnetwork(network, s, t)
        except Exception:
            return False
        if not is_two_terminal_sp(network, s, t, edge_ids=sub):
            return False
    return True


# -- alternatives ----------------------------------------------------------


@dataclass(frozen=True)
class Alternative:
    """A detour of one player: replaces the path segment between `frm` and
    `to` by `edges`, which are internally disjoint from the path."""

    owner: int
    frm: Vertex
    to: Vertex
    edges: tuple[int, ...]
    substituted: tuple[int, ...]
    weight: Fraction  # cost + owner delay, summed over `edges`


def _ordered_path(game: GameModel, i: int, choice: frozenset) -> tuple[int, ...]:
    sp: PathSpace = game.spaces[i]
    order = game.network.order_path_edges(choice, frm=sp.source, to=sp.terminal)
    if order is None:
        raise InputError(f"choice of player {i} is not a source-terminal path")
    return order


def _path_vertices(network: Network, ordered: tuple[int, ...], start: Vertex) -> list[Vertex]:
    out = [start]
    for eid in ordered:
        out.append(network.other_end(eid, out[-1]))
    return out


def alternatives(game: GameModel, i: int, choice: frozenset) -> list[Alternative]:
    """Edge-disjoint detour system of player i against their current path.

    Discovery walks the path from the source; from each path node a
    BFS into the off-path region finds the next reachable path node, the
    cheapest connecting detour is recorded, and its interior is deleted.
    On series-parallel player subgraphs the stability rows of these
    detours imply the rows of all simple-path deviations.
    """
    _require_path_game(game)
    net = game.network
    sp: PathSpace = game.spaces[i]
    if sp.source == sp.terminal:
        return []
    region = player_subnetwork(net, sp.source, sp.terminal)
    if not is_two_terminal_sp(net, sp.source, sp.terminal, edge_ids=region):
        raise NotSeriesParallel(f"player {i}'s subgraph is not series-parallel")
    ordered = _ordered_path(game, i, choice)
    nodes = _path_vertices(net, ordered, sp.source)
    pos = {v: k for k, v in enumerate(nodes)}
    if set(choice) - region:
        raise InputError(f"player {i}'s path leaves their usable subgraph")

    def weight(eid: int) -> Fraction:
        return _fixed_cost(game, eid) + game.delay(i, eid)

    live_edges = set(region) - set(choice)
    dead_vertices: set[Vertex] = set()
    found: list[Alternative] = []
    for u in nodes:
        while True:
            hit = _discover(net, u, pos, live_edges, dead_vertices)
            if hit is None:
                break
            v = hit
            barrier = frozenset((set(nodes) - {u, v}) | dead_vertices)
            path = net.shortest_path(
                u,
                v,
                weight,
                blocked_vertices=barrier,
                blocked_edges=frozenset(net.edge_ids) - frozenset(live_edges),
            )
            if path is None:
                raise InternalInvariant("discovered node without a connecting path")
            cost, vseq, eseq = path
            a, b = sorted((pos[u], pos[v]))
            found.append(
                Alternative(
                    owner=i,
                    frm=nodes[a],
                    to=nodes[b],
                    edges=eseq,
                    substituted=tuple(ordered[a:b]),
                    weight=cost,
                )
            )
            live_edges -= set(eseq)
            dead_vertices |= set(vseq) - {u, v}
    if len(found) > len(net.edge_ids):
        raise InternalInvariant("more alternatives than edges")
    used = [e for alt in found for e in alt.edges]
    if len(used) != len(set(used)):
        raise InternalInvariant("alternatives are not edge-disjoint")
    # same endpoints mean same substituted subpath, so the cheapest detour's
    # stability row implies the rows of all costlier ones; keep only it
    cheapest: dict[tuple, Alternative] = {}
    for alt in found:
        key = (alt.frm, alt.to)
        if key not in cheapest or alt.weight < cheapest[key].weight:
            cheapest[key] = alt
    return [alt for alt in found if cheapest[(alt.frm, alt.to)] is alt]


def _discover(
    net: Network,
    u: Vertex,
    pos: dict,
    live_edges: set,
    dead_vertices: set,
) -> Optional[Vertex]:
    """Breadth-first search from u through off-path territory; returns the
    first other path node reached, preferring earlier path position on the
    same layer, or None."""
    visited = {u}
    frontier = [u]
    while frontier:
        layer_hits: list[Vertex] = []
        nxt: list[Vertex] = []
        for x in frontier:
            if x != u and x in pos:
                continue  # path nodes stop the walk
            for nbr, eid in net.neighbors(x):
                if eid not in live_edges or nbr in visited or nbr in dead_vertices:
                    continue
                visited.add(nbr)
                if nbr in pos:
                    layer_hits.append(nbr)
                else:
                    nxt.append(nbr)
        if layer_hits:
            layer_hits.sort(key=lambda v: (pos[v], net.vindex[v]))
            return layer_hits[0]
        frontier = nxt
    return None


# -- the enforceability LP -------------------------------------------------


@dataclass(frozen=True)
class LPInstance:
    lp: LinearProgram
    var_index: dict
    profile: Profile
    mode: str


def build_lp(
    game: GameModel,
    profile: Profile,
    mode: str = "alternatives",
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> LPInstance:
    """Shares-maximizing LP whose optimum decides enforceability.

    Variables are the shares of (player, own path edge); capacity rows cap
    each used edge by its cost; one stability row per deviation, which in
    "alternatives" mode means per detour and in "full_paths" mode per
    simple path of the player.
    """
    _require_path_game(game)
    game.validate_profile(profile)
    if mode not in ("alternatives", "full_paths"):
        raise InputError(f"unknown LP mode {mode!r}")
    var_index: dict = {}
    var_labels: list[str] = []
    for i in range(game.n):
        for e in sorted(profile[i], key=game.resource_key):
            var_index[(i, e)] = len(var_labels)
            var_labels.append(f"x_{i}_{e}")
    nvars = len(var_labels)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    labels: list[str] = []

    for e in game.resources:
        users = profile.users(e)
        if not users:
            continue
        row = [_ZERO] * nvars
        for i in sorted(users):
            row[var_index[(i, e)]] = Fraction(1)
        rows.append(row)
        rhs.append(_fixed_cost(game, e))
        labels.append(f"cap_{e}")

    for i in range(game.n):
        own = profile[i]
        if mode == "alternatives":
            for k, alt in enumerate(alternatives(game, i, own)):
                row = [_ZERO] * nvars
                bound = alt.weight
                for e in alt.substituted:
                    row[var_index[(i, e)]] = Fraction(1)
                    bound -= game.delay(i, e)
                rows.append(row)
                rhs.append(bound)
                labels.append(f"ne_{i}_{k}")
        else:
            sp: PathSpace = game.spaces[i]
            try:
                paths = list(
                    game.network.simple_paths(
                        sp.terminal, sp.source, max_paths=budget.max_paths_per_player
                    )
                )
            except BudgetExceeded as exc:
                raise TooManyPaths(str(exc)) from exc
            for k, epath in enumerate(paths):
                q = frozenset(epath)
                if q == own:
                    continue
                row = [_ZERO] * nvars
                bound = _ZERO
                for e in q - own:
                    bound += _fixed_cost(game, e) + game.delay(i, e)
                for e in own - q:
                    row[var_index[(i, e)]] = Fraction(1)
                    bound -= game.delay(i, e)
                rows.append(row)
                rhs.append(bound)
                labels.append(f"path_{i}_{k}")

    lp = LinearProgram(
        objective=tuple(Fraction(1) for _ in range(nvars)),
        rows=tuple(tuple(r) for r in rows),
        rhs=tuple(rhs),
        row_labels=tuple(labels),
        var_labels=tuple(var_labels),
    )
    return LPInstance(lp=lp, var_index=var_index, profile=profile, mode=mode)


@dataclass(frozen=True)
class EnforceabilityLPReport:
    enforceable: bool
    status: str
    lp_value: Optional[Fraction]
    used_cost: Fraction
    shares: Optional[dict] = None  # (player, resource) -> share


def is_enforceable(
    game: GameModel,
    profile: Profile,
    mode: str = "alternatives",
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> EnforceabilityLPReport:
    """Solve the LP; the profile is enforceable iff the optimum covers the
    full cost of all used edges (shares are then budget balanced)."""
    inst = build_lp(game, profile, mode=mode, budget=budget)
    sol = solve(inst.lp)
    used_cost = sum(
        (_fixed_cost(game, e) for e in game.resources if profile.users(e)), _ZERO
    )
    if sol.status != OPTIMAL:
        return EnforceabilityLPReport(
            enforceable=False, status=sol.status, lp_value=None, used_cost=used_cost
        )
    shares = {pair: sol.values[col] for pair, col in inst.var_index.items()}
    return EnforceabilityLPReport(
        enforceable=(sol.objective_value == used_cost),
        status=sol.status,
        lp_value=sol.objective_value,
        used_cost=used_cost,
        shares=shares,
    )


# -- tight alternatives and the transform ----------------------------------


def smallest_tight_alternative(
    game: GameModel,
    i: int,
    ordered_path: tuple[int, ...],
    share_of: Callable[[int], Fraction],
    f: int,
) -> Alternative:
    """Cheapest-possible detour around f whose cost exactly matches the
    shares plus delays it would absorb, substituting as few edges as
    possible.

    Candidate detours connect two nodes of the current path, avoid all its
    other nodes, and must enclose f.  A detour strictly cheaper than the
    absorbed amount would contradict LP feasibility, so it raises.
    """
    _require_path_game(game)
    net = game.network
    sp: PathSpace = game.spaces[i]
    if f not in ordered_path:
        raise InputError(f"edge {f} is not on the player's current path")
    region = player_subnetwork(net, sp.source, sp.terminal)
    nodes = _path_vertices(net, ordered_path, sp.source)
    fpos = ordered_path.index(f)

    def weight(eid: int) -> Fraction:
        return _fixed_cost(game, eid) + game.delay(i, eid)

    allowed = frozenset(region) - frozenset(ordered_path)
    blocked_edges = frozenset(net.edge_ids) - allowed
    best: Optional[tuple] = None
    for a in range(0, fpos + 1):
        for b in range(fpos + 1, len(nodes)):
            x, y = nodes[a], nodes[b]
            barrier = frozenset(set(nodes) - {x, y})
            hit = net.shortest_path(
                x, y, weight, blocked_vertices=barrier, blocked_edges=blocked_edges
            )
            if hit is None:
                continue
            cost, _vseq, eseq = hit
            substituted = tuple(ordered_path[a:b])
            absorbed = sum(
                (share_of(e) + game.delay(i, e) for e in substituted), _ZERO
            )
            if cost < absorbed:
                raise InternalInvariant(
                    "detour cheaper than current shares; share vector is not "
                    "an LP-feasible optimum"
                )
            if cost > absorbed:
                continue
            key = (len(substituted), eseq, a, b)
            if best is None or key < best[0]:
                best = (key, Alternative(i, x, y, eseq, substituted, cost))
    if best is None:
        raise NoTightAlternative(f"no tight detour around edge {f} for player {i}")
    return best[1]


@dataclass(frozen=True)
class NsepaTransformResult:
    profile: Profile
    protocol: SeparableProtocol
    phases: int
    input_enforceable: bool
    lp_value: Fraction
    input_cost: Fraction
    output_cost: Fraction
    substitutions: tuple[tuple, ...] = ()  # (phase, player, edge, total cost delta)
    repairs: tuple[tuple[int, Fraction], ...] = ()  # (player, total cost delta)


def nsepa_transform(
    game: GameModel, profile: Profile, budget: EnumerationBudget = DEFAULT_BUDGET
) -> NsepaTransformResult:
    """Rewrite a profile into an enforceable one with balanced shares.

    Starts from the alternatives-mode LP optimum.  While some used edge is
    not fully paid, every player holding such edges replaces all of them
    in one phase, walking their path from the source and substituting each
    unpaid edge by its smallest tight detour; substituted segments keep
    their shares on kept edges, adopted edges are paid in full by the
    adopter.  Phase count is bounded by the number of initially used
    edges, each phase conserves every deviating player's private cost, and
    total cost strictly decreases unless the input was already
    enforceable; all of this is asserted.  Finally, overpaid edges are
    reduced to exact balance, highest player index first.

    A profile can be so delay-heavy that a player improves by rerouting
    even when paying every new edge alone; no share vector stabilizes it
    and the LP is infeasible.  Such players are first moved to their
    cheapest reroute (new edges at full cost plus own delays, repeated
    until none improves).  Every such move lowers the mover's delay total
    by more than the newly opened edges cost, so it strictly lowers total
    cost, and afterwards the all-zero share vector is LP-feasible.  The
    moves are reported as `repairs`.
    """
    _require_path_game(game)
    game.validate_profile(profile)
    input_cost = total_cost(game, profile)

    work: list[tuple[int, ...]] = [
        _ordered_path(game, i, profile[i]) for i in range(game.n)
    ]

    def total_of(rows: list[tuple[int, ...]]) -> Fraction:
        used = {e for row in rows for e in row}
        fixed = sum((_fixed_cost(game, e) for e in used), _ZERO)
        lag = sum(
            (game.delay(i, e) for i in range(game.n) for e in rows[i]), _ZERO
        )
        return fixed + lag

    repairs: list[tuple[int, Fraction]] = []
    for i in range(game.n):
        sp: PathSpace = game.spaces[i]
        while True:
            held = frozenset(work[i])

            def reroute_price(e: int) -> Fraction:
                opened = _ZERO if e in held else _fixed_cost(game, e)
                return opened + game.delay(i, e)

            hit = game.network.shortest_path(sp.source, sp.terminal, reroute_price)
            if hit is None:
                raise InternalInvariant(f"player {i} lost connectivity")
            price, _vs, edges = hit
            stay = sum((game.delay(i, e) for e in work[i]), _ZERO)
            if price >= stay:
                break
            before_total = total_of(work)
            work[i] = tuple(edges)
            repairs.append((i, total_of(work) - before_total))

    base = Profile([frozenset(row) for row in work])
    report = is_enforceable(game, base, mode="alternatives", budget=budget)
    if report.status != OPTIMAL or report.shares is None:
        raise InternalInvariant(f"enforceability LP ended {report.status}")

    paths: dict[int, tuple[int, ...]] = {i: work[i] for i in range(game.n)}
    shares: dict[tuple[int, int], Fraction] = {
        (i, e): v for (i, e), v in report.shares.items()
    }
    dropped: dict[int, set] = {i: set() for i in range(game.n)}

    def paid(e: int) -> Fraction:
        return sum(
            (shares.get((i, e), _ZERO) for i in range(game.n) if e in paths[i]), _ZERO
        )

    def unpaid_edges() -> list[tuple[int, int]]:
        out = []
        for i in range(game.n):
            for e in paths[i]:
                if paid(e) < _fixed_cost(game, e):
                    out.append((i, e))
        return out

    def private(i: int) -> Fraction:
        return sum(
            (shares.get((i, e), _ZERO) + game.delay(i, e) for e in paths[i]), _ZERO
        )

    def current_total() -> Fraction:
        used = set()
        for items in paths.values():
            used.update(items)
        fixed = sum((_fixed_cost(game, e) for e in used), _ZERO)
        lag = sum(
            (game.delay(i, e) for i in range(game.n) for e in paths[i]), _ZERO
        )
        return fixed + lag

    substitutions: list[tuple] = []
    phase_bound = len(base.used_resources())
    phases = 0
    while True:
        snapshot = unpaid_edges()
        if not snapshot:
            break
        phases += 1
        if phases > phase_bound:
            raise InternalInvariant(f"more than {phase_bound} phases")
        for i in range(game.n):
            targets = {e for j, e in snapshot if j == i}
            while True:
                mine = [
                    e
                    for e in paths[i]
                    if e in targets and paid(e) < _fixed_cost(game, e)
                ]
                if not mine:
                    break
                before = private(i)
                f = mine[0]
                if (i, f) not in report.shares:
                    raise InternalInvariant("unpaid edge outside the original path")
                alt = smallest_tight_alternative(
                    game,
                    i,
                    paths[i],
                    lambda e: shares.get((i, e), _ZERO),
                    f,
                )
                readopted = set(alt.edges) & dropped[i]
                if readopted:
                    raise InternalInvariant(
                        f"player {i} re-adopted substituted edges {sorted(readopted)}"
                    )
                total_before = current_total()
                old = paths[i]
                a = old.index(alt.substituted[0])
                b = a + len(alt.substituted)
                paths[i] = old[:a] + alt.edges + old[b:]
                for e in alt.substituted:
                    dropped[i].add(e)
                    shares.pop((i, e), None)
                for e in alt.edges:
                    shares[(i, e)] = _fixed_cost(game, e)
                after = private(i)
                if after != before:
                    raise InternalInvariant(
                        f"private cost of player {i} drifted from {before} to {after}"
                    )
                substitutions.append(
                    (phases, i, f, current_total() - total_before)
                )

    # reduce overpaid edges to exact balance, highest player index first
    for e in game.resources:
        users = [i for i in range(game.n) if e in paths[i]]
        if not users:
            continue
        excess = paid(e) - _fixed_cost(game, e)
        if excess < 0:
            raise InternalInvariant(f"edge {e} left unpaid after all phases")
        for i in sorted(users, reverse=True):
            if excess == 0:
                break
            cut = min(shares.get((i, e), _ZERO), excess)
            if cut:
                shares[(i, e)] -= cut
                excess -= cut
        if excess != 0:
            raise InternalInvariant(f"cannot balance overpaid edge {e}")

    out_profile = Profile([frozenset(paths[i]) for i in range(game.n)])
    game.validate_profile(out_profile)
    output_cost = total_cost(game, out_profile)
    if report.enforceable and not repairs:
        if out_profile != profile:
            raise InternalInvariant("enforceable input must pass through unchanged")
    elif not output_cost < input_cost:
        raise InternalInvariant("transform failed to strictly reduce total cost")
    table = SharingTable(
        out_profile,
        {pair: v for pair, v in shares.items() if v != 0},
    )
    return NsepaTransformResult(
        profile=out_profile,
        protocol=SeparableProtocol(game, table),
        phases=phases,
        input_enforceable=report.enforceable and not repairs,
        lp_value=report.lp_value,
        input_cost=input_cost,
        output_cost=output_cost,
        substitutions=tuple(substitutions),
        repairs=tuple(repairs),
    )


# -- the hard instance -----------------------------------------------------

_FIXTURE_EDGES = [
    ("s1", "s2", 84),
    ("s1", "t1", 100),
    ("t3", "s3", 69),
    ("t2", "t3", 86),
    ("s1", "s3", 60),
    ("s1", "t3", 57),
    ("a", "s2", 71),
    ("a", "t1", 38),
    ("a", "t3", 38),
    ("t2", "s3", 82),
]

_FIXTURE_PAIRS = [("s1", "t1"), ("s2", "t2"), ("s3", "t3")]

_FIXTURE_OPT = [(5, 8, 7), (6, 8, 5, 4, 9), (4, 5)]


def counterexample_fixture() -> tuple[GameModel, Profile]:
    """Three-pair instance whose unique social optimum is not enforceable.

    The optimum costs 346, while no stable share vector collects more
    than 339 of it, so every separable protocol stabilizes only costlier
    profiles.  Useful as a hard regression case: its player subgraphs are
    not all series-parallel.
    """
    net = Network(
        [(k, u, v) for k, (u, v, _c) in enumerate(_FIXTURE_EDGES)],
        directed=False,
        vertices=["s1", "t1", "s2", "t2", "s3", "t3", "a"],
    )
    costs = {
        k: CostFunction(fixed=Fraction(c)) for k, (_u, _v, c) in enumerate(_FIXTURE_EDGES)
    }
    game = GameModel(
        players=3,
        resources=list(range(len(_FIXTURE_EDGES))),
        costs=costs,
        spaces=[PathSpace(source=s, terminal=t) for s, t in _FIXTURE_PAIRS],
        network=net,
    )
    return game, Profile([frozenset(p) for p in _FIXTURE_OPT])
