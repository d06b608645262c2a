"""Single-source connection games with fixed costs: tree sharing transform.

Players connect terminals to one shared source.  Any profile is first
rewritten into a tree profile; the tree is then priced bottom-up.  For the
edge under consideration each user's maximum contribution is the price gap
between their situation with the edge free and with the edge at full cost,
where deviations may jump along "auxiliary edges": stored shortest paths of
the original graph between two nodes of the player's own initial path.  An
edge whose users can cover it is closed and shared; otherwise it is dropped
and the affected subtrees are rerouted over one auxiliary edge each, paid
in full by a single representative player while all other rerouted players
ride it for free.  Expansion finally replaces auxiliary edges by their
stored paths and charges each expansion edge to its auxiliary payer unless
the edge already carries shares.

Delays must be zero here; multi-source and group variants are modeled by
the reductions at the bottom of the module.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    Disconnected,
    InputError,
    InternalInvariant,
    UnsupportedSpace,
)
from .game import CostFunction, GameModel, PathSpace, Profile, total_cost
from .network import Network, Vertex
from .protocol import SeparableProtocol, SharingTable
from .rationals import rat

_ZERO = Fraction(0)

ItemId = object  # int for graph edges, ("aux", deep, shallow) for auxiliary edges


def _require_single_source(game: GameModel) -> Vertex:
    if game.network is None:
        raise InputError("game has no network")
    sources = set()
    for i, sp in enumerate(game.spaces):
        if sp.kind != "path":
            raise UnsupportedSpace(f"player {i} does not have a path space")
        sources.add(sp.source)
    if len(sources) > 1:
        raise UnsupportedSpace(f"multiple sources {sorted(map(str, sources))}")
    if game.has_delays:
        raise UnsupportedSpace("tree transform requires zero delays")
    for e in game.resources:
        game.costs[e].fixed_value  # raises for set-function costs
    if not sources:
        return game.network.vertices[0] if game.network.vertices else None
    return sources.pop()


def to_tree_profile(game: GameModel, profile: Profile) -> Profile:
    """Reroute every player inside the union of used edges along a
    shortest-path tree from the source; never more expensive."""
    source = _require_single_source(game)
    game.validate_profile(profile)
    union = profile.used_resources()
    net = game.network

    def weight(eid: int) -> Fraction:
        return game.costs[eid].fixed_value

    blocked = frozenset(net.edge_ids) - union
    tree = net.dijkstra(source, weight, reverse=net.directed, blocked_edges=blocked)
    choices = []
    for i in range(game.n):
        t = game.spaces[i].terminal
        if t == source:
            choices.append(frozenset())
            continue
        if t not in tree:
            raise Disconnected(f"terminal {t!r} cannot reach the source")
        choices.append(frozenset(tree[t][2]))
    out = Profile(choices)
    game.validate_profile(out)
    if total_cost(game, out) > total_cost(game, profile):
        raise InternalInvariant("tree profile costs more than the input")
    return out


# -- working state ---------------------------------------------------------


@dataclass(frozen=True)
class AuxEdge:
    deep: Vertex
    shallow: Vertex
    gpath: tuple[int, ...]  # ordered deep -> shallow
    cost: Fraction

    @property
    def item(self) -> tuple:
        return ("aux", self.deep, self.shallow)


@dataclass
class Replacement:
    """One dropped edge with the auxiliary reroutes that replaced it."""

    edge: int
    deviation_vertices: tuple
    payers: tuple[int, ...]
    tree_cost_before: Fraction
    tree_cost_after: Fraction


class AuxiliaryGraph:
    """Mutable working state of the bottom-up pricing pass."""

    def __init__(self, game: GameModel, tree_profile: Profile) -> None:
        self.game = game
        self.net: Network = game.network
        self.source = _require_single_source(game)
        game.validate_profile(tree_profile)
        self.paths: dict[int, tuple[ItemId, ...]] = {}
        for i in range(game.n):
            sp: PathSpace = game.spaces[i]
            order = self.net.order_path_edges(
                tree_profile[i], frm=sp.terminal, to=self.source
            )
            if order is None:
                raise InputError(f"choice of player {i} is not a terminal-source path")
            self.paths[i] = order
        self.aux: dict[tuple, AuxEdge] = {}
        self.open_edges: set[int] = set()
        for items in self.paths.values():
            self.open_edges.update(items)
        # shares of closed items; users only, zero entries kept on purpose
        self.closed_shares: dict[ItemId, dict[int, Fraction]] = {}
        self.aux_payer: dict[tuple, int] = {}
        self.replacements: list[Replacement] = []
        self.events: list[tuple] = []  # ("close"|"drop", edge, player, cost delta)
        self._check_tree()
        self._build_aux_edges()

    # ---- structure helpers ------------------------------------------

    def item_ends(self, item: ItemId) -> tuple[Vertex, Vertex]:
        if isinstance(item, tuple) and item and item[0] == "aux":
            return (item[1], item[2])
        return self.net.endpoints[item]

    def item_cost(self, item: ItemId) -> Fraction:
        if isinstance(item, tuple) and item and item[0] == "aux":
            return self.aux[item].cost
        return self.game.costs[item].fixed_value

    def tree_items(self) -> set:
        out: set = set()
        for items in self.paths.values():
            out.update(items)
        return out

    def tree_cost(self) -> Fraction:
        return sum((self.item_cost(it) for it in self.tree_items()), _ZERO)

    def users(self, item: ItemId) -> list[int]:
        return [i for i in range(self.game.n) if item in self.paths[i]]

    def _check_tree(self) -> dict[Vertex, int]:
        """Verify the union of paths is a tree rooted at the source and
        return vertex depths (in items)."""
        items = self.tree_items()
        adj: dict[Vertex, list] = {self.source: []}
        for it in items:
            u, v = self.item_ends(it)
            adj.setdefault(u, []).append((v, it))
            adj.setdefault(v, []).append((u, it))
        depth = {self.source: 0}
        frontier = [self.source]
        while frontier:
            nxt = []
            for x in frontier:
                for y, _it in adj.get(x, ()):
                    if y not in depth:
                        depth[y] = depth[x] + 1
                        nxt.append(y)
            frontier = nxt
        if len(depth) != len(items) + 1 or any(v not in depth for v in adj):
            raise InternalInvariant("player paths do not form a tree")
        return depth

    def _vertex_walk(self, i: int) -> list[Vertex]:
        sp: PathSpace = self.game.spaces[i]
        out = [sp.terminal]
        for it in self.paths[i]:
            u, v = self.item_ends(it)
            out.append(v if out[-1] == u else u)
        if out[-1] != self.source:
            raise InternalInvariant(f"path of player {i} does not end at the source")
        return out

    def _build_aux_edges(self) -> None:
        net = self.net

        def weight(eid: int) -> Fraction:
            return self.game.costs[eid].fixed_value

        trees: dict[Vertex, dict] = {}
        for i in range(self.game.n):
            # pairs (deeper, shallower): walk runs terminal -> source
            walk = self._vertex_walk(i)
            for a in range(0, len(walk) - 1):
                deep = walk[a]
                if deep not in trees:
                    trees[deep] = net.dijkstra(deep, weight)
                reach = trees[deep]
                for b in range(a + 1, len(walk)):
                    shallow = walk[b]
                    key = ("aux", deep, shallow)
                    if key in self.aux or shallow not in reach:
                        continue
                    cost, _vseq, eseq = reach[shallow]
                    self.aux[key] = AuxEdge(deep, shallow, eseq, cost)

    # ---- pricing ----------------------------------------------------

    def _working_cost(self, i: int, item: ItemId, restored: Optional[int] = None) -> Fraction:
        """Price of one auxiliary-graph edge for player i.

        Open tree edges are free for everyone; closed items cost their
        assigned share for users and the full price for joiners; the edge
        currently being processed (`restored`) costs its full price."""
        if item == restored:
            return self.item_cost(item)
        assigned = self.closed_shares.get(item)
        if assigned is not None:
            return assigned.get(i, self.item_cost(item))
        if isinstance(item, tuple) and item and item[0] == "aux":
            return self.aux[item].cost
        if item in self.open_edges:
            return _ZERO
        return self.item_cost(item)

    def _ghat_best(self, i: int, restored: int) -> Fraction:
        """Cheapest terminal-source connection for player i in the
        auxiliary graph, with `restored` at full price.  Cross-check for
        the structured deviation search."""
        items = list(self.tree_items()) + [
            aux.item for aux in self.aux.values() if aux.item not in self.tree_items()
        ]
        adj: dict[Vertex, list] = {}
        directed = self.net.directed
        for it in items:
            u, v = self.item_ends(it)  # aux edges run deep -> shallow
            adj.setdefault(u, []).append((v, it))
            if not directed:
                adj.setdefault(v, []).append((u, it))
        start = self.game.spaces[i].terminal
        dist = {start: _ZERO}
        heap = [(_ZERO, 0, start)]
        tick = 0
        while heap:
            d, _k, x = heapq.heappop(heap)
            if d > dist[x]:
                continue
            if x == self.source:
                continue
            for y, it in adj.get(x, ()):  # directed graphs walk arc direction
                nd = d + self._working_cost(i, it, restored=restored)
                if y not in dist or nd < dist[y]:
                    dist[y] = nd
                    tick += 1
                    heapq.heappush(heap, (nd, tick, y))
        if self.source not in dist:
            raise InternalInvariant("auxiliary graph lost source connectivity")
        return dist[self.source]

    def max_contribution(self, i: int, e: int) -> tuple[Fraction, Optional[tuple]]:
        """Willingness of player i to pay for open edge e on their path.

        Returns (delta, deviation) where deviation is None when staying is
        weakly best, else (deviation vertex, rejoin vertex, aux key).
        Deviations follow the player's path to a vertex below e, take one
        auxiliary edge over e, and continue along the tree above.
        """
        items = self.paths[i]
        if e not in items:
            raise InputError(f"edge {e} is not on the path of player {i}")
        walk = self._vertex_walk(i)
        p = items.index(e)
        stay = sum((self._working_cost(i, it, restored=e) for it in items), _ZERO)
        base = stay - self.item_cost(e)
        best: Optional[tuple] = None  # (cost, -a, b, key)
        for a in range(0, p + 1):
            prefix = sum((self._working_cost(i, items[j], restored=e) for j in range(a)), _ZERO)
            for b in range(p + 1, len(walk)):
                key = ("aux", walk[a], walk[b])
                aux = self.aux.get(key)
                if aux is None:
                    continue
                tail = sum(
                    (self._working_cost(i, items[j], restored=e) for j in range(b, len(items))),
                    _ZERO,
                )
                cost = prefix + aux.cost + tail
                rank = (cost, -a, b)
                if best is None or rank < best[0]:
                    best = (rank, (walk[a], walk[b], key))
        ghat = self._ghat_best(i, restored=e)
        structured = stay if best is None else min(stay, best[0][0])
        if ghat < structured:
            raise InternalInvariant(
                f"unstructured deviation beats the structured ones for player {i}"
            )
        if best is None or stay <= best[0][0]:
            return self.item_cost(e), None
        return best[0][0] - base, best[1]

    # ---- bottom-up loop ---------------------------------------------

    def _next_open_edge(self) -> Optional[int]:
        if not self.open_edges:
            return None
        depth = self._check_tree()

        def edge_depth(eid: int) -> int:
            u, v = self.item_ends(eid)
            return max(depth[u], depth[v])

        return max(self.open_edges, key=lambda eid: (edge_depth(eid), -eid))

    def process_next(self) -> bool:
        """Price one open edge; True while work remains."""
        e = self._next_open_edge()
        if e is None:
            return False
        users = self.users(e)
        if not users:
            raise InternalInvariant(f"open edge {e} has no users")
        contrib = {i: self.max_contribution(i, e) for i in users}
        cost = self.item_cost(e)
        if cost <= sum((contrib[i][0] for i in users), _ZERO):
            shares: dict[int, Fraction] = {}
            remaining = cost
            for i in users:
                take = min(contrib[i][0], remaining)
                shares[i] = take
                remaining -= take
            if remaining != 0:
                raise InternalInvariant(f"edge {e} left unpaid by water-filling")
            self.closed_shares[e] = shares
            self.open_edges.discard(e)
            self.events.append(("close", e, users[0], _ZERO))
            return True
        self._drop_edge(e, users, contrib)
        return True

    def _drop_edge(self, e: int, users: list[int], contrib: dict) -> None:
        before = self.tree_cost()
        deviation: dict[int, tuple] = {}
        for i in users:
            if contrib[i][1] is None:
                raise InternalInvariant(
                    "player without deviation vertex on a dropped edge"
                )
            deviation[i] = contrib[i][1]
        walks = {i: self._vertex_walk(i) for i in users}
        positions = {i: self.paths[i].index(e) for i in users}
        dev_vertices = {v for v, _u, _k in deviation.values()}
        highest: dict[int, Vertex] = {}
        for i in users:
            below = walks[i][: positions[i] + 1]
            options = [a for a, v in enumerate(below) if v in dev_vertices]
            if not options:
                raise InternalInvariant("no deviation vertex on a user's path")
            highest[i] = below[max(options)]
        chosen: list[Vertex] = sorted(set(highest.values()), key=self.net.vindex.get)
        payers = []
        for v in chosen:
            reps = [i for i in users if deviation[i][0] == v]
            if not reps:
                raise InternalInvariant("deviation group without a representative")
            rep = min(reps)
            _v, u, key = deviation[rep]
            aux = self.aux[key]
            riders = [j for j in users if highest[j] == v]
            tail = self.paths[rep][walks[rep].index(u) :]
            share_map = {rep: aux.cost}
            for j in riders:
                prefix = self.paths[j][: walks[j].index(v)]
                self.paths[j] = tuple(prefix) + (key,) + tuple(tail)
                if j != rep:
                    share_map[j] = _ZERO
            self.closed_shares[key] = share_map
            self.aux_payer[key] = rep
            payers.append(rep)
        self.open_edges.discard(e)
        # edges below e were closed earlier (bottom-up order), but open
        # edges above e may lose all users when reroutes jump over them;
        # they simply leave the tree unpriced
        self.open_edges &= self.tree_items()
        after = self.tree_cost()
        if not after < before:
            raise InternalInvariant("tree replacement failed to reduce tree cost")
        self._check_tree()
        self.events.append(("drop", e, payers[0], after - before))
        self.replacements.append(
            Replacement(
                edge=e,
                deviation_vertices=tuple(chosen),
                payers=tuple(payers),
                tree_cost_before=before,
                tree_cost_after=after,
            )
        )

    def run(self) -> None:
        guard = 0
        limit = 2 * len(self.net.edge_ids) + len(self.aux) + 10
        while self.process_next():
            guard += 1
            if guard > limit:
                raise InternalInvariant("bottom-up loop failed to terminate")


# -- expansion -------------------------------------------------------------


@dataclass(frozen=True)
class SingleSourceResult:
    profile: Profile
    protocol: SeparableProtocol
    tree_profile: Profile
    input_cost: Fraction
    output_cost: Fraction
    replacements: tuple[Replacement, ...]
    aux_in_tree: tuple[tuple, ...]
    repairs: tuple[tuple, ...]  # (resource, player, amount) balance fixes
    events: tuple[tuple, ...] = ()  # ("close"|"drop", edge, player, cost delta)


def _loop_erased(
    state: AuxiliaryGraph, start: Vertex, walk_edges: list[int]
) -> list[int]:
    """Erase loops from a walk given by graph edge ids, keeping order."""
    net = state.net
    stack: list[tuple[Vertex, Optional[int]]] = [(start, None)]
    at = start
    for eid in walk_edges:
        at = net.other_end(eid, at)
        hit = next((k for k, (v, _e) in enumerate(stack) if v == at), None)
        if hit is not None:
            del stack[hit + 1 :]
        else:
            stack.append((at, eid))
    return [e for _v, e in stack[1:] if e is not None]


def expand_and_assign(state: AuxiliaryGraph) -> tuple[Profile, SharingTable, tuple]:
    """Replace auxiliary edges by their stored paths and settle payments.

    Kept tree edges keep their closed shares for players who still use
    them.  Expansion edges are charged in global player order: the payer
    of the auxiliary edge pays an expansion edge in full unless it already
    carries shares.  Walks that self-intersect after expansion are
    loop-erased; if that strands part of a closed edge's cost, the deficit
    is assigned to the smallest-index remaining user and reported."""
    game = state.game
    expanded: dict[int, list[int]] = {}
    expansion_of: dict[int, list[int]] = {i: [] for i in range(game.n)}
    for i in range(game.n):
        walk: list[int] = []
        for it in state.paths[i]:
            if isinstance(it, tuple) and it and it[0] == "aux":
                aux = state.aux[it]
                walk.extend(aux.gpath)
                if state.aux_payer.get(it) == i:
                    expansion_of[i].extend(aux.gpath)
            else:
                walk.append(it)
        start = game.spaces[i].terminal
        expanded[i] = _loop_erased(state, start, walk)
    profile = Profile([frozenset(expanded[i]) for i in range(game.n)])
    game.validate_profile(profile)

    shares: dict[tuple[int, int], Fraction] = {}

    def paid(e: int) -> Fraction:
        return sum((shares.get((i, e), _ZERO) for i in range(game.n)), _ZERO)

    for item, table in state.closed_shares.items():
        if isinstance(item, tuple):
            continue  # auxiliary; settled through expansion charging
        for i, v in table.items():
            if v != 0 and item in profile[i]:
                shares[(i, item)] = v
    for i in range(game.n):
        for e in expansion_of[i]:
            if e in profile[i] and paid(e) == 0:
                shares[(i, e)] = game.costs[e].fixed_value
    repairs: list[tuple] = []
    for e in sorted(profile.used_resources(), key=game.resource_key):
        cost = game.costs[e].fixed_value
        total = paid(e)
        if total > cost:
            raise InternalInvariant(f"edge {e} overpaid after expansion")
        if total < cost:
            payer = min(i for i in range(game.n) if e in profile[i])
            shares[(payer, e)] = shares.get((payer, e), _ZERO) + cost - total
            repairs.append((e, payer, cost - total))
    return profile, SharingTable(profile, shares), tuple(repairs)


def transform_single_source(game: GameModel, profile: Profile) -> SingleSourceResult:
    """Full pipeline: tree profile, bottom-up pricing, expansion.

    The result's protocol is budget balanced by construction; equilibrium
    of the output profile is established by the pricing pass and should be
    re-verified by callers that need a certificate.
    """
    input_cost = total_cost(game, profile)
    tree_profile = to_tree_profile(game, profile)
    state = AuxiliaryGraph(game, tree_profile)
    state.run()
    out, table, repairs = expand_and_assign(state)
    protocol = SeparableProtocol(game, table)
    output_cost = total_cost(game, out)
    if output_cost > input_cost:
        raise InternalInvariant("transform increased total cost")
    aux_in_tree = []
    for it in sorted(state.tree_items(), key=str):
        if not isinstance(it, tuple):
            continue
        payers = [i for i, v in state.closed_shares[it].items() if v != 0]
        expected = [state.aux_payer[it]] if state.aux[it].cost != 0 else []
        if payers != expected:
            raise InternalInvariant(f"auxiliary edge {it} not paid by one player")
        aux_in_tree.append((it, state.aux_payer[it]))
    aux_in_tree = tuple(aux_in_tree)
    return SingleSourceResult(
        profile=out,
        protocol=protocol,
        tree_profile=tree_profile,
        input_cost=input_cost,
        output_cost=output_cost,
        replacements=tuple(state.replacements),
        aux_in_tree=aux_in_tree,
        repairs=repairs,
        events=tuple(state.events),
    )


# -- reductions and helpers ------------------------------------------------


def _fresh_label(net: Network, base: str) -> str:
    label = base
    while net.has_vertex(label):
        label += "_"
    return label


def reduce_multi_source(game: GameModel) -> tuple[GameModel, dict[int, int]]:
    """Model player-specific sources by one shared source.

    Adds a super source with a zero-cost edge to each player's own source;
    foreign players get a prohibitive delay on that edge, larger than any
    achievable total cost, so equilibria and optima correspond one-to-one
    with unchanged costs.
    """
    for i, sp in enumerate(game.spaces):
        if sp.kind != "path":
            raise UnsupportedSpace(f"player {i} does not have a path space")
    net = game.network
    big = Fraction(1)
    for e in game.resources:
        big += game.costs[e].fixed_value
    for i in range(game.n):
        for e in game.resources:
            big += game.delay(i, e)
    s = _fresh_label(net, "__s__")
    next_id = max(game.resources, default=-1) + 1
    edges = [(eid, *net.endpoints[eid]) for eid in net.edge_ids]
    new_edge_of: dict[int, int] = {}
    costs = dict(game.costs)
    delays: dict[tuple[int, int], Fraction] = {
        (i, e): game.delay(i, e)
        for i in range(game.n)
        for e in game.resources
        if game.delay(i, e) != 0
    }
    resources = list(game.resources)
    spaces = []
    for i in range(game.n):
        sp: PathSpace = game.spaces[i]
        eid = next_id
        next_id += 1
        new_edge_of[i] = eid
        # direction source -> super source so terminal-to-source walks
        # can finish through it in directed graphs
        edges.append((eid, sp.source, s))
        resources.append(eid)
        costs[eid] = CostFunction(fixed=0)
        for j in range(game.n):
            if j != i:
                delays[(j, eid)] = big
        spaces.append(PathSpace(source=s, terminal=sp.terminal))
    new_net = Network(edges, directed=net.directed, vertices=list(net.vertices) + [s])
    new_game = GameModel(
        players=game.n,
        resources=resources,
        costs=costs,
        spaces=spaces,
        delays=delays,
        network=new_net,
    )
    return new_game, new_edge_of


def reduce_group_connection(
    network: Network,
    costs: dict[int, CostFunction],
    source: Vertex,
    groups: Sequence[Iterable[Vertex]],
) -> tuple[GameModel, dict[int, Vertex]]:
    """Players wanting to reach the source from any vertex of their group
    get a private super terminal wired into the group by zero-cost edges.

    Directed networks only, matching the group-connection model.
    """
    if not network.directed:
        raise UnsupportedSpace("group connection games are directed")
    next_id = max(network.edge_ids, default=-1) + 1
    edges = [(eid, *network.endpoints[eid]) for eid in network.edge_ids]
    all_costs = dict(costs)
    vertices = list(network.vertices)
    spaces = []
    terminal_of: dict[int, Vertex] = {}
    for i, group in enumerate(groups):
        t = _fresh_label(network, f"__t{i}__")
        vertices.append(t)
        terminal_of[i] = t
        for v in group:
            if not network.has_vertex(v):
                raise InputError(f"group vertex {v!r} not in network")
            edges.append((next_id, t, v))
            all_costs[next_id] = CostFunction(fixed=0)
            next_id += 1
        spaces.append(PathSpace(source=source, terminal=t))
    resources = sorted(all_costs)
    new_net = Network(edges, directed=True, vertices=vertices)
    game = GameModel(
        players=len(spaces),
        resources=resources,
        costs=all_costs,
        spaces=spaces,
        network=new_net,
    )
    return game, terminal_of


def steiner_edges(
    network: Network,
    costs: dict[int, Fraction],
    source: Vertex,
    terminals: Sequence[Vertex],
) -> frozenset:
    """Classic metric-closure 2-approximation of a cheapest source-terminal
    tree, as an edge set."""
    def weight(eid: int) -> Fraction:
        return rat(costs[eid])

    nodes = [source] + [t for t in terminals if t != source]
    reach = {v: network.dijkstra(v, weight) for v in nodes}
    connected = [source]
    touched = {source}
    edges: set[int] = set()
    pending = set(nodes[1:])
    while pending:
        best = None
        for t in sorted(pending, key=network.vindex.get):
            for v in connected:
                hit = reach[v].get(t)
                if hit is None:
                    continue
                rank = (hit[0], network.vindex[v], network.vindex[t])
                if best is None or rank < best[0]:
                    best = (rank, t, hit)
        if best is None:
            raise Disconnected("metric closure is not connected")
        _rank, t, (_d, vseq, eseq) = best
        edges.update(eseq)
        touched.update(vseq)
        for x in nodes:
            if x in pending and x in touched:  # hit on the way, no extra path
                pending.discard(x)
                connected.append(x)
    return frozenset(edges)


def approx_steiner_tree(game: GameModel) -> Profile:
    """Seed profile: route every player inside a 2-approximate Steiner tree
    spanning the source and all terminals."""
    source = _require_single_source(game)
    net = game.network
    costs = {e: game.costs[e].fixed_value for e in game.resources}
    terminals = [game.spaces[i].terminal for i in range(game.n)]
    tree = steiner_edges(net, costs, source, terminals)
    blocked = frozenset(net.edge_ids) - tree
    choices = []
    for i in range(game.n):
        t = terminals[i]
        if t == source:
            choices.append(frozenset())
            continue
        hit = net.shortest_path(
            t, source, lambda e: costs[e], blocked_edges=blocked
        )
        if hit is None:
            raise Disconnected(f"terminal {t!r} lost in the Steiner tree")
        choices.append(frozenset(hit[2]))
    profile = Profile(choices)
    game.validate_profile(profile)
    return profile
