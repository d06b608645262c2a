"""Graph substrate for path-based congestion games.

A `Network` is a multigraph whose edges carry the resource ids of the game;
parallel edges are distinct resources.  Vertices may be arbitrary hashable
labels; their global order is the order of first appearance, and all
tie-breaking (shortest paths, enumeration order) is derived from it so that
every operation in the package is deterministic.

Directed networks orient each edge u -> v.  Players in directed games walk
from their terminal towards the source, so feasibility and shortest-path
queries take an explicit direction.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Optional, Sequence

import networkx as nx

from .errors import BudgetExceeded, Disconnected, InputError

Vertex = Hashable
EdgeId = int

_ZERO = Fraction(0)


class Network:
    """Multigraph with stable vertex order and integer edge ids."""

    def __init__(
        self,
        edges: Iterable[tuple[EdgeId, Vertex, Vertex]],
        directed: bool = False,
        vertices: Sequence[Vertex] = (),
    ) -> None:
        self.directed = directed
        self.endpoints: dict[EdgeId, tuple[Vertex, Vertex]] = {}
        order: list[Vertex] = []
        seen: set[Vertex] = set()
        for v in vertices:
            if v not in seen:
                seen.add(v)
                order.append(v)
        for eid, u, v in edges:
            if eid in self.endpoints:
                raise InputError(f"duplicate edge id {eid}")
            if u == v:
                raise InputError(f"self-loop on vertex {u!r} (edge {eid})")
            self.endpoints[eid] = (u, v)
            for w in (u, v):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
        self.vertices: tuple[Vertex, ...] = tuple(order)
        self.vindex: dict[Vertex, int] = {v: k for k, v in enumerate(order)}
        self.edge_ids: tuple[EdgeId, ...] = tuple(sorted(self.endpoints))
        self._adj: dict[Vertex, list[tuple[Vertex, EdgeId]]] = {v: [] for v in order}
        self._radj: dict[Vertex, list[tuple[Vertex, EdgeId]]] = {v: [] for v in order}
        for eid in self.edge_ids:
            u, v = self.endpoints[eid]
            self._adj[u].append((v, eid))
            self._radj[v].append((u, eid))
            if not directed:
                self._adj[v].append((u, eid))
                self._radj[u].append((v, eid))
        key = lambda pair: (self.vindex[pair[0]], pair[1])
        for v in order:
            self._adj[v].sort(key=key)
            self._radj[v].sort(key=key)

    # -- basic queries -------------------------------------------------

    def has_vertex(self, v: Vertex) -> bool:
        return v in self.vindex

    def other_end(self, eid: EdgeId, v: Vertex) -> Vertex:
        u, w = self.endpoints[eid]
        if v == u:
            return w
        if v == w:
            return u
        raise InputError(f"vertex {v!r} not an endpoint of edge {eid}")

    def neighbors(self, v: Vertex, reverse: bool = False) -> list[tuple[Vertex, EdgeId]]:
        return (self._radj if reverse else self._adj)[v]

    def subnetwork(self, edge_ids: Iterable[EdgeId], vertices: Sequence[Vertex] = ()) -> "Network":
        """Subgraph on the given edges (same ids), plus any extra vertices."""
        keep = sorted(set(edge_ids))
        base = [v for v in self.vertices if v in set(vertices)]
        return Network(
            [(eid, *self.endpoints[eid]) for eid in keep],
            directed=self.directed,
            vertices=base,
        )

    # -- shortest paths ------------------------------------------------

    def dijkstra(
        self,
        start: Vertex,
        weight: Callable[[EdgeId], Fraction],
        reverse: bool = False,
        blocked_vertices: frozenset = frozenset(),
        blocked_edges: frozenset = frozenset(),
    ) -> dict[Vertex, tuple[Fraction, tuple[Vertex, ...], tuple[EdgeId, ...]]]:
        """Single-source shortest paths with exact weights.

        Among equal-cost paths the lexicographically smallest vertex-index
        sequence wins (then smallest edge-id sequence), which pins down a
        unique answer on multigraphs.  Vertices in `blocked_vertices` may be
        reached but never left, so they can only be path endpoints.
        """
        if start in blocked_edges:
            raise InputError("blocked_edges must contain edge ids")
        result: dict[Vertex, tuple[Fraction, tuple[Vertex, ...], tuple[EdgeId, ...]]] = {}
        vpath0 = (self.vindex[start],)
        heap: list[tuple[Fraction, tuple[int, ...], tuple[EdgeId, ...], Vertex]] = [
            (_ZERO, vpath0, (), start)
        ]
        while heap:
            dist, vkey, epath, x = heapq.heappop(heap)
            if x in result:
                continue
            vpath = tuple(self.vertices[k] for k in vkey)
            result[x] = (dist, vpath, epath)
            if x in blocked_vertices and x != start:
                continue
            for nbr, eid in self.neighbors(x, reverse=reverse):
                if nbr in result or eid in blocked_edges:
                    continue
                w = weight(eid)
                if w < 0:
                    raise InputError(f"negative weight on edge {eid}")
                heapq.heappush(
                    heap, (dist + w, vkey + (self.vindex[nbr],), epath + (eid,), nbr)
                )
        return result

    def shortest_path(
        self,
        frm: Vertex,
        to: Vertex,
        weight: Callable[[EdgeId], Fraction],
        blocked_vertices: frozenset = frozenset(),
        blocked_edges: frozenset = frozenset(),
    ) -> Optional[tuple[Fraction, tuple[Vertex, ...], tuple[EdgeId, ...]]]:
        """Cheapest frm -> to path, or None if unreachable.

        In directed networks the path follows edge orientation frm -> to.
        """
        tree = self.dijkstra(
            frm, weight, blocked_vertices=blocked_vertices, blocked_edges=blocked_edges
        )
        return tree.get(to)

    # -- enumeration ---------------------------------------------------

    def simple_paths(
        self,
        frm: Vertex,
        to: Vertex,
        max_paths: Optional[int] = None,
        reverse_order: bool = False,
    ) -> Iterator[tuple[EdgeId, ...]]:
        """All simple frm -> to paths as edge-id tuples, DFS order.

        `reverse_order` flips the adjacency scan; it exists so callers can
        cross-check an enumeration with an independent traversal order.
        Raises BudgetExceeded instead of truncating.
        """
        if frm not in self.vindex or to not in self.vindex:
            raise InputError("endpoint not in network")
        count = 0
        if frm == to:
            yield ()
            return
        stack: list[tuple[Vertex, tuple[EdgeId, ...], frozenset]] = []
        order = self.neighbors(frm)
        order = list(reversed(order)) if not reverse_order else list(order)
        # stack holds frames in reverse visit order so pop() walks ascending.
        for nbr, eid in order:
            stack.append((nbr, (eid,), frozenset((frm,))))
        while stack:
            x, epath, visited = stack.pop()
            if x == to:
                count += 1
                if max_paths is not None and count > max_paths:
                    raise BudgetExceeded(
                        f"more than {max_paths} simple paths between {frm!r} and {to!r}"
                    )
                yield epath
                continue
            if x in visited:
                continue
            nvisited = visited | {x}
            nxt = self.neighbors(x)
            nxt = list(reversed(nxt)) if not reverse_order else list(nxt)
            for nbr, eid in nxt:
                if nbr not in nvisited:
                    stack.append((nbr, epath + (eid,), nvisited))

    # -- feasibility ---------------------------------------------------

    def is_path_edge_set(self, edge_ids: Iterable[EdgeId], frm: Vertex, to: Vertex) -> bool:
        """True iff the edge set forms a simple frm-to path.

        Directed networks require every edge to be traversed along its
        orientation when walking frm -> to.
        """
        eids = list(edge_ids)
        if len(set(eids)) != len(eids):
            return False
        if not eids:
            return frm == to and frm in self.vindex
        if frm == to:
            return False
        try:
            order = self.order_path_edges(eids, frm, to)
        except InputError:
            return False
        return order is not None

    def order_path_edges(
        self, edge_ids: Iterable[EdgeId], frm: Vertex, to: Vertex
    ) -> Optional[tuple[EdgeId, ...]]:
        """Order an edge set into the frm -> to walk, or None if impossible."""
        eids = set(edge_ids)
        for eid in eids:
            if eid not in self.endpoints:
                raise InputError(f"unknown edge id {eid}")
        incident: dict[Vertex, list[EdgeId]] = {}
        for eid in eids:
            u, v = self.endpoints[eid]
            incident.setdefault(u, []).append(eid)
            incident.setdefault(v, []).append(eid)
        if not eids:
            return () if frm == to else None
        walk: list[EdgeId] = []
        seen_vertices = {frm}
        x = frm
        while x != to or not walk:
            candidates = [e for e in incident.get(x, ()) if e not in set(walk)]
            if self.directed:
                candidates = [e for e in candidates if self.endpoints[e][0] == x]
            if len(candidates) != 1:
                return None
            eid = candidates[0]
            x = self.other_end(eid, x)
            if x in seen_vertices:
                return None
            seen_vertices.add(x)
            walk.append(eid)
            if len(walk) > len(eids):
                return None
        return tuple(walk) if len(walk) == len(eids) else None

    # -- structure -----------------------------------------------------

    def to_nx(self, edge_ids: Optional[Iterable[EdgeId]] = None) -> "nx.MultiGraph":
        g: nx.MultiGraph = nx.MultiDiGraph() if self.directed else nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for eid in self.edge_ids if edge_ids is None else sorted(set(edge_ids)):
            u, v = self.endpoints[eid]
            g.add_edge(u, v, key=eid)
        return g

    def connected(self, frm: Vertex, to: Vertex) -> bool:
        if frm == to:
            return frm in self.vindex
        tree = self.dijkstra(frm, lambda _eid: _ZERO)
        return to in tree

    def blocks(self) -> list[tuple[frozenset, frozenset]]:
        """Biconnected components of the underlying undirected graph.

        Returns (vertex set, edge-id set) pairs.  Parallel edges always land
        in the same block as their endpoints.
        """
        simple = nx.Graph()
        simple.add_nodes_from(self.vertices)
        for eid in self.edge_ids:
            u, v = self.endpoints[eid]
            simple.add_edge(u, v)
        comps = [frozenset(c) for c in nx.biconnected_components(simple)]
        out = []
        for verts in comps:
            eids = frozenset(
                eid
                for eid in self.edge_ids
                if self.endpoints[eid][0] in verts and self.endpoints[eid][1] in verts
            )
            out.append((verts, eids))
        # deterministic order: by smallest vertex index in the block
        out.sort(key=lambda be: min(self.vindex[v] for v in be[0]))
        return out

    def blocks_between(self, s: Vertex, t: Vertex) -> frozenset:
        """Edge ids of all blocks on the block-cut-tree path from s to t.

        This is exactly the union of all simple s-t paths.  Raises
        Disconnected when no s-t path exists; returns the empty set for
        s == t.
        """
        if s not in self.vindex or t not in self.vindex:
            raise InputError("endpoint not in network")
        if s == t:
            return frozenset()
        simple = nx.Graph()
        simple.add_nodes_from(self.vertices)
        for eid in self.edge_ids:
            u, v = self.endpoints[eid]
            simple.add_edge(u, v)
        if not nx.has_path(simple, s, t):
            raise Disconnected(f"no path between {s!r} and {t!r}")
        blocks = self.blocks()
        cuts = set(nx.articulation_points(simple))
        bc = nx.Graph()
        for k, (verts, _eids) in enumerate(blocks):
            bc.add_node(("B", k))
            for v in verts:
                if v in cuts:
                    bc.add_edge(("B", k), ("C", v))

        def node_of(v: Vertex):
            if v in cuts:
                return ("C", v)
            for k, (verts, _eids) in enumerate(blocks):
                if v in verts:
                    return ("B", k)
            raise Disconnected(f"vertex {v!r} is isolated")

        ns, nt = node_of(s), node_of(t)
        chain = nx.shortest_path(bc, ns, nt) if ns != nt else [ns]
        edge_sets = [blocks[node[1]][1] for node in chain if node[0] == "B"]
        return frozenset().union(*edge_sets) if edge_sets else frozenset()
