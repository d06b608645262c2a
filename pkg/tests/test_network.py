"""Multigraph substrate: shortest paths, enumeration, path feasibility."""

from fractions import Fraction as F

import pytest

from sepshare.errors import BudgetExceeded, InputError
from sepshare.network import Network


def w(costs):
    return lambda eid: F(costs[eid])


class TestConstruction:
    def test_vertex_order_is_first_appearance(self):
        net = Network([(0, "b", "a"), (1, "a", "c")], vertices=["z"])
        assert net.vertices == ("z", "b", "a", "c")
        assert net.vindex["b"] == 1

    def test_duplicate_edge_id_rejected(self):
        with pytest.raises(InputError):
            Network([(0, "a", "b"), (0, "b", "c")])

    def test_self_loop_rejected(self):
        with pytest.raises(InputError):
            Network([(0, "a", "a")])

    def test_parallel_edges_are_distinct(self):
        net = Network([(0, "a", "b"), (1, "a", "b")])
        assert net.edge_ids == (0, 1)
        assert net.endpoints[0] == net.endpoints[1]


class TestShortestPath:
    def test_basic_path(self):
        net = Network([(0, "s", "a"), (1, "a", "t"), (2, "s", "t")])
        hit = net.shortest_path("s", "t", w({0: 1, 1: 1, 2: 5}))
        assert hit == (F(2), ("s", "a", "t"), (0, 1))

    def test_tie_broken_by_vertex_order(self):
        # two cost-2 routes; the one through the earlier vertex wins
        net = Network([(0, "s", "a"), (1, "a", "t"), (2, "s", "b"), (3, "b", "t")])
        _c, vseq, _e = net.shortest_path("s", "t", w({0: 1, 1: 1, 2: 1, 3: 1}))
        assert vseq == ("s", "a", "t")

    def test_parallel_edge_tie_broken_by_edge_id(self):
        net = Network([(0, "s", "t"), (1, "s", "t")])
        assert net.shortest_path("s", "t", w({0: 3, 1: 3}))[2] == (0,)

    def test_unreachable_returns_none(self):
        net = Network([(0, "s", "a")], vertices=["s", "a", "x"])
        assert net.shortest_path("s", "x", w({0: 1})) is None

    def test_directed_orientation_respected(self):
        net = Network([(0, "s", "t"), (1, "t", "s")], directed=True)
        assert net.shortest_path("s", "t", w({0: 4, 1: 1}))[2] == (0,)
        assert net.shortest_path("t", "s", w({0: 4, 1: 1}))[2] == (1,)

    def test_blocked_vertices_are_endpoints_only(self):
        # the barrier vertex may terminate a path but not be crossed
        net = Network([(0, "s", "m"), (1, "m", "t"), (2, "s", "t")])
        hit = net.shortest_path(
            "s", "t", w({0: 1, 1: 1, 2: 9}), blocked_vertices=frozenset({"m"})
        )
        assert hit[2] == (2,)

    def test_negative_weight_rejected(self):
        net = Network([(0, "s", "t")])
        with pytest.raises(InputError):
            net.shortest_path("s", "t", w({0: -1}))


class TestSimplePaths:
    def test_triangle_has_two_paths(self):
        net = Network([(0, "s", "a"), (1, "a", "t"), (2, "s", "t")])
        assert sorted(net.simple_paths("s", "t")) == [(0, 1), (2,)]

    def test_equal_source_and_target_yields_empty_path(self):
        net = Network([(0, "s", "t")])
        assert list(net.simple_paths("s", "s")) == [()]

    def test_budget_raises_instead_of_truncating(self):
        net = Network([(0, "s", "t"), (1, "s", "t"), (2, "s", "t")])
        with pytest.raises(BudgetExceeded):
            list(net.simple_paths("s", "t", max_paths=2))

    def test_reversed_scan_finds_the_same_paths(self):
        net = Network(
            [(0, "s", "a"), (1, "a", "t"), (2, "s", "b"), (3, "b", "t"), (4, "a", "b")]
        )
        forward = sorted(net.simple_paths("s", "t"))
        backward = sorted(net.simple_paths("s", "t", reverse_order=True))
        assert forward == backward


class TestPathEdgeSets:
    def test_valid_and_invalid_sets(self):
        net = Network([(0, "s", "a"), (1, "a", "t"), (2, "s", "t")])
        assert net.is_path_edge_set({0, 1}, "s", "t")
        assert net.is_path_edge_set({2}, "s", "t")
        assert not net.is_path_edge_set({0, 2}, "s", "t")  # not a single walk
        assert not net.is_path_edge_set({0, 1, 2}, "s", "t")  # cycle
        assert net.is_path_edge_set(set(), "s", "s")
        assert not net.is_path_edge_set(set(), "s", "t")

    def test_order_path_edges(self):
        net = Network([(0, "s", "a"), (1, "a", "t")])
        assert net.order_path_edges({0, 1}, "t", "s") == (1, 0)
        assert net.order_path_edges({0}, "t", "s") is None
        with pytest.raises(InputError):
            net.order_path_edges({9}, "s", "a")

    def test_directed_sets_must_follow_orientation(self):
        net = Network([(0, "t", "s")], directed=True)
        assert net.is_path_edge_set({0}, "t", "s")
        assert not net.is_path_edge_set({0}, "s", "t")


class TestBlocks:
    def test_bridge_separates_blocks(self):
        net = Network(
            [(0, "a", "b"), (1, "b", "c"), (2, "c", "a"), (3, "c", "d")]
        )
        blocks = net.blocks()
        edge_sets = sorted(sorted(es) for _vs, es in blocks)
        assert edge_sets == [[0, 1, 2], [3]]

    def test_blocks_between_collects_the_route(self):
        net = Network(
            [(0, "a", "b"), (1, "b", "c"), (2, "c", "a"), (3, "c", "d"), (4, "d", "e")]
        )
        assert net.blocks_between("a", "d") == frozenset({0, 1, 2, 3})
        assert net.blocks_between("c", "d") == frozenset({3})

    def test_connected(self):
        net = Network([(0, "a", "b")], vertices=["a", "b", "c"])
        assert net.connected("a", "b")
        assert not net.connected("a", "c")
