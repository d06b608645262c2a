"""Single-source connection games: tree rebuilding, pricing, reductions."""

import itertools
import random
from fractions import Fraction as F

import pytest

from _helpers import path_game
from _oracles import exhaustive_steiner_minimum
from sepshare.errors import Disconnected, InfeasibleProfile, UnsupportedSpace
from sepshare.game import Profile, total_cost
from sepshare.gen import gen_tree
from sepshare.oracle import brute_force_enforceable, brute_force_optimum, profiles_iter
from sepshare.protocol import verify_budget_balance, verify_pne
from sepshare.singlesource import (
    AuxiliaryGraph,
    approx_steiner_tree,
    reduce_group_connection,
    reduce_multi_source,
    steiner_edges,
    to_tree_profile,
    transform_single_source,
)


class TestTreeProfile:
    def test_tree_input_is_unchanged(self):
        g = path_game([("s", "a", 2), ("a", "t", 3)], [("s", "t"), ("s", "a")])
        p = Profile([{0, 1}, {0}])
        assert to_tree_profile(g, p) == p

    def test_cycle_loses_its_dearest_edge(self):
        g = path_game(
            [("s", "u", 3), ("u", "v", 4), ("v", "s", 3)], [("s", "u"), ("s", "v")]
        )
        p = Profile([{1, 2}, {1, 0}])  # paths overlap into a 10-cost cycle
        tree = to_tree_profile(g, p)
        assert tree == Profile([{0}, {2}])
        assert total_cost(g, tree) == 6

    def test_single_player_path_is_identical(self):
        g = path_game([("s", "a", 2), ("a", "t", 3), ("s", "t", 9)], [("s", "t")])
        assert to_tree_profile(g, Profile([{0, 1}])) == Profile([{0, 1}])

    def test_unreachable_terminal_raises(self):
        from sepshare.game import CostFunction, GameModel, PathSpace
        from sepshare.network import Network

        net = Network([(0, "s", "a")], vertices=["s", "a", "z"])
        g = GameModel(
            players=1,
            resources=[0],
            costs={0: CostFunction(fixed=1)},
            spaces=[PathSpace(source="s", terminal="z")],
            network=net,
        )
        with pytest.raises(InfeasibleProfile):
            to_tree_profile(g, Profile([frozenset()]))


class TestContribution:
    """Willingness-to-pay queries against the working auxiliary graph."""

    def test_chain_without_detours_pays_in_full(self):
        g = path_game([("s", "a", 5), ("a", "b", 3)], [("s", "b")])
        state = AuxiliaryGraph(g, Profile([{0, 1}]))
        delta, deviation = state.max_contribution(0, 1)
        assert (delta, deviation) == (F(3), None)

    def test_cheap_bypass_caps_the_contribution(self):
        g = path_game(
            [("s", "a", 10), ("a", "t", 1), ("a", "s", 4)], [("s", "t")]
        )
        state = AuxiliaryGraph(g, Profile([{0, 1}]))
        delta, deviation = state.max_contribution(0, 0)
        assert delta == 4
        vertex, rejoin, key = deviation
        assert (vertex, rejoin) == ("a", "s")
        assert state.aux[key].cost == 4

    def test_price_tie_prefers_staying(self):
        g = path_game(
            [("s", "a", 10), ("a", "t", 1), ("a", "s", 10)], [("s", "t")]
        )
        state = AuxiliaryGraph(g, Profile([{0, 1}]))
        assert state.max_contribution(0, 0) == (F(10), None)


class TestTransform:
    def test_star_players_pay_their_own_leaves(self):
        g = path_game(
            [("s", "x", 2), ("s", "y", 3), ("s", "z", 4)],
            [("s", "x"), ("s", "y"), ("s", "z")],
        )
        p = Profile([{0}, {1}, {2}])
        res = transform_single_source(g, p)
        assert res.profile == p
        assert sorted(res.protocol.table.shares.items()) == [
            ((0, 0), F(2)),
            ((1, 1), F(3)),
            ((2, 2), F(4)),
        ]

    def test_capped_trunk_is_dropped_for_private_bypasses(self):
        g = path_game(
            [("s", "m", 10), ("s", "m", 4), ("s", "m", 4)], [("s", "m"), ("s", "m")]
        )
        res = transform_single_source(g, Profile([{0}, {0}]))
        assert res.profile == Profile([{1}, {1}])
        assert (res.input_cost, res.output_cost) == (F(10), F(4))
        assert dict(res.protocol.table.shares) == {(0, 1): F(4)}
        [rep] = res.replacements
        assert (rep.edge, rep.deviation_vertices, rep.payers) == (0, ("m",), (0,))
        assert (rep.tree_cost_before, rep.tree_cost_after) == (F(10), F(4))

    def test_dear_bypasses_keep_the_trunk(self):
        g = path_game(
            [("s", "m", 10), ("m", "t1", 1), ("m", "t2", 1), ("t1", "s", 9), ("t2", "s", 9)],
            [("s", "t1"), ("s", "t2")],
        )
        res = transform_single_source(g, Profile([{1, 0}, {2, 0}]))
        assert res.profile == Profile([{0, 1}, {0, 2}])
        assert res.replacements == ()
        # trunk shares fill caps in player order: 8 then the remaining 2
        assert dict(res.protocol.table.shares) == {
            (0, 0): F(8),
            (0, 1): F(1),
            (1, 0): F(2),
            (1, 2): F(1),
        }

    def test_second_player_rides_the_replacement_for_free(self):
        g = path_game(
            [("s", "a", 12), ("a", "t1", 1), ("a", "t2", 1), ("a", "s", 5)],
            [("s", "t1"), ("s", "t2")],
        )
        res = transform_single_source(g, Profile([{1, 0}, {2, 0}]))
        assert res.profile == Profile([{1, 3}, {2, 3}])
        assert (res.input_cost, res.output_cost) == (F(14), F(7))
        # the rider keeps a zero share on the bought bypass
        assert dict(res.protocol.table.shares) == {
            (0, 1): F(1),
            (0, 3): F(5),
            (1, 2): F(1),
        }
        [rep] = res.replacements
        assert (rep.edge, rep.deviation_vertices, rep.payers) == (0, ("a",), (0,))

    def test_shared_expansion_edge_is_paid_once(self):
        g = path_game(
            [
                ("s", "b1", 10),
                ("b1", "t1", 1),
                ("s", "b2", 10),
                ("b2", "t2", 1),
                ("s", "h", 3),
                ("h", "t1", 2),
                ("h", "t2", 2),
            ],
            [("s", "t1"), ("s", "t2")],
        )
        res = transform_single_source(g, Profile([{1, 0}, {3, 2}]))
        assert res.profile == Profile([{4, 5}, {4, 6}])
        assert (res.input_cost, res.output_cost) == (F(22), F(7))
        # both reroutes pass the h-s edge; only the first payer is charged
        assert dict(res.protocol.table.shares) == {
            (0, 4): F(3),
            (0, 5): F(2),
            (1, 6): F(2),
        }
        assert [(r.edge, r.payers) for r in res.replacements] == [(0, (0,)), (2, (1,))]
        assert res.repairs == ()

    def test_each_replacement_strictly_reduces_tree_cost(self):
        g = path_game(
            [
                ("s", "b1", 10),
                ("b1", "t1", 1),
                ("s", "b2", 10),
                ("b2", "t2", 1),
                ("s", "h", 3),
                ("h", "t1", 2),
                ("h", "t2", 2),
            ],
            [("s", "t1"), ("s", "t2")],
        )
        res = transform_single_source(g, Profile([{1, 0}, {3, 2}]))
        for rep in res.replacements:
            assert rep.tree_cost_after < rep.tree_cost_before

    def test_empty_game_passes_through(self):
        g = path_game([("s", "a", 1)], [])
        res = transform_single_source(g, Profile([]))
        assert res.profile == Profile([])
        assert res.output_cost == 0

    def test_delays_are_rejected(self):
        g = path_game(
            [("s", "a", 1), ("a", "t", 1)], [("s", "t")], delays={(0, 0): F(1)}
        )
        with pytest.raises(UnsupportedSpace):
            transform_single_source(g, Profile([{0, 1}]))

    def test_random_instances_end_stable_and_balanced(self):
        rng = random.Random(2025)
        drops = 0
        for _ in range(60):
            game, profile = gen_tree(rng)
            res = transform_single_source(game, profile)
            assert res.output_cost <= res.input_cost
            assert verify_pne(game, res.protocol).ok
            assert verify_budget_balance(game, res.protocol, res.profile).ok
            for rep in res.replacements:
                assert rep.tree_cost_after < rep.tree_cost_before
            drops += len(res.replacements)
        assert drops > 0  # the sample must exercise the replacement branch

    def test_directed_instances_work_too(self):
        g = path_game(
            [("a", "s", 3), ("t", "a", 2), ("t", "s", 9)],
            [("s", "t")],
            directed=True,
        )
        res = transform_single_source(g, Profile([{1, 0}]))
        assert res.profile == Profile([{1, 0}])
        assert verify_pne(g, res.protocol).ok


class TestMultiSourceReduction:
    EDGES = [
        ("u", "v", 3),
        ("v", "w", 2),
        ("w", "x", 4),
        ("x", "u", 2),
        ("u", "w", 5),
        ("v", "x", 6),
    ]

    def test_single_player_keeps_its_optimum(self):
        g = path_game([("u", "v", 3)], [("u", "v")])
        red, emap = reduce_multi_source(g)
        assert red.delay(0, emap[0]) == 0
        assert brute_force_optimum(red).cost == brute_force_optimum(g).cost == 3
        res = transform_single_source(red, brute_force_optimum(red).profile)
        assert res.output_cost == 3

    def test_foreign_players_are_priced_out(self):
        g = path_game(self.EDGES, [("u", "w"), ("v", "x")])
        red, emap = reduce_multi_source(g)
        big = 1 + sum(F(c) for _u, _v, c in self.EDGES)
        assert red.delay(1, emap[0]) == big
        assert red.delay(0, emap[0]) == 0
        assert red.n == g.n
        assert len(red.resources) == len(g.resources) + g.n

    def test_costs_and_enforceability_carry_over(self):
        g = path_game(self.EDGES, [("u", "w"), ("v", "x")])
        red, emap = reduce_multi_source(g)
        assert brute_force_optimum(red).cost == brute_force_optimum(g).cost == 7
        for p in profiles_iter(g):
            mapped = Profile([set(p[i]) | {emap[i]} for i in range(g.n)])
            assert total_cost(g, p) == total_cost(red, mapped)
            assert brute_force_enforceable(g, p) == brute_force_enforceable(red, mapped)


class TestGroupReduction:
    def test_player_connects_through_the_cheapest_member(self):
        from sepshare.game import CostFunction
        from sepshare.network import Network

        net = Network([(0, "b", "s"), (1, "c", "s")], directed=True)
        costs = {0: CostFunction(fixed=2), 1: CostFunction(fixed=5)}
        game, terminal_of = reduce_group_connection(net, costs, "s", [["b", "c"]])
        assert game.n == 1
        t = terminal_of[0]
        assert game.spaces[0].terminal == t
        best = brute_force_optimum(game)
        assert best.cost == 2
        # the optimum runs through b over a zero-cost connector edge
        connectors = set(game.resources) - {0, 1}
        assert len(best.profile[0] & connectors) == 1

    def test_undirected_input_is_rejected(self):
        from sepshare.game import CostFunction
        from sepshare.network import Network

        net = Network([(0, "b", "s")])
        with pytest.raises(UnsupportedSpace):
            reduce_group_connection(net, {0: CostFunction(fixed=1)}, "s", [["b"]])


class TestSteiner:
    def test_source_only_terminals_need_no_edges(self):
        g = path_game([("s", "x", 2)], [("s", "s")])
        costs = {0: F(2)}
        assert steiner_edges(g.network, costs, "s", ["s"]) == frozenset()
        assert approx_steiner_tree(g) == Profile([frozenset()])

    def test_star_is_recovered_exactly(self):
        g = path_game(
            [("s", "x", 2), ("s", "y", 3), ("s", "z", 4)],
            [("s", "x"), ("s", "y"), ("s", "z")],
        )
        prof = approx_steiner_tree(g)
        assert prof == Profile([{0}, {1}, {2}])
        assert total_cost(g, prof) == 9

    def test_within_factor_two_of_exhaustive_optimum(self):
        rng = random.Random(5)
        for _ in range(20):
            game, _p = gen_tree(rng, vertices=8, players=3)
            prof = approx_steiner_tree(game)
            costs = {e: game.costs[e].fixed_value for e in game.resources}
            best = exhaustive_steiner_minimum(
                game.network,
                costs,
                game.spaces[0].source,
                [sp.terminal for sp in game.spaces],
            )
            assert total_cost(game, prof) <= 2 * best

    def test_disconnected_terminal_raises(self):
        from sepshare.network import Network

        net = Network([(0, "s", "a")], vertices=["s", "a", "z"])
        with pytest.raises(Disconnected):
            steiner_edges(net, {0: F(1)}, "s", ["z"])
