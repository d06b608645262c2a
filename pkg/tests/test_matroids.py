"""Matroid oracles, exchange deviations, and the packet-move transform."""

import itertools
import random
from fractions import Fraction as F

import pytest

from _helpers import ufl_game
from sepshare.errors import InvalidMatroid, NotABasis, NotEnforceable
from sepshare.game import GameModel, MatroidSpace, Profile, total_cost
from sepshare.gen import gen_matroid, random_bases_profile
from sepshare.lp import INFEASIBLE, OPTIMAL, LinearProgram, solve
from sepshare.matroids import (
    GraphicMatroid,
    MatroidOracle,
    PartitionMatroid,
    UniformMatroid,
    build_matroid_protocol,
    check_enforceable_matroid,
    deviation_cost,
    exchange_candidates,
    matroid_from_descriptor,
    transform_matroid,
    virtual_cost,
)
from sepshare.protocol import verify_budget_balance, verify_pne


class TestOracles:
    def test_builtin_kinds_satisfy_the_axioms(self):
        UniformMatroid([0, 1, 2, 3], 2).validate_axioms()
        PartitionMatroid([[0, 1], [2, 3, 4]], [1, 2]).validate_axioms()
        GraphicMatroid({0: ("x", "y"), 1: ("y", "z"), 2: ("z", "x")}).validate_axioms()

    def test_rank_and_bases(self):
        tri = GraphicMatroid({0: ("x", "y"), 1: ("y", "z"), 2: ("z", "x")})
        assert tri.rank == 2
        assert sorted(sorted(b) for b in tri.bases()) == [[0, 1], [0, 2], [1, 2]]
        assert tri.is_basis({0, 2})
        assert not tri.is_basis({0})

    def test_hereditary_violation_caught_lazily(self):
        class Broken(MatroidOracle):
            def _independent(self, subset):
                return subset == frozenset({0, 1})  # supersets only

        oracle = Broken([0, 1])
        assert oracle.is_independent({0, 1})
        with pytest.raises(InvalidMatroid):
            oracle.is_independent({0})

    def test_descriptor_round_trip(self):
        for m in (
            UniformMatroid([3, 5, 7], 2),
            PartitionMatroid([[0, 1], [4]], [1, 1]),
            GraphicMatroid({2: ("a", "b"), 6: ("b", "c")}),
        ):
            again = matroid_from_descriptor(m.descriptor)
            assert again.ground == m.ground
            assert sorted(again.bases()) == sorted(m.bases())


class TestExchanges:
    def test_rank_one_swaps_freely(self):
        m = UniformMatroid([0, 1], 1)
        assert sorted(exchange_candidates(m, frozenset({0}), 0)) == [0, 1]

    def test_triangle_keeps_acyclic_swaps(self):
        tri = GraphicMatroid({0: ("x", "y"), 1: ("y", "z"), 2: ("z", "x")})
        basis = frozenset({0, 1})
        assert sorted(exchange_candidates(tri, basis, 0)) == [0, 2]
        assert sorted(exchange_candidates(tri, basis, 1)) == [1, 2]

    def test_partition_swaps_stay_in_block(self):
        m = PartitionMatroid([[0, 1], [2]], [1, 1])
        assert sorted(exchange_candidates(m, frozenset({0, 2}), 0)) == [0, 1]
        assert sorted(exchange_candidates(m, frozenset({0, 2}), 2)) == [2]

    def test_requires_a_basis(self):
        with pytest.raises(NotABasis):
            exchange_candidates(UniformMatroid([0, 1], 1), frozenset({0, 1}), 0)


class TestDeviationCost:
    def test_lone_player_takes_cheapest_swap(self):
        g = ufl_game([4, 7], delays={(0, 0): F(1), (0, 1): F(2)}, players=1)
        p = Profile([{0}])
        for virtual in (False, True):
            value, target = deviation_cost(g, p, 0, 0, virtual=virtual)
            assert (value, target) == (F(5), 0)  # min(4+1, 7+2)

    def test_virtual_cost_ignores_occupancy(self):
        g = ufl_game([10, 3])
        value, target = deviation_cost(g, Profile([{0}, {0}]), 0, 0, virtual=True)
        assert (value, target) == (F(3), 1)
        assert virtual_cost(g, 0, 0) == 10
        assert virtual_cost(g, 0, 1) == 3

    def test_singleton_candidate_returns_its_virtual_cost(self):
        m = PartitionMatroid([[0], [1]], [1, 1])
        g = GameModel(
            players=1,
            resources=[0, 1],
            costs={0: ufl_game([6]).costs[0], 1: ufl_game([9]).costs[0]},
            spaces=[MatroidSpace(m)],
            delays={(0, 0): F(2)},
        )
        value, target = deviation_cost(g, Profile([{0, 1}]), 0, 0, virtual=True)
        assert (value, target) == (F(8), 0)


class TestEnforceabilityConditions:
    def test_crowded_cheap_option_violates_coverage(self):
        g = ufl_game([10, 3])
        report = check_enforceable_matroid(g, Profile([{0}, {0}]), virtual=False)
        assert not report.ok
        [v] = report.violations
        assert (v.kind, v.resource, v.lhs, v.rhs) == ("cover", 0, F(10), F(6))

    def test_cheap_profile_is_fine(self):
        g = ufl_game([10, 3])
        assert check_enforceable_matroid(g, Profile([{1}, {1}]), virtual=False).ok

    def test_single_player_holds_with_equality(self):
        g = ufl_game([5], players=1)
        assert check_enforceable_matroid(g, Profile([{0}]), virtual=False).ok

    def test_excess_delay_violates_delay_condition(self):
        g = ufl_game([1, 1], delays={(0, 0): F(5)}, players=1)
        report = check_enforceable_matroid(g, Profile([{0}]), virtual=False)
        assert not report.ok
        assert report.violations[0].kind == "delay"

    def test_agrees_with_share_feasibility_lp(self):
        # independent ground truth: a budget balanced stable share vector
        # exists iff an LP with equality-paid resources and per-player
        # deviation caps is feasible
        rng = random.Random(31)
        for _ in range(60):
            n = rng.randint(1, 3)
            m = rng.randint(2, 3)
            g = ufl_game(
                [rng.randint(1, 12) for _ in range(m)],
                delays={
                    (i, e): F(rng.randint(0, 4))
                    for i in range(n)
                    for e in range(m)
                    if rng.random() < 0.5
                },
                players=n,
            )
            profile = Profile([{rng.randrange(m)} for _ in range(n)])
            verdict = check_enforceable_matroid(g, profile, virtual=False).ok
            assert verdict == self._share_lp_feasible(g, profile)

    @staticmethod
    def _share_lp_feasible(game, profile):
        pairs = [(i, e) for i in range(game.n) for e in profile[i]]
        col = {p: k for k, p in enumerate(pairs)}
        rows, rhs = [], []

        def row(coefs, bound):
            r = [F(0)] * len(pairs)
            for p, a in coefs:
                r[col[p]] += a
            rows.append(r)
            rhs.append(bound)

        for e in game.resources:
            users = profile.users(e)
            if not users:
                continue
            c = game.cost(e, users)
            row([((i, e), F(1)) for i in users], c)
            row([((i, e), F(-1)) for i in users], -c)
        for i, e in pairs:
            best = min(
                game.cost(f, profile.users(f) | {i}) + game.delay(i, f)
                for f in exchange_candidates(
                    game.spaces[i].oracle, profile[i], e
                )
            )
            row([((i, e), F(1))], best - game.delay(i, e))
        sol = solve(LinearProgram.build([F(0)] * len(pairs), rows, rhs))
        if sol.status == INFEASIBLE:
            return False
        assert sol.status == OPTIMAL
        return True


class TestTransform:
    def test_crowded_facility_empties_onto_cheap_one(self):
        g = ufl_game([10, 3])
        res = transform_matroid(g, Profile([{0}, {0}]))
        assert res.profile == Profile([{1}, {1}])
        assert total_cost(g, res.profile) == 3
        assert [m.reason for m in res.moves] == ["cover", "cover"]
        # exhaustive check that 3 is the best any profile can do
        best = min(
            total_cost(g, Profile(combo))
            for combo in itertools.product([{0}, {1}], repeat=2)
        )
        assert best == 3

    def test_enforceable_input_is_returned_unchanged(self):
        g = ufl_game([10, 3])
        p = Profile([{1}, {1}])
        res = transform_matroid(g, p)
        assert res.profile == p
        assert res.moves == ()

    def test_delay_packet_move(self):
        g = ufl_game([1, 1], delays={(0, 0): F(5)}, players=1)
        res = transform_matroid(g, Profile([{0}]))
        assert res.profile == Profile([{1}])
        [move] = res.moves
        assert (move.player, move.source, move.target, move.reason) == (0, 0, 1, "delay")

    def test_random_instances_meet_the_guarantees(self):
        rng = random.Random(404)
        for _ in range(80):
            game = gen_matroid(rng)
            profile = random_bases_profile(rng, game)
            res = transform_matroid(game, profile)
            rank = max(game.spaces[i].oracle.rank for i in range(game.n))
            assert res.iterations <= game.n * len(game.resources) * rank
            assert total_cost(game, res.profile) <= total_cost(game, profile)
            assert check_enforceable_matroid(game, res.profile, virtual=True).ok
            # replay: every packet move on its own never increases the cost
            current = profile
            for move in res.moves:
                nxt = current.replace(
                    move.player, current[move.player] - {move.source} | {move.target}
                )
                assert total_cost(game, nxt) <= total_cost(game, current)
                current = nxt
            assert current == res.profile


class TestProtocolConstruction:
    def test_lone_player_pays_fully(self):
        g = ufl_game([5], players=1)
        proto = build_matroid_protocol(g, Profile([{0}]))
        assert proto.table.share(0, 0) == 5

    def test_water_filling_order(self):
        g = ufl_game([10, 3])
        proto = build_matroid_protocol(g, Profile([{1}, {1}]))
        assert proto.table.share(0, 1) == 3
        assert proto.table.share(1, 1) == 0
        assert verify_pne(g, proto).ok

    def test_tight_caps_force_even_split(self):
        g = ufl_game([4, 2])
        proto = build_matroid_protocol(g, Profile([{0}, {0}]))
        assert proto.table.share(0, 0) == 2
        assert proto.table.share(1, 0) == 2

    def test_unenforceable_profile_is_rejected(self):
        g = ufl_game([10, 3])
        with pytest.raises(NotEnforceable):
            build_matroid_protocol(g, Profile([{0}, {0}]))

    def test_protocols_verify_on_random_instances(self):
        rng = random.Random(808)
        built = 0
        for _ in range(40):
            game = gen_matroid(rng)
            res = transform_matroid(game, random_bases_profile(rng, game))
            proto = build_matroid_protocol(game, res.profile)
            assert verify_pne(game, proto).ok
            assert verify_budget_balance(game, proto, res.profile).ok
            built += 1
        assert built == 40
