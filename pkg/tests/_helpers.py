"""Shared instance builders for the test suite."""

from fractions import Fraction

from sepshare.game import CostFunction, GameModel, MatroidSpace, PathSpace
from sepshare.matroids import UniformMatroid
from sepshare.network import Network


def path_game(edges, pairs, delays=None, directed=False):
    """Game over `edges` = [(u, v, cost)], `pairs` = [(source, terminal)]."""
    net = Network(
        [(k, u, v) for k, (u, v, _c) in enumerate(edges)], directed=directed
    )
    costs = {
        k: CostFunction(fixed=Fraction(c)) for k, (_u, _v, c) in enumerate(edges)
    }
    spaces = [PathSpace(source=s, terminal=t) for s, t in pairs]
    return GameModel(
        players=len(pairs),
        resources=list(range(len(edges))),
        costs=costs,
        spaces=spaces,
        delays=delays or {},
        network=net,
    )


def ufl_game(costs, delays=None, players=2):
    """Facility location: rank-1 players over facilities with the given costs."""
    ids = list(range(len(costs)))
    cf = {e: CostFunction(fixed=Fraction(c)) for e, c in enumerate(costs)}
    spaces = [MatroidSpace(UniformMatroid(ids, 1)) for _ in range(players)]
    return GameModel(
        players=players, resources=ids, costs=cf, spaces=spaces, delays=delays or {}
    )
