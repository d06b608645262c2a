"""Separable cost sharing for congestion games.

Exact-rational tooling for deciding when a strategy profile can be made a
pure Nash equilibrium by splitting resource costs among users, and for
rewriting profiles until it can: matroid games, single-source connection
games with fixed costs, and series-parallel multi-pair path games.
"""

from .errors import (
    BudgetExceeded,
    Disconnected,
    InfeasibleProfile,
    InputError,
    InternalInvariant,
    InvalidCostOracle,
    InvalidMatroid,
    NoTightAlternative,
    NotABasis,
    NotEnforceable,
    NotInBasis,
    NotSeriesParallel,
    SepshareError,
    TooLarge,
    TooManyPaths,
    UnsupportedSpace,
)
from .game import (
    CostFunction,
    GameModel,
    MatroidSpace,
    PathSpace,
    Profile,
    private_cost,
    total_cost,
)
from .matroids import (
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
from .network import Network
from .nsepa import (
    counterexample_fixture,
    is_enforceable,
    is_n_series_parallel,
    is_two_terminal_sp,
    irredundant,
    nsepa_transform,
    player_subnetwork,
    smallest_tight_alternative,
)
from .oracle import (
    DEFAULT_BUDGET,
    EnumerationBudget,
    brute_force_enforceable,
    brute_force_optimum,
    enumerate_strategies,
)
from .protocol import (
    SeparableProtocol,
    SharingTable,
    best_response,
    verify_budget_balance,
    verify_pne,
    verify_separability_bruteforce,
)
from .rationals import Rational, format_rational, parse_rational, rat
from .singlesource import (
    approx_steiner_tree,
    reduce_group_connection,
    reduce_multi_source,
    steiner_edges,
    to_tree_profile,
    transform_single_source,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
