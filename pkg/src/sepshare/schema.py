"""JSON serialization of games, profiles, protocols, and reports.

Rationals travel as "p/q" strings, bit-exact.  Costs are a "p/q" string
for fixed costs or {"subadditive_table": {...}} keyed by comma-joined
sorted player ids.  Graph games carry a "graph" block whose edge list is
parallel to the resource list; matroid players carry descriptors.
Oracle-backed cost functions have no faithful representation and are
rejected.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from typing import Any, Mapping, Optional

from .errors import InputError
from .game import CostFunction, GameModel, MatroidSpace, PathSpace, Profile
from .matroids import MatroidOracle, matroid_from_descriptor
from .network import Network
from .protocol import SeparableProtocol, SharingTable
from .rationals import format_rational, parse_rational


def _users_key(users: frozenset) -> str:
    return ",".join(str(i) for i in sorted(users))


def _users_from_key(key: str) -> frozenset:
    if key == "":
        return frozenset()
    try:
        return frozenset(int(part) for part in key.split(","))
    except ValueError as ex:
        raise InputError(f"bad player set key {key!r}") from ex


def cost_to_json(cf: CostFunction):
    if cf.is_fixed:
        return format_rational(cf.fixed_value)
    table = cf.table
    if table is None:
        raise InputError("oracle-backed cost functions are not serializable")
    return {
        "subadditive_table": {
            _users_key(users): format_rational(v)
            for users, v in sorted(table.items(), key=lambda kv: _users_key(kv[0]))
            if users
        }
    }


def cost_from_json(data) -> CostFunction:
    if isinstance(data, str):
        return CostFunction(fixed=parse_rational(data))
    if isinstance(data, Mapping) and set(data) == {"subadditive_table"}:
        table = {
            _users_from_key(k): parse_rational(v)
            for k, v in data["subadditive_table"].items()
        }
        return CostFunction(table=table)
    raise InputError(f"unrecognized cost encoding {data!r}")


def game_to_json(game: GameModel) -> dict:
    out: dict[str, Any] = {
        "players": game.n,
        "resources": list(game.resources),
        "costs": {str(e): cost_to_json(game.costs[e]) for e in game.resources},
    }
    if game.has_delays:
        out["delays"] = [
            [format_rational(game.delay(i, e)) for e in game.resources]
            for i in range(game.n)
        ]
    spaces = []
    for sp in game.spaces:
        if sp.kind == "path":
            spaces.append({"path": {"source": sp.source, "terminal": sp.terminal}})
        else:
            oracle: MatroidOracle = sp.oracle
            if not hasattr(oracle, "descriptor"):
                raise InputError("matroid oracle has no serializable descriptor")
            spaces.append({"matroid": oracle.descriptor})
    out["spaces"] = spaces
    if game.network is not None:
        net = game.network
        edges = []
        for e in game.resources:
            u, v = net.endpoints[e]
            edges.append([u, v, format_rational(game.costs[e].fixed_value)
                          if game.costs[e].is_fixed else cost_to_json(game.costs[e])])
        out["graph"] = {"directed": net.directed, "edges": edges}
    return out


def game_from_json(data: Mapping) -> GameModel:
    try:
        players = int(data["players"])
        resources = [int(e) for e in data["resources"]]
        raw_costs = data["costs"]
        raw_spaces = data["spaces"]
    except (KeyError, TypeError, ValueError) as ex:
        raise InputError(f"malformed game object: {ex}") from ex
    costs = {}
    for e in resources:
        key = str(e)
        if key not in raw_costs:
            raise InputError(f"no cost for resource {e}")
        costs[e] = cost_from_json(raw_costs[key])
    delays = None
    if "delays" in data and data["delays"] is not None:
        rows = data["delays"]
        if len(rows) != players:
            raise InputError("delays must have one row per player")
        delays = {}
        for i, row in enumerate(rows):
            if len(row) != len(resources):
                raise InputError(f"delay row {i} has wrong length")
            for e, cell in zip(resources, row):
                value = parse_rational(cell)
                if value != 0:
                    delays[(i, e)] = value
    network: Optional[Network] = None
    if "graph" in data and data["graph"] is not None:
        g = data["graph"]
        edges = g.get("edges", [])
        if len(edges) != len(resources):
            raise InputError("graph edge list must be parallel to resources")
        triples = []
        for e, spec in zip(resources, edges):
            if len(spec) != 3:
                raise InputError(f"graph edge for resource {e} must be [u, v, cost]")
            u, v, cost_spec = spec
            declared = cost_from_json(cost_spec)
            same = declared.is_fixed == costs[e].is_fixed and (
                declared.fixed_value == costs[e].fixed_value
                if declared.is_fixed
                else declared.table == costs[e].table
            )
            if not same:
                raise InputError(f"graph cost for resource {e} contradicts 'costs'")
            triples.append((e, u, v))
        network = Network(triples, directed=bool(g.get("directed", False)))
    spaces = []
    if len(raw_spaces) != players:
        raise InputError("one space per player required")
    for i, sp in enumerate(raw_spaces):
        if not isinstance(sp, Mapping) or len(sp) != 1:
            raise InputError(f"space {i} must be a single-key object")
        kind, body = next(iter(sp.items()))
        if kind == "path":
            spaces.append(PathSpace(source=body["source"], terminal=body["terminal"]))
        elif kind == "matroid":
            spaces.append(MatroidSpace(oracle=matroid_from_descriptor(body)))
        else:
            raise InputError(f"unknown space kind {kind!r}")
    return GameModel(
        players=players,
        resources=resources,
        costs=costs,
        spaces=spaces,
        delays=delays,
        network=network,
    )


def profile_to_json(profile: Profile) -> dict:
    return {"profile": [sorted(choice) for choice in profile]}


def profile_from_json(data, game: Optional[GameModel] = None) -> Profile:
    if isinstance(data, Mapping) and "profile" in data:
        rows = data["profile"]
    else:
        rows = data
    if not isinstance(rows, list):
        raise InputError("profile must be a list of per-player resource lists")
    profile = Profile([frozenset(int(e) for e in row) for row in rows])
    if game is not None:
        game.validate_profile(profile)
    return profile


def protocol_to_json(protocol: SeparableProtocol) -> dict:
    table = protocol.table
    shares = [
        {"player": i, "resource": e, "share": format_rational(v)}
        for (i, e), v in sorted(table.shares.items())
    ]
    return {"base": [sorted(choice) for choice in table.base], "shares": shares}


def protocol_from_json(data: Mapping, game: GameModel) -> SeparableProtocol:
    base = profile_from_json({"profile": data["base"]}, game)
    shares = {}
    for row in data.get("shares", []):
        shares[(int(row["player"]), int(row["resource"]))] = parse_rational(
            row["share"]
        )
    return SeparableProtocol(game, SharingTable(base, shares))


def jsonable(obj):
    """Recursive encoder for reports: rationals to "p/q", sets sorted,
    dataclasses to plain objects."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, float):
        raise InputError("floats are banned from reports")
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(x) for x in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, Profile):
        return profile_to_json(obj)["profile"]
    raise InputError(f"cannot encode {type(obj).__name__} in a report")


def dumps(obj, indent: Optional[int] = 2) -> str:
    return json.dumps(obj, indent=indent, sort_keys=True)


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as ex:
        raise InputError(f"malformed JSON at line {ex.lineno} column {ex.colno}: {ex.msg}") from ex
