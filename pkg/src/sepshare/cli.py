"""Command-line front end.

Reads instance documents (game JSON, optionally bundling "profile",
named "profiles", and a "protocol"), runs transforms or verifiers, and
writes machine-readable RunReport JSON.  Reports carry exact rationals;
--approx-display adds decimal renderings for humans.  Exit codes: 0
success, 1 verification failure, 2 input error, 3 enumeration budget
exceeded.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import (
    BudgetExceeded,
    InputError,
    SepshareError,
    TooManyPaths,
)
from .game import GameModel, Profile, total_cost
from .gen import gen_matroid, gen_sp, gen_tree, gen_ufl, random_bases_profile
from .matroids import (
    build_matroid_protocol,
    check_enforceable_matroid,
    transform_matroid,
)
from .nsepa import counterexample_fixture, is_enforceable, nsepa_transform
from .oracle import (
    DEFAULT_BUDGET,
    EnumerationBudget,
    brute_force_enforceable,
    brute_force_optimum,
)
from .protocol import (
    SeparableProtocol,
    SharingTable,
    verify_budget_balance,
    verify_pne,
)
from .rationals import approx, format_rational
from .schema import (
    dumps,
    game_from_json,
    game_to_json,
    jsonable,
    loads,
    profile_from_json,
    profile_to_json,
    protocol_from_json,
    protocol_to_json,
)
from .singlesource import transform_single_source

_ZERO = Fraction(0)


@dataclass
class RunReport:
    command: str
    input_cost: Fraction = _ZERO
    output_cost: Fraction = _ZERO
    iterations: int = 0
    phases: int = 0
    enforceable: bool = False
    pne_verified: bool = False
    budget_balanced: bool = False
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json(self, approx_display: bool = False) -> dict:
        out = {
            "command": self.command,
            "input_cost": format_rational(self.input_cost),
            "output_cost": format_rational(self.output_cost),
            "iterations": self.iterations,
            "phases": self.phases,
            "enforceable": self.enforceable,
            "pne_verified": self.pne_verified,
            "budget_balanced": self.budget_balanced,
            "timings": dict(self.timings),
        }
        if approx_display:
            out["input_cost_approx"] = approx(self.input_cost)
            out["output_cost_approx"] = approx(self.output_cost)
        for k, v in self.extra.items():
            out[k] = jsonable(v)
        return out


def _read_text(path: Optional[str]) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as ex:
        raise InputError(f"cannot read {path}: {ex}") from ex


def _write_text(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_instance(args) -> tuple[GameModel, dict]:
    doc = loads(_read_text(getattr(args, "infile", None)))
    if not isinstance(doc, dict):
        raise InputError("instance document must be a JSON object")
    return game_from_json(doc), doc


def _pick_profile(doc: dict, game: GameModel, selector: Optional[str]) -> Profile:
    if selector:
        named = doc.get("profiles", {})
        if selector in named:
            return profile_from_json({"profile": named[selector]}, game)
        if selector == "embedded":
            pass  # fall through to the bundled profile
        else:
            return profile_from_json(loads(_read_text(selector)), game)
    if "profile" in doc:
        return profile_from_json({"profile": doc["profile"]}, game)
    raise InputError("no profile: bundle one in the instance or pass --profile")


def _emit_trace(path: Optional[str], lines: list[dict]) -> None:
    if path is None:
        return
    text = "".join(dumps(line, indent=None) + "\n" for line in lines)
    _write_text(path, text)


def _derive_protocol(
    game: GameModel, profile: Profile, doc: dict, args, budget: EnumerationBudget
) -> tuple[bool, Optional[SeparableProtocol]]:
    """Enforceability verdict plus a protocol witnessing it.

    An explicit protocol (document or --protocol) is used as-is; otherwise
    path games take the enforceability LP's share vector and matroid games
    the water-filling construction."""
    explicit = None
    if getattr(args, "protocol", None):
        explicit = protocol_from_json(loads(_read_text(args.protocol)), game)
    elif "protocol" in doc:
        explicit = protocol_from_json(doc["protocol"], game)
    kinds = {sp.kind for sp in game.spaces}
    if kinds <= {"path"}:
        mode = getattr(args, "mode", None) or "full_paths"
        report = is_enforceable(game, profile, mode=mode, budget=budget)
        ok = report.enforceable
        if explicit is not None:
            return ok, explicit
        if not ok:
            return False, None
        table = SharingTable(
            profile, {pair: v for pair, v in report.shares.items() if v != 0}
        )
        return True, SeparableProtocol(game, table)
    if kinds <= {"matroid"}:
        ok = check_enforceable_matroid(game, profile, virtual=False).ok
        if explicit is not None:
            return ok, explicit
        if not ok:
            return False, None
        return True, build_matroid_protocol(game, profile)
    raise InputError("mixed strategy spaces are not supported")


def _verify_booleans(
    game: GameModel, protocol: Optional[SeparableProtocol], profile: Profile
) -> tuple[bool, bool]:
    if protocol is None:
        return False, False
    bb = verify_budget_balance(game, protocol, profile).ok
    pne = verify_pne(game, protocol).ok
    return pne, bb


def _budget(args) -> EnumerationBudget:
    return EnumerationBudget(
        max_profiles=getattr(args, "max_profiles", None) or DEFAULT_BUDGET.max_profiles,
        max_paths_per_player=getattr(args, "max_paths", None)
        or DEFAULT_BUDGET.max_paths_per_player,
    )


# -- commands --------------------------------------------------------------


def _cmd_transform_matroid(args) -> tuple[RunReport, list[dict], bool]:
    game, doc = _load_instance(args)
    profile = _pick_profile(doc, game, args.profile)
    result = transform_matroid(game, profile)
    trace = []
    work = profile
    for mv in result.moves:
        nxt = work.replace(mv.player, (work[mv.player] - {mv.source}) | {mv.target})
        delta = total_cost(game, nxt) - total_cost(game, work)
        trace.append(
            {
                "step": mv.reason,
                "player": mv.player,
                "resource": mv.target,
                "from": mv.source,
                "cost_delta": format_rational(delta),
            }
        )
        work = nxt
    if work != result.profile:
        raise InputError("move replay does not reach the reported profile")
    enforceable = check_enforceable_matroid(game, result.profile, virtual=True).ok
    protocol = build_matroid_protocol(game, result.profile)
    pne, bb = _verify_booleans(game, protocol, result.profile)
    report = RunReport(
        command="transform-matroid",
        input_cost=total_cost(game, profile),
        output_cost=total_cost(game, result.profile),
        iterations=result.iterations,
        enforceable=enforceable,
        pne_verified=pne,
        budget_balanced=bb,
        extra={
            "profile": result.profile,
            "protocol": protocol_to_json(protocol),
        },
    )
    ok = enforceable and pne and bb and report.output_cost <= report.input_cost
    return report, trace, ok


def _cmd_transform_tree(args) -> tuple[RunReport, list[dict], bool]:
    game, doc = _load_instance(args)
    if args.single_source:
        sources = {sp.source for sp in game.spaces}
        if len(sources) > 1:
            raise InputError(f"multiple sources: {sorted(map(str, sources))}")
    if game.n == 0:
        empty = Profile([])
        protocol = SeparableProtocol(game, SharingTable(empty, {}))
        pne, bb = _verify_booleans(game, protocol, empty)
        report = RunReport(command="transform-tree", enforceable=pne and bb,
                           pne_verified=pne, budget_balanced=bb,
                           extra={"profile": empty,
                                  "protocol": protocol_to_json(protocol)})
        return report, [], pne and bb
    profile = _pick_profile(doc, game, args.profile)
    result = transform_single_source(game, profile)
    trace = [
        {
            "step": kind,
            "player": player,
            "resource": edge,
            "cost_delta": format_rational(delta),
        }
        for kind, edge, player, delta in result.events
    ]
    pne, bb = _verify_booleans(game, result.protocol, result.profile)
    report = RunReport(
        command="transform-tree",
        input_cost=result.input_cost,
        output_cost=result.output_cost,
        iterations=len(result.events),
        phases=len(result.replacements),
        enforceable=pne and bb,
        pne_verified=pne,
        budget_balanced=bb,
        extra={
            "profile": result.profile,
            "protocol": protocol_to_json(result.protocol),
            "repairs": result.repairs,
        },
    )
    ok = pne and bb and report.output_cost <= report.input_cost
    return report, trace, ok


def _cmd_nsepa_transform(args) -> tuple[RunReport, list[dict], bool]:
    game, doc = _load_instance(args)
    profile = _pick_profile(doc, game, args.profile)
    result = nsepa_transform(game, profile, budget=_budget(args))
    trace = [
        {
            "step": "repair",
            "player": player,
            "cost_delta": format_rational(delta),
        }
        for player, delta in result.repairs
    ] + [
        {
            "step": "substitute",
            "phase": phase,
            "player": player,
            "resource": edge,
            "cost_delta": format_rational(delta),
        }
        for phase, player, edge, delta in result.substitutions
    ]
    pne, bb = _verify_booleans(game, result.protocol, result.profile)
    report = RunReport(
        command="nsepa-transform",
        input_cost=result.input_cost,
        output_cost=result.output_cost,
        iterations=len(result.substitutions),
        phases=result.phases,
        enforceable=True,  # overwritten below by the verifier verdict
        pne_verified=pne,
        budget_balanced=bb,
        extra={
            "profile": result.profile,
            "protocol": protocol_to_json(result.protocol),
            "lp_value": result.lp_value,
            "input_enforceable": result.input_enforceable,
            "repairs": len(result.repairs),
        },
    )
    report.enforceable = is_enforceable(
        game, result.profile, mode=args.mode, budget=_budget(args)
    ).enforceable
    ok = (
        report.enforceable
        and pne
        and bb
        and report.output_cost <= report.input_cost
    )
    return report, trace, ok


def _cmd_nsepa_check(args) -> tuple[RunReport, list[dict], bool]:
    game, doc = _load_instance(args)
    profile = _pick_profile(doc, game, args.profile)
    rep = is_enforceable(game, profile, mode=args.mode, budget=_budget(args))
    cost = total_cost(game, profile)
    report = RunReport(
        command="nsepa-check",
        input_cost=cost,
        output_cost=cost,
        enforceable=rep.enforceable,
        extra={
            "lp_status": rep.status,
            "lp_value": rep.lp_value,
            "used_cost": rep.used_cost,
        },
    )
    return report, [], rep.enforceable


def _cmd_verify(args) -> tuple[RunReport, list[dict], bool]:
    game, doc = _load_instance(args)
    profile = _pick_profile(doc, game, args.profile)
    cost = total_cost(game, profile)
    enforceable, protocol = _derive_protocol(game, profile, doc, args, _budget(args))
    pne, bb = _verify_booleans(game, protocol, profile)
    report = RunReport(
        command="verify",
        input_cost=cost,
        output_cost=cost,
        enforceable=enforceable,
        pne_verified=pne,
        budget_balanced=bb,
    )
    if protocol is not None:
        report.extra["protocol"] = protocol_to_json(protocol)
    ok = enforceable and (protocol is None or (pne and bb))
    return report, [], ok


def _cmd_optimum(args) -> tuple[RunReport, list[dict], bool]:
    game, doc = _load_instance(args)
    budget = _budget(args)
    result = brute_force_optimum(game, budget=budget)
    enforceable = brute_force_enforceable(game, result.profile, budget=budget)
    report = RunReport(
        command="optimum",
        input_cost=result.cost,
        output_cost=result.cost,
        enforceable=enforceable,
        extra={"optimum_profile": result.profile, "unique": result.unique},
    )
    return report, [], enforceable


def _cmd_gen(args) -> tuple[dict, bool]:
    rng = random.Random(args.seed)
    if args.family == "ufl":
        game = gen_ufl(rng, players=args.players, facilities=args.facilities)
        profile = random_bases_profile(rng, game)
    elif args.family == "matroid":
        game = gen_matroid(rng, players=args.players, resources=args.resources)
        profile = random_bases_profile(rng, game)
    elif args.family == "tree":
        game, profile = gen_tree(rng, vertices=args.vertices, players=args.players)
    else:
        game, profile = gen_sp(rng, players=args.players, max_edges=args.max_edges)
    doc = game_to_json(game)
    doc["profile"] = profile_to_json(profile)["profile"]
    doc["seed"] = args.seed
    return doc, True


def _cmd_fixture(args) -> tuple[dict, bool]:
    game, opt = counterexample_fixture()
    doc = game_to_json(game)
    rows = profile_to_json(opt)["profile"]
    doc["profile"] = rows
    doc["profiles"] = {"opt": rows}
    return doc, True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepshare",
        description="Cost-sharing transforms and verifiers for congestion games",
    )

    def io_flags(p, profile_flag: bool = True) -> None:
        p.add_argument("--in", dest="infile", default=None,
                       help="instance JSON (default: stdin)")
        p.add_argument("--out", dest="outfile", default=None,
                       help="report JSON destination (default: stdout)")
        p.add_argument("--trace", default=None,
                       help="write per-step JSON lines to this file")
        p.add_argument("--approx-display", action="store_true",
                       help="add decimal renderings next to exact rationals")
        p.add_argument("--timings", action="store_true",
                       help="include wall-clock timings (breaks byte-stable reports)")
        if profile_flag:
            p.add_argument("--profile", default=None,
                           help="named bundled profile, 'embedded', or a JSON file")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform-matroid", help="rewrite matroid profiles until enforceable")
    io_flags(p)
    p.set_defaults(handler=_cmd_transform_matroid)

    p = sub.add_parser("transform-tree", help="single-source tree transform with sharing")
    io_flags(p)
    p.add_argument("--single-source", action="store_true",
                   help="validate that all players share one source before running")
    p.set_defaults(handler=_cmd_transform_tree)

    p = sub.add_parser("nsepa", help="series-parallel path game operations")
    nsub = p.add_subparsers(dest="nsepa_command", required=True)
    pt = nsub.add_parser("transform", help="LP-guided substitution transform")
    io_flags(pt)
    pt.add_argument("--mode", choices=("alternatives", "full_paths"),
                    default="alternatives")
    pt.add_argument("--max-paths", type=int, default=None)
    pt.set_defaults(handler=_cmd_nsepa_transform)
    pc = nsub.add_parser("check", help="LP enforceability check")
    io_flags(pc)
    pc.add_argument("--mode", choices=("alternatives", "full_paths"),
                    default="alternatives")
    pc.add_argument("--max-paths", type=int, default=None)
    pc.set_defaults(handler=_cmd_nsepa_check)

    p = sub.add_parser("verify", help="enforceability plus protocol verification")
    io_flags(p)
    p.add_argument("--protocol", default=None, help="protocol JSON file")
    p.add_argument("--mode", choices=("alternatives", "full_paths"),
                   default="full_paths",
                   help="LP row family for path games (default exhaustive)")
    p.add_argument("--max-paths", type=int, default=None)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("optimum", help="exact social optimum by enumeration")
    io_flags(p, profile_flag=False)
    p.add_argument("--max-profiles", type=int, default=None)
    p.add_argument("--max-paths", type=int, default=None)
    p.set_defaults(handler=_cmd_optimum)

    p = sub.add_parser("gen", help="seeded random instances")
    gsub = p.add_subparsers(dest="family", required=True)
    gu = gsub.add_parser("ufl", help="facility location: uniform opening costs "
                                     "1..20, connection delays 0..9")
    gu.add_argument("--players", type=int, default=3)
    gu.add_argument("--facilities", type=int, default=4)
    gm = gsub.add_parser("matroid", help="mixed matroid families, fixed or "
                                         "subadditive-table costs 1..20")
    gm.add_argument("--players", type=int, default=None)
    gm.add_argument("--resources", type=int, default=None)
    gt = gsub.add_parser("tree", help="connected graph: spanning tree plus "
                                      "random chords, costs 1..20")
    gt.add_argument("--players", type=int, default=None)
    gt.add_argument("--vertices", type=int, default=None)
    gs = gsub.add_parser("sp", help="chain of parallel bundles; player pairs "
                                    "on cut vertices; sparse delays 1..5")
    gs.add_argument("--players", type=int, default=None)
    gs.add_argument("--max-edges", type=int, default=12)
    for gp in (gu, gm, gt, gs):
        gp.add_argument("--seed", type=int, default=0)
        gp.add_argument("--out", dest="outfile", default=None)
        gp.set_defaults(handler=None, generator=True)

    p = sub.add_parser("fixture", help="pinned hard instances")
    fsub = p.add_subparsers(dest="fixture_name", required=True)
    ft = fsub.add_parser("theorem5", help="three-pair instance whose unique "
                                          "optimum is not enforceable")
    ft.add_argument("--out", dest="outfile", default=None)
    ft.set_defaults(handler=None, fixture=True)

    return parser


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        if getattr(args, "generator", False):
            doc, ok = _cmd_gen(args)
            _write_text(args.outfile, dumps(doc) + "\n")
            return 0
        if getattr(args, "fixture", False):
            doc, ok = _cmd_fixture(args)
            _write_text(args.outfile, dumps(doc) + "\n")
            return 0
        report, trace, ok = args.handler(args)
    except (BudgetExceeded, TooManyPaths) as ex:
        print(f"budget exceeded: {ex}", file=sys.stderr)
        return 3
    except InputError as ex:
        print(f"input error: {ex}", file=sys.stderr)
        return 2
    except SepshareError as ex:
        print(f"{type(ex).__name__}: {ex}", file=sys.stderr)
        return 1
    if args.timings:
        report.timings["total_ms"] = int((time.monotonic() - started) * 1000)
    _emit_trace(args.trace, trace)
    _write_text(args.outfile, dumps(report.to_json(args.approx_display)) + "\n")
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
