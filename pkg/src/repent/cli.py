"""Command-line front door. Every command prints one JSON report on stdout.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 UNKNOWN under ``--strict``,
4 a configured cap was exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

from . import __version__
from .builders import BuildCertificate, HorizonTooShort, InvalidCertificate, build
from .characterize import (
    UNKNOWN,
    decide_effective,
    decide_general,
    decide_observable,
    decide_subset,
    decide_subset_two,
    decide_two_player,
)
from .config import CapExceeded
from .game import (
    Game,
    format_fraction,
    game_from_json,
    game_to_json,
    normalize,
    profile_to_json,
)
from .machine import StrategyMachine, entropy_report, format_entropy
from .sampler import (
    PrecisionOracle,
    RandomSource,
    knuth_yao_expected_bits,
    sample,
    shannon_entropy,
)
from .schedule import tail_schedule
from .values import SupportedProfile, mixed_minmax, pure_minmax, t_pure_minmax
from .verify import is_repeated_ne

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_UNKNOWN, EXIT_CAP = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- loading ----------------------------------------------------------------------


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_game(path: str) -> tuple[Game, bool]:
    data = _read_json(path)
    data = data.get("game", data)
    try:
        game = game_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path} is not a valid game: {exc}") from exc
    normalized = normalize(game)
    return normalized, normalized != game


def _load_machine(path: str) -> StrategyMachine:
    data = _read_json(path)
    data = data.get("machine", data)
    try:
        return StrategyMachine.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path} is not a valid machine: {exc}") from exc


def _load_certificate(path: str, game: Game) -> BuildCertificate:
    data = _read_json(path)
    data = data.get("certificate", data)
    if not data or "variant" not in data:
        raise InputError(f"{path} carries no certificate")
    try:
        return BuildCertificate.from_json(data, game)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path} is not a valid certificate: {exc}") from exc


def _digest(game: Game) -> str:
    canonical = json.dumps(game_to_json(game), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _players(text: str | None, game: Game) -> list[int]:
    """1-based comma-separated player list (as typed) to 0-based indices (as reported)."""
    if not text:
        return []
    try:
        players = sorted({int(x) - 1 for x in text.split(",")})
    except ValueError as exc:
        raise UsageError(f"bad player list {text!r}") from exc
    if any(p < 0 or p >= game.player_count for p in players):
        raise InputError(f"player list {text!r} is out of range for {game.player_count} players")
    return players


def _horizon(n: int) -> int:
    if n < 1:
        raise UsageError("--n must be at least 1")
    return n


# -- commands ---------------------------------------------------------------------


def cmd_values(args) -> tuple[dict, int]:
    game, normalized = _load_game(args.game)
    subset = _players(args.subset, game)
    players = []
    for i in game.players:
        pure = pure_minmax(game, i)
        mixed = mixed_minmax(game, i)
        entry = {
            "player": i,
            "pure": {"value": format_fraction(pure.value), "profile": profile_to_json(pure.profile)},
            "mixed": {
                "lower": format_fraction(mixed.lower),
                "value": format_fraction(mixed.value),
                "exact": mixed.exact,
                "profile": profile_to_json(mixed.profile),
            },
        }
        if subset:
            t = t_pure_minmax(game, i, frozenset(subset))
            entry["t_pure"] = {
                "subset": subset,
                "lower": format_fraction(t.lower),
                "value": format_fraction(t.value),
                "exact": t.exact,
            }
        players.append(entry)
    return {"game_digest": _digest(game), "normalized": normalized, "values": players}, EXIT_OK


def cmd_analyze(args) -> tuple[dict, int]:
    game, normalized = _load_game(args.game)
    subset = _players(args.subset, game)
    if subset:
        if args.model != "standard":
            raise UsageError("--subset only applies to the standard model")
        if game.player_count == 2 and len(subset) == 1:
            verdict = decide_subset_two(game, subset[0])
        else:
            verdict, _ = decide_subset(game, subset)
    elif args.model == "observable":
        verdict = decide_observable(game)
    elif args.model == "effective":
        verdict = decide_effective(game)
    elif game.player_count == 2:
        verdict = decide_two_player(game)
    else:
        verdict = decide_general(game)
    report = verdict.to_json()
    report.update({"game_digest": _digest(game), "normalized": normalized})
    code = EXIT_UNKNOWN if args.strict and verdict.result == UNKNOWN else EXIT_OK
    return report, code


def cmd_build(args) -> tuple[dict, int]:
    game, _ = _load_game(args.game)
    cert = _load_certificate(args.certificate, game)
    n = _horizon(args.n)
    try:
        machine = build(game, cert, n)
    except HorizonTooShort as exc:
        raise InputError(str(exc)) from exc
    except InvalidCertificate as exc:
        raise InputError(f"certificate rejected: {exc}") from exc
    data = machine.to_json()
    report = {"game_digest": _digest(game), "horizon": n, "states": len(machine.states)}
    if args.output:
        Path(args.output).write_text(json.dumps(data, indent=1) + "\n")
        report["output"] = args.output
    else:
        report["machine"] = data
    return report, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    machine = _load_machine(args.machine)
    game, _ = _load_game(args.game)
    _check_machine(machine, game)
    check = is_repeated_ne(machine, game, _horizon(args.n))
    report = {"game_digest": _digest(game), "horizon": args.n}
    report.update(check.to_json())
    return report, EXIT_OK


def cmd_entropy(args) -> tuple[dict, int]:
    machine = _load_machine(args.machine)
    game, _ = _load_game(args.game)
    _check_machine(machine, game)
    report = {"game_digest": _digest(game)}
    report["entropy"] = entropy_report(machine, game, _horizon(args.n)).to_json()
    return report, EXIT_OK


def _check_machine(machine: StrategyMachine, game: Game):
    try:
        machine.check_game(game)
    except ValueError as exc:
        raise InputError(f"machine does not fit the game: {exc}") from exc


def cmd_schedule(args) -> tuple[dict, int]:
    data = _read_json(args.support)
    if args.game:
        game, _ = _load_game(args.game)
    elif "game" in data:
        game = normalize(game_from_json(data["game"]))
    else:
        raise UsageError("pass --game or embed a 'game' object in the support file")
    sp = data.get("support", data)
    if "certificate" in data:
        sp = data["certificate"].get("support") or {}
    try:
        support = SupportedProfile.of(
            game, [tuple(s) for s in sp["profiles"]], [Fraction(w) for w in sp["weights"]]
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{args.support} is not a valid support: {exc}") from exc
    schedule = tail_schedule(game, support, _horizon(args.n))
    return {
        "game_digest": _digest(game),
        "target": [format_fraction(v) for v in support.value],
        "rounds": [list(s) for s in schedule.profiles],
    }, EXIT_OK


def _parse_dist(text: str) -> list[Fraction]:
    try:
        return [Fraction(x) for x in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad distribution {text!r}") from exc


def cmd_sample(args) -> tuple[dict, int]:
    if args.seed is None:
        if args.ci:
            raise UsageError("--ci requires --seed")
        args.seed = secrets.randbits(32)
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    dist = _parse_dist(args.dist)
    try:
        oracle = PrecisionOracle(dist)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    source = RandomSource(args.seed)
    outcomes = Counter()
    bits = Counter()
    for _ in range(args.runs):
        outcome, used = sample(oracle, source, args.algo)
        outcomes[outcome] += 1
        bits[used] += 1
    total_bits = sum(k * c for k, c in bits.items())
    report = {
        "distribution": [format_fraction(p) for p in oracle.distribution],
        "algo": args.algo,
        "seed": args.seed,
        "runs": args.runs,
        "outcomes": [outcomes[i] for i in range(len(dist))],
        "bits_histogram": {str(k): bits[k] for k in sorted(bits)},
        "expected_bits_estimate": format_entropy(total_bits / args.runs),
        "entropy": format_entropy(shannon_entropy(dist)),
    }
    if args.algo == "ky":
        report["expected_bits_exact_depth_30"] = format_entropy(float(knuth_yao_expected_bits(oracle, 30)))
    return report, EXIT_OK


# -- parser -----------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--strict", action="store_true", help="exit 3 on an UNKNOWN verdict")
    common.add_argument("--ci", action="store_true", help="require explicit seeds")
    common.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")

    parser = _Parser(prog="repent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("values", parents=[common], help="minmax family for every player")
    p.add_argument("game")
    p.add_argument("--subset", help="1-based players restricted to pure punishment, e.g. 1,3")
    p.set_defaults(func=cmd_values)

    p = sub.add_parser("analyze", parents=[common], help="CONSTANT / LINEAR / UNKNOWN verdict")
    p.add_argument("game")
    p.add_argument("--model", choices=("standard", "observable", "effective"), default="standard")
    p.add_argument("--subset", help="1-based players that must use O(1) randomness")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("build", parents=[common], help="assemble a machine from a certificate")
    p.add_argument("game")
    p.add_argument("--certificate", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    for name, func, text in (
        ("verify", cmd_verify, "exact deviation check over n rounds"),
        ("entropy", cmd_entropy, "total and effective entropy over n rounds"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("machine")
        p.add_argument("game")
        p.add_argument("--n", type=int, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("schedule", parents=[common], help="pure round schedule for a support")
    p.add_argument("--support", required=True)
    p.add_argument("--game")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("sample", parents=[common], help="sample a rational distribution")
    p.add_argument("--dist", required=True, help="comma-separated probabilities, e.g. 1/4,3/4")
    p.add_argument("--algo", choices=("inversion", "ky"), default="inversion")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=cmd_sample)
    return parser


def _error(kind: str, message: str) -> dict:
    return {"error": {"type": kind, "message": message}}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        payload, code = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        payload, code = _error("invalid_input", str(exc)), EXIT_INPUT
    except CapExceeded as exc:
        payload, code = _error("cap_exceeded", str(exc)), EXIT_CAP
    report = {"version": __version__, "command": args.command}
    report.update(payload)
    if args.timing:
        report["wall_clock_seconds"] = round(time.perf_counter() - start, 6)
    out.write(json.dumps(report, indent=1) + "\n")
    return code


def main() -> None:
    sys.exit(run())
