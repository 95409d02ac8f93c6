"""Command-line front end.

Exit codes: 0 success, 2 parse/domain error, 3 unsupported fragment,
4 resource cap, 5 oracle mismatch or failed check.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from typing import Any, Sequence

from .chain import (
    ValuationChain,
    Value,
    build_sigma_chain,
    distality_report,
    parse_sigma,
    retract_check,
)
from .congruence import count_system
from .errors import (
    OracleMismatch,
    ResourceLimit,
    UnsupportedFragment,
    ValzError,
)
from .formula import DEFAULT_MAX_DNF, decide, eliminate_group_quantifier, find_witness
from .logic import GROUP, Quant, parse, to_text
from .oracle import brute_count, brute_decide
from .system import Congruence, CongruenceSystem

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_RESOURCE, EXIT_MISMATCH = 0, 2, 3, 4, 5


class InputError(ValzError):
    """Malformed command-line input (chain file, system text)."""


def load_chain(spec: str) -> ValuationChain:
    """A chain from a JSON file path or inline JSON text."""
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
        where = spec
    else:
        text, where = spec, "inline chain spec"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: line {exc.lineno}: {exc.msg}") from None
    try:
        return ValuationChain.from_json(data)
    except ValzError as exc:
        raise InputError(f"{where}: {exc}") from None


_MEMBER = re.compile(
    r"^\s*(?P<coeff>[+-]?\d*)\s*\*?\s*x\s*(?P<rel>!=|=)\s*(?P<rhs>[+-]?\d+)"
    r"\s*(?:mod\s+B\[(?P<level>[+-]?inf|\d+)\])?\s*$"
)
_SCALE = re.compile(r"^\s*l\s*=\s*(?P<l>\d+)\s*$")


def parse_system(text: str) -> CongruenceSystem:
    """``[l=INT;] COEFF x (=|!=) INT mod B[LEVEL]`` joined by ``;``.

    ``l=INT`` sets the scale for the members after it. A member without
    ``mod`` (or with level inf) is an equation.
    """
    members = []
    scale = 1
    offset = 0
    for part in text.split(";"):
        stripped = part.strip()
        at = offset + len(part) - len(part.lstrip())
        if stripped:
            sm = _SCALE.match(stripped)
            mm = _MEMBER.match(stripped)
            if sm:
                scale = int(sm.group("l"))
                if scale < 1:
                    raise InputError(f"scale must be positive at position {at}")
            elif mm:
                c = mm.group("coeff")
                coeff = int(c + "1") if c in ("", "+", "-") else int(c)
                level = mm.group("level")
                lvl = Value.parse(level) if level else Value.parse("+inf")
                if lvl.is_neg_inf:
                    raise InputError(f"level -inf is not a congruence at position {at}")
                members.append(Congruence(coeff, int(mm.group("rhs")), scale, lvl, mm.group("rel") == "!="))
            else:
                raise InputError(f"cannot parse congruence {stripped!r} at position {at}")
        offset += len(part) + 1
    return CongruenceSystem(members)


def _emit(args: argparse.Namespace, payload: dict[str, Any], text: str) -> None:
    print(json.dumps(payload, sort_keys=True) if args.json else text)


def cmd_decide(args: argparse.Namespace) -> int:
    chain = load_chain(args.chain)
    f = parse(args.formula)
    start = time.perf_counter()
    value = decide(f, chain, max_dnf=args.max_dnf)
    elapsed = time.perf_counter() - start
    payload: dict[str, Any] = {"result": value}
    lines = ["true" if value else "false"]
    if args.witness and value and isinstance(f, Quant) and f.kind == "E" and f.sort == GROUP:
        w = find_witness(f, chain, max_dnf=args.max_dnf)
        payload["witness"] = w
        lines.append(f"witness {f.var} = {w}")
    if args.oracle:
        expected = brute_decide(f, chain, value_bound=args.value_bound)
        payload["oracle"] = expected
        if expected != value:
            raise OracleMismatch(f"engine says {value}, oracle says {expected}")
        lines.append("oracle agrees")
    _emit(args, payload, "\n".join(lines))
    print(f"elapsed {elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_count(args: argparse.Namespace) -> int:
    chain = load_chain(args.chain)
    system = parse_system(args.system)
    result = count_system(system, chain)
    payload: dict[str, Any] = {
        "count": result.count,
        "modulus": result.modulus,
        "solvable": result.solvable,
    }
    lines = [str(result)]
    if args.witness:
        payload["witness"] = result.witness
        lines.append(f"witness x = {result.witness}" if result.solvable else "no witness")
    if args.oracle:
        expected = brute_count(system, chain)
        payload["oracle"] = expected
        if expected != result.count:
            raise OracleMismatch(f"engine counts {result.count}, oracle counts {expected}")
        lines.append("oracle agrees")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_qe(args: argparse.Namespace) -> int:
    chain = load_chain(args.chain)
    out = eliminate_group_quantifier(parse(args.formula), chain, max_dnf=args.max_dnf)
    text = to_text(out)
    _emit(args, {"formula": text}, text)
    return EXIT_OK


def cmd_distal(args: argparse.Namespace) -> int:
    report = distality_report(load_chain(args.chain))
    _emit(args, {"verdict": report.verdict, "bound": report.bound}, str(report))
    return EXIT_OK


def cmd_chain_info(args: argparse.Namespace) -> int:
    chain = load_chain(args.chain)
    depth = args.levels if chain.has_cycle else min(args.levels, len(chain.prefix))
    moduli = [chain.modulus(i) for i in range(depth + 1)]
    payload = {"chain": chain.to_json(), "moduli": moduli, "distality": str(distality_report(chain))}
    lines = [chain.describe()] + [f"n_{i} = {m}" for i, m in enumerate(moduli)]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_retract_check(args: argparse.Namespace) -> int:
    chain = build_sigma_chain(args.p0, args.p1, args.q, parse_sigma(args.sigma))
    report = retract_check(chain, args.range)
    payload = {"agree": report.agree, "total": report.total, "passed": report.passed}
    _emit(args, payload, str(report))
    return EXIT_OK if report.passed else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    common.add_argument("--witness", action="store_true", help="print a witness when one exists")
    common.add_argument("--max-dnf", type=int, default=DEFAULT_MAX_DNF, help="DNF clause cap")
    common.add_argument("--value-bound", type=int, default=6, help="oracle range for value variables")
    with_chain = argparse.ArgumentParser(add_help=False, parents=[common])
    with_chain.add_argument("--chain", required=True, help="chain spec: JSON file or inline JSON")

    parser = argparse.ArgumentParser(prog="valz", description="Decision procedures for (Z, +, 0, 1, v).")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("decide", parents=[with_chain], help="decide a sentence")
    p.add_argument("formula")
    p.set_defaults(func=cmd_decide)
    p = sub.add_parser("count", parents=[with_chain], help="count solutions of a congruence system")
    p.add_argument("system")
    p.set_defaults(func=cmd_count)
    p = sub.add_parser("qe", parents=[with_chain], help="eliminate group quantifiers")
    p.add_argument("formula")
    p.set_defaults(func=cmd_qe)
    p = sub.add_parser("distal", parents=[with_chain], help="distality report")
    p.set_defaults(func=cmd_distal)
    p = sub.add_parser("chain-info", parents=[with_chain], help="show chain moduli")
    p.add_argument("--levels", type=int, default=6)
    p.set_defaults(func=cmd_chain_info)
    p = sub.add_parser("retract-check", parents=[common], help="check the s-adic comparison recovered from a sigma chain")
    p.add_argument("p0", type=int)
    p.add_argument("p1", type=int)
    p.add_argument("q", type=int)
    p.add_argument("sigma", help='"id", "swap" or letters i/s (last repeats)')
    p.add_argument("range", type=int)
    p.set_defaults(func=cmd_retract_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except OracleMismatch as exc:
        print(f"error: oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except UnsupportedFragment as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ResourceLimit as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
