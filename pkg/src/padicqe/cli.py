"""Batch front end: decompose, qe, verify, eval, normalize.

Exit codes: 0 success (or equivalent), 1 counterexample / mismatch found,
2 usage or parse errors.  All randomness flows from --seed through Python's
Mersenne Twister, so identical configurations give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from .arith import Ambient, format_rational
from .cells import cell_member, cell_to_json
from .decompose import decompose_qf, intersect_cells
from .formula import eval_qf, eval_quantified, free_vars, is_qf
from .parser import ParseError, parse, parse_box, print_formula
from .qe import build_universe, equiv_check, qe
from .subaffine import box_vars, eval_box, normalize, piece_to_json, piecewise_value

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_USAGE = 2


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _parse_assignments(pairs: list[str]) -> dict[int, Fraction]:
    sigma: dict[int, Fraction] = {}
    for pair in pairs:
        name, _, value = pair.partition("=")
        name = name.strip()
        if not (name.startswith("x") and name[1:].isdigit()) or not value:
            raise ValueError(f"bad assignment {pair!r}; expected e.g. x0=5/3")
        sigma[int(name[1:])] = Fraction(value.strip())
    return sigma


def _sample_points(rng: random.Random, count: int, arity: int, universe) -> list:
    points = []
    for _ in range(count):
        point = []
        for _ in range(arity):
            if rng.random() < 0.5:
                point.append(rng.choice(universe))
            else:
                point.append(Fraction(rng.randint(-60, 60), rng.randint(1, 20)))
        points.append(tuple(point))
    return points


def cmd_decompose(args) -> int:
    ambient = Ambient(args.p)
    f = parse(_read_text(args.input))
    if not is_qf(f):
        print("error: decompose requires a quantifier-free formula", file=sys.stderr)
        return EXIT_USAGE
    last_var = args.last_var
    if last_var is None:
        last_var = max(free_vars(f), default=0)
    cells = decompose_qf(f, last_var, ambient)
    payload = {
        "formula": print_formula(f),
        "p": args.p,
        "fiber_var": last_var,
        "count": len(cells),
        "cells": [cell_to_json(c, ambient) for c in cells],
    }
    _write_output(_dump_json(payload), args.out)
    print(f"{len(cells)} cells", file=sys.stderr)
    if args.verify:
        rng = random.Random(args.seed)
        universe = build_universe(f, args.padding, ambient).elements
        for point in _sample_points(rng, args.samples, last_var + 1, universe):
            sigma = {i: v for i, v in enumerate(point)}
            want = eval_qf(f, sigma, ambient)
            hits = sum(1 for c in cells if cell_member(c, point, ambient))
            if hits != (1 if want else 0):
                print(f"mismatch at {point}: formula={want}, cells={hits}", file=sys.stderr)
                return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def cmd_qe(args) -> int:
    ambient = Ambient(args.p)
    f = parse(_read_text(args.input))
    result, trace = qe(f, ambient)
    _write_output(print_formula(result) + "\n", args.out)
    if args.trace:
        Path(args.trace).write_text(_dump_json(trace.to_json()), encoding="utf-8")
    if args.verify:
        verdict = equiv_check(f, result, args.samples, args.seed, ambient, args.padding)
        print(verdict.describe(), file=sys.stderr)
        if not verdict.equivalent:
            return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def cmd_verify(args) -> int:
    ambient = Ambient(args.p)
    f = parse(_read_text(args.left))
    g = parse(_read_text(args.right))
    verdict = equiv_check(f, g, args.samples, args.seed, ambient, args.padding)
    print(verdict.describe())
    return EXIT_OK if verdict.equivalent else EXIT_COUNTEREXAMPLE


def cmd_eval(args) -> int:
    ambient = Ambient(args.p)
    sigma = _parse_assignments(args.assign or [])
    text = _read_text(args.input) if Path(args.input).exists() else args.input
    if args.box:
        expr = parse_box(text)
        missing = box_vars(expr) - set(sigma)
        if missing:
            raise ValueError(f"unassigned variables: {sorted(missing)}")
        value = eval_box(expr, sigma, ambient)
        print(format_rational(value))
        return EXIT_OK
    f = parse(text)
    missing = free_vars(f) - set(sigma)
    if missing:
        raise ValueError(f"unassigned variables: {sorted(missing)}")
    if is_qf(f):
        result = eval_qf(f, sigma, ambient)
    else:
        universe = build_universe(f, args.padding, ambient).elements
        result = eval_quantified(f, sigma, universe, ambient)
    print("true" if result else "false")
    return EXIT_OK


def cmd_normalize(args) -> int:
    ambient = Ambient(args.p)
    expr = parse_box(_read_text(args.input))
    t_var = args.t_var
    if t_var is None:
        t_var = max(box_vars(expr), default=0)
    pieces = normalize(expr, t_var, ambient)
    payload = {
        "expr": _read_text(args.input).strip(),
        "p": args.p,
        "t_var": t_var,
        "count": len(pieces),
        "pieces": [piece_to_json(cell, nf) for cell, nf in pieces],
    }
    _write_output(_dump_json(payload), args.out)
    if args.verify:
        rng = random.Random(args.seed)
        xs = sorted(box_vars(expr) - {t_var})
        for _ in range(args.samples):
            sigma = {
                i: Fraction(rng.randint(-81, 81), rng.choice([1, 1, 3, 9, 27]))
                for i in xs
            }
            t = Fraction(rng.randint(-81, 81), rng.choice([1, 1, 3, 9, 27]))
            want = eval_box(expr, {**sigma, t_var: t}, ambient)
            got = piecewise_value(pieces, sigma, t, ambient)
            if got != want:
                print(f"mismatch at {sigma}, t={t}: {got} != {want}", file=sys.stderr)
                return EXIT_COUNTEREXAMPLE
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="padicqe",
        description="Exact cell decomposition and quantifier elimination over Q_p.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp, padding_default=2):
        sp.add_argument("--p", type=int, default=3, help="ambient prime (default 3)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=10000)
        sp.add_argument("--padding", type=int, default=padding_default)
        sp.add_argument("--jobs", type=int, default=1, help="accepted for compatibility")
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("decompose", help="decompose a QF formula into cells")
    common(sp)
    sp.add_argument("input")
    sp.add_argument("--last-var", type=int, default=None, help="fiber variable index")
    sp.add_argument("--verify", action="store_true")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("qe", help="eliminate quantifiers")
    common(sp)
    sp.add_argument("input")
    sp.add_argument("--trace", default=None, help="write stage trace JSON here")
    sp.add_argument("--verify", action="store_true")
    sp.set_defaults(func=cmd_qe)

    sp = sub.add_parser("verify", help="sampled equivalence of two formulas")
    common(sp)
    sp.add_argument("left")
    sp.add_argument("right")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("eval", help="evaluate a formula or box expression")
    common(sp)
    sp.add_argument("input", help="file path or literal text")
    sp.add_argument("--assign", action="append", help="x0=5/3 (repeatable)")
    sp.add_argument("--box", action="store_true", help="input is a box expression")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("normalize", help="normal-form pieces of a box expression")
    common(sp)
    sp.add_argument("input")
    sp.add_argument("--t-var", type=int, default=None)
    sp.add_argument("--verify", action="store_true")
    sp.set_defaults(func=cmd_normalize)

    return top


def main(argv=None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
