#!/usr/bin/env python3
# /// script
# requires-python = ">=3.14"
# ///
"""
fn-lab CLI - finite topology workbench for FNS/FN witnesses, quotients and games

Usage:
    uv run scripts/fnlab.py gen --kind K [--n N --seed S --density D] -o space.jsonl
    uv run scripts/fnlab.py enumerate --points N -o dir/ [--cross-check]
    uv run scripts/fnlab.py verify-fns --space F --witness W
    uv run scripts/fnlab.py verify-fn --space F --witness W
    uv run scripts/fnlab.py search-fns --space F --family-role base|pi_base --kmax K
    uv run scripts/fnlab.py develop-fn --space F --covers C -o witness.jsonl
    uv run scripts/fnlab.py quotient --space F --family P [--check-wcr --kcap K]
    uv run scripts/fnlab.py play --space F --witness W --adversary KIND --horizon H -o t.jsonl
    uv run scripts/fnlab.py oracle-win --space F --witness W --horizon H --budget NODES
    uv run scripts/fnlab.py transfer --triple T --base B --witness W
    uv run scripts/fnlab.py sweep lemmas|quotient|game|witness|transfer|enumerate --max-points N
    uv run scripts/fnlab.py lint [--fix]
    uv run scripts/fnlab.py test [-k EXPR]

Exit codes:
    0 verified / ok, 1 property violated, 2 usage or input error, 3 budget exceeded

Examples:
    uv run scripts/fnlab.py gen --kind discrete --n 3 -o d3.jsonl
    uv run scripts/fnlab.py gen --kind alexandrov --n 2 --edges "0<1" -o s.jsonl
    uv run scripts/fnlab.py search-fns --space d3.jsonl --family-role base --kmax 4 -o w.jsonl
    uv run scripts/fnlab.py sweep game --max-points 3 --workers 4 -o game.jsonl
"""

import argparse
import json
import sys
from collections.abc import Callable
from pathlib import Path

# Add _lib to path
sys.path.insert(0, str(Path(__file__).parent))

from _lib import documents, game, generate, lint, quotient, sweep, test, topo, transfer, utils
from _lib.errors import BudgetExceeded, FnLabError, InputError, PropertyViolation
from _lib.witness import (
    DEFAULT_SEARCH_BUDGET,
    FnsWitness,
    developable_fn,
    search_fns,
    verify_fn,
    verify_fns,
)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    utils.report(True, f"Wrote {target}")


def _load_space(args: argparse.Namespace) -> topo.FiniteSpace:
    doc = documents.load_space(_read(args.space), auto_close=args.auto_close, strict=args.strict)
    if doc.auto_closed:
        utils.info(f"Auto-closed the generating family ({doc.auto_closed} set(s) added)")
    return doc.space


def _show_family(family: topo.SetFamily) -> str:
    return "[" + ", ".join(topo.format_set(s) for s in family) + "]"


def cmd_gen(args: argparse.Namespace) -> bool:
    """Handle gen command."""
    spec = generate.GeneratorSpec(
        kind=generate.SpaceKind(args.kind),
        n=args.n,
        edges=generate.parse_edges(args.edges),
        blocks=generate.parse_blocks(args.blocks),
        density=args.density,
        seed=args.seed,
    )
    utils.print_header(f"Generating {spec.kind} space")
    space = generate.generate(spec)
    utils.info(f"{space.point_count} point(s), {len(space.opens)} open set(s)")
    text = documents.dump_space(space, name=args.name)
    if args.output:
        _write(args.output, text)
    else:
        print(text, end="")
    return True


def cmd_enumerate(args: argparse.Namespace) -> bool:
    """Handle enumerate command - every topology on N labelled points."""
    n: int = args.points
    utils.print_header(f"Enumerating topologies on {n} point(s)")

    utils.print_step(1, 2 if args.cross_check else 1, "Enumerating preorders...")
    spaces = generate.enumerate_topologies(n)
    expected = sweep.KNOWN_TOPOLOGY_COUNTS[n]
    ok = len(spaces) == expected
    utils.report(ok, f"{len(spaces)} topologies (expected {expected})")

    if args.cross_check:
        utils.print_step(2, 2, "Cross-checking by closure filter...")
        slow = generate.count_topologies_bruteforce(n)
        ok &= slow == len(spaces)
        utils.report(slow == len(spaces), f"{slow} topologies by brute force")

    if args.output:
        out = Path(args.output)
        for k, space in enumerate(spaces):
            _write(str(out / f"top{n}_{k:03d}.jsonl"), documents.dump_space(space))

    utils.print_summary(0 if ok else 1)
    return ok


def cmd_verify_fns(args: argparse.Namespace) -> bool:
    """Handle verify-fns command."""
    space = _load_space(args)
    w = documents.load_fns(_read(args.witness), space, strict=args.strict)
    utils.print_header("Verifying FNS witness")
    utils.info(f"family: {_show_family(w.family)} (role {w.family.role})")
    utils.info(f"bound max|s(U)| = {w.bound}, total = {w.total}")
    verdict = verify_fns(w)
    if not verdict.ok and verdict.counterexample:
        i, j = verdict.counterexample
        utils.report(False, "Witness fails")
        utils.print_counterexample(
            {"U": topo.format_set(w.family.members[i]), "V": topo.format_set(w.family.members[j])}
        )
        return False
    utils.report(True, "Witness verifies")
    return True


def cmd_verify_fn(args: argparse.Namespace) -> bool:
    """Handle verify-fn command."""
    space = _load_space(args)
    w = documents.load_fn(_read(args.witness), space, strict=args.strict)
    utils.print_header("Verifying FN witness")
    utils.info(f"base: {_show_family(w.base)}")
    verdict = verify_fn(w)
    if not verdict.ok and verdict.counterexample:
        i, j = verdict.counterexample
        utils.report(False, "Witness fails")
        utils.print_counterexample(
            {"V": topo.format_set(w.base.members[i]), "W": topo.format_set(w.base.members[j])}
        )
        return False
    utils.report(True, "Witness verifies")
    return True


def cmd_search_fns(args: argparse.Namespace) -> bool:
    """Handle search-fns command - smallest FNS witness on a family."""
    space = _load_space(args)
    role = topo.Role(args.family_role)
    if args.family:
        family = documents.load_family(_read(args.family), space, strict=args.strict).value
    elif role is topo.Role.BASE:
        family = topo.topology_family(space)
    else:
        family = generate.nonempty_opens(space)
    if not topo.family_role_check(family, role):
        raise InputError(f"family is not a {role} of the space")

    utils.print_header("Searching FNS witness", f"objective={args.objective}, kmax={args.kmax}")
    utils.info(f"family: {_show_family(family)}")
    found = search_fns(family.with_role(role), args.kmax, args.objective, args.budget)
    if found is None:
        utils.report(False, f"No witness with bound <= {args.kmax}")
        return False
    bound, witness = found
    utils.report(True, f"Minimal bound: {bound}")
    if args.output:
        _write(args.output, documents.dump_fns(witness))
    return True


def cmd_develop_fn(args: argparse.Namespace) -> bool:
    """Handle develop-fn command - FN witness from a development."""
    space = _load_space(args)
    seq = documents.load_covers(_read(args.covers), space, strict=args.strict)
    utils.print_header("Building FN witness from development")
    base, witness = developable_fn(space, seq)
    utils.info(f"base: {_show_family(base)}")
    utils.report(True, "Witness verifies")
    if args.output:
        _write(args.output, documents.dump_fn(witness))
    return True


def cmd_quotient(args: argparse.Namespace) -> bool:
    """Handle quotient command."""
    space = _load_space(args)
    family = documents.load_family(_read(args.family), space, strict=args.strict).value
    utils.print_header("Quotient by family", _show_family(family))

    utils.print_step(1, 2 if args.check_wcr else 1, "Building quotient...")
    result = quotient.build_quotient(space, family)
    sep = quotient.separation_report(result.quotient)
    utils.info(f"classes: {list(result.q.image)}")
    utils.info(f"quotient opens: {[topo.format_set(o) for o in result.quotient.opens]}")
    utils.info(f"base image role: {quotient.role_of_image(result)}")
    utils.info(f"T0={sep.t0} T1={sep.t1} T2={sep.t2} regular={sep.regular}")
    utils.report(True, "q^-1(q[V]) = V and q[V∩W] = q[V]∩q[W] for every member")

    ok = True
    if args.check_wcr:
        utils.print_step(2, 2, "Checking weak complete regularity...")
        wcr = quotient.is_wcr(space, family, args.kcap, args.strict_empty)
        if wcr.holds:
            utils.report(True, "Family is weakly completely regular")
            ok = quotient.role_of_image(result) is topo.Role.BASE and sep.t2 and sep.regular
            utils.report(ok, "Quotient is T2 and regular with the image as a base")
        else:
            utils.info(
                f"Not weakly completely regular: tuple {wcr.failing_tuple}, "
                f"point {wcr.failing_point}"
            )
    if args.output:
        _write(args.output, documents.dump_space(result.quotient))
    return ok


def _sigma(args: argparse.Namespace, space: topo.FiniteSpace) -> game.SigmaStrategy:
    w = documents.load_fns(_read(args.witness), space, strict=args.strict)
    return game.SigmaStrategy(w.family, w)


def _parse_script(text: str | None) -> list[list[int]]:
    if not text:
        return []
    try:
        rounds = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"--script is not valid JSON: {e.msg}") from None
    if not isinstance(rounds, list):
        raise InputError("--script must be a list of rounds")
    return [[topo.mask_of(s) for s in answer] for answer in rounds]


def cmd_play(args: argparse.Namespace) -> bool:
    """Handle play command - one game of sigma against an adversary."""
    space = _load_space(args)
    sigma = _sigma(args, space)
    ii = game.make_adversary(args.adversary, space, sigma.base, _parse_script(args.script))
    utils.print_header(f"Playing sigma vs {args.adversary}", f"horizon={args.horizon}")

    transcript = game.play(space, sigma.base, sigma, ii, args.horizon)
    for n, r in enumerate(transcript.rounds):
        print(f"  round {n}: I {_show_family(r.c)}  II {_show_family(r.d)}")
    utils.report(
        transcript.dense,
        f"Dense after {len(transcript.rounds)} round(s)"
        if transcript.dense
        else f"Not dense within {args.horizon} round(s)",
    )
    if args.output:
        _write(args.output, documents.dump_transcript(transcript))
    return transcript.dense


def cmd_oracle_win(args: argparse.Namespace) -> bool:
    """Handle oracle-win command - sigma against every line of II's replies."""
    space = _load_space(args)
    sigma = _sigma(args, space)
    utils.print_header("Exhaustive game oracle", f"horizon={args.horizon}, budget={args.budget}")

    result = game.exhaustive_win(space, sigma.base, sigma, args.horizon, args.budget)
    utils.info(f"{result.nodes} reply node(s) explored")
    if result.wins_all:
        utils.report(True, f"Player I wins every line (longest needs {result.rounds_needed})")
    else:
        utils.report(False, "Some line of replies never becomes dense")
    if args.output and result.worst_line is not None:
        _write(args.output, documents.dump_transcript(result.worst_line))
    return result.wins_all


def cmd_transfer(args: argparse.Namespace) -> bool:
    """Handle transfer command - move an FNS witness along a co-absolute triple."""
    triple = documents.load_triple(_read(args.triple), strict=args.strict)
    base = documents.load_family(_read(args.base), triple.x, strict=args.strict).value
    s = documents.load_fns(_read(args.witness), triple.x, strict=args.strict)
    if s.family.members != base.members:
        raise InputError("witness family differs from the given base")
    utils.print_header("Transferring FNS witness")

    result = transfer.transfer_witness(triple, base, FnsWitness(base, s.images))
    utils.info(f"family on y: {_show_family(result.family_y)}")
    utils.report(True, "Transported family is a pi-base of y")
    utils.report(True, "Transferred witness verifies")
    if args.output:
        _write(args.output, documents.dump_fns(result.s_z))
    return True


def cmd_sweep(args: argparse.Namespace) -> bool:
    """Handle sweep command - acceptance suites."""
    utils.print_header(
        f"Sweep: {args.suite}", f"max_points={args.max_points}, workers={args.workers}"
    )
    report = sweep.run_suite(args.suite, args.max_points, args.workers, args.sample, args.seed)
    checks = list(report.checks)

    if args.suite == "game":
        stored = sweep.load_regression()
        regression = sweep.game_regression_check(report, stored)
        checks.append(regression)
        if args.update_regression and regression.value is not None:
            sweep.save_regression({**stored, "game_max_horizon": regression.value})
            utils.info(f"Stored game_max_horizon = {regression.value}")
        report = sweep.SuiteReport(report.suite, report.max_points, tuple(checks))

    for c in checks:
        utils.report(c.failures == 0, f"{c.check}: {c.instances} instance(s), {c.failures} failed")
        if args.verbose and c.value is not None:
            utils.info(f"{c.check} value: {c.value}")
        if args.verbose and c.example is not None:
            utils.info(f"{c.check} example: {c.example}")
        if c.failures and c.counterexample:
            utils.print_counterexample(c.counterexample)

    if args.output:
        _write(args.output, report.to_document())
    utils.print_summary(sum(1 for c in checks if c.failures))
    return report.ok


def cmd_lint(args: argparse.Namespace) -> bool:
    """Handle lint command."""
    fix: bool = args.fix
    return lint.lint_python(fix=fix)


def cmd_test(args: argparse.Namespace) -> bool:
    """Handle test command."""
    return test.test_python(keyword=args.keyword, quiet=args.quiet)


type CommandHandler = Callable[[argparse.Namespace], bool]


def _document_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--lax", dest="strict", action="store_false", help="Keep unknown document fields"
    )
    p.add_argument(
        "--auto-close",
        action="store_true",
        help="Close the space document's opens under union and intersection",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fnlab",
        description="fn-lab finite topology workbench",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Gen command
    gen_parser = subparsers.add_parser("gen", aliases=["g"], help="Generate a space")
    gen_parser.add_argument(
        "--kind", "-k", choices=[k.value for k in generate.SpaceKind], required=True
    )
    gen_parser.add_argument("--n", type=int, default=0, help="Number of points")
    gen_parser.add_argument("--seed", type=int, default=0, help="Seed for random spaces")
    gen_parser.add_argument("--density", type=float, default=0.5, help="Open density (random)")
    gen_parser.add_argument("--edges", default="", help='Order edges, e.g. "0<1,1<2"')
    gen_parser.add_argument("--blocks", default="", help='Cluster blocks, e.g. "0,1;2,3"')
    gen_parser.add_argument("--name", help="Name stored in the document")
    gen_parser.add_argument("--output", "-o", help="Output file (default: stdout)")

    # Enumerate command
    enum_parser = subparsers.add_parser(
        "enumerate", aliases=["e"], help="Enumerate all topologies on N points"
    )
    enum_parser.add_argument("--points", "-n", type=int, required=True)
    enum_parser.add_argument("--output", "-o", help="Directory for one document per topology")
    enum_parser.add_argument(
        "--cross-check", action="store_true", help="Recount with the brute-force closure filter"
    )

    # Witness commands
    for name, help_text in (
        ("verify-fns", "Verify an FNS witness"),
        ("verify-fn", "Verify an FN witness"),
    ):
        p = subparsers.add_parser(name, help=help_text)
        p.add_argument("--space", required=True)
        p.add_argument("--witness", required=True)
        _document_options(p)

    search_parser = subparsers.add_parser("search-fns", help="Search a minimal FNS witness")
    search_parser.add_argument("--space", required=True)
    search_parser.add_argument("--family", help="Family document (default: all opens)")
    search_parser.add_argument(
        "--family-role", choices=["base", "pi_base"], default="base", help="Role to check"
    )
    search_parser.add_argument("--kmax", type=int, required=True)
    search_parser.add_argument("--objective", choices=["uniform", "total"], default="uniform")
    search_parser.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET)
    search_parser.add_argument("--output", "-o", help="Write the witness here")
    _document_options(search_parser)

    develop_parser = subparsers.add_parser("develop-fn", help="FN witness from a development")
    develop_parser.add_argument("--space", required=True)
    develop_parser.add_argument("--covers", required=True)
    develop_parser.add_argument("--output", "-o")
    _document_options(develop_parser)

    # Quotient command
    quotient_parser = subparsers.add_parser("quotient", aliases=["q"], help="Quotient by a family")
    quotient_parser.add_argument("--space", required=True)
    quotient_parser.add_argument("--family", required=True)
    quotient_parser.add_argument("--check-wcr", action="store_true")
    quotient_parser.add_argument("--kcap", type=int, help="Largest tuple size to check")
    quotient_parser.add_argument(
        "--strict-empty", action="store_true", help="Empty intersections need a covering subfamily"
    )
    quotient_parser.add_argument("--output", "-o", help="Write the quotient space here")
    _document_options(quotient_parser)

    # Game commands
    play_parser = subparsers.add_parser("play", aliases=["p"], help="Play sigma vs an adversary")
    play_parser.add_argument("--space", required=True)
    play_parser.add_argument("--witness", required=True)
    play_parser.add_argument(
        "--adversary", choices=[k.value for k in game.AdversaryKind], default="first_fit"
    )
    play_parser.add_argument("--horizon", type=int, required=True)
    play_parser.add_argument("--script", help="Scripted replies as JSON, e.g. [[[0]],[[1]]]")
    play_parser.add_argument("--output", "-o")
    _document_options(play_parser)

    oracle_parser = subparsers.add_parser("oracle-win", help="Exhaustive win check for sigma")
    oracle_parser.add_argument("--space", required=True)
    oracle_parser.add_argument("--witness", required=True)
    oracle_parser.add_argument("--horizon", type=int, required=True)
    oracle_parser.add_argument("--budget", type=int, default=game.DEFAULT_NODE_BUDGET)
    oracle_parser.add_argument("--output", "-o", help="Write the worst line here")
    _document_options(oracle_parser)

    # Transfer command
    transfer_parser = subparsers.add_parser("transfer", help="Transfer an FNS witness")
    transfer_parser.add_argument("--triple", required=True)
    transfer_parser.add_argument("--base", required=True)
    transfer_parser.add_argument("--witness", required=True)
    transfer_parser.add_argument("--output", "-o")
    _document_options(transfer_parser)

    # Sweep command
    sweep_parser = subparsers.add_parser("sweep", aliases=["s"], help="Run an acceptance suite")
    sweep_parser.add_argument("suite", choices=sweep.SUITES)
    sweep_parser.add_argument("--max-points", "-n", type=int, default=3)
    sweep_parser.add_argument("--workers", "-w", type=int, default=1)
    sweep_parser.add_argument("--sample", type=int, help="Random sample of space pairs (lemmas)")
    sweep_parser.add_argument("--seed", type=int, default=0)
    sweep_parser.add_argument(
        "--update-regression", action="store_true", help="Persist the measured game horizon"
    )
    sweep_parser.add_argument("--verbose", "-v", action="store_true")
    sweep_parser.add_argument("--output", "-o", help="Write the report document here")

    # Lint command
    lint_parser = subparsers.add_parser("lint", aliases=["l"], help="Lint Python code")
    lint_parser.add_argument("--fix", "-f", action="store_true", help="Auto-fix issues")

    # Test command
    test_parser = subparsers.add_parser("test", aliases=["t"], help="Run tests")
    test_parser.add_argument("-k", dest="keyword", help="Only run tests matching EXPR")
    test_parser.add_argument("--quiet", "-q", action="store_true")

    return parser


def main() -> None:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        sys.exit(2)

    # Route to appropriate command handler
    command_map: dict[str, CommandHandler] = {
        "gen": cmd_gen,
        "g": cmd_gen,
        "enumerate": cmd_enumerate,
        "e": cmd_enumerate,
        "verify-fns": cmd_verify_fns,
        "verify-fn": cmd_verify_fn,
        "search-fns": cmd_search_fns,
        "develop-fn": cmd_develop_fn,
        "quotient": cmd_quotient,
        "q": cmd_quotient,
        "play": cmd_play,
        "p": cmd_play,
        "oracle-win": cmd_oracle_win,
        "transfer": cmd_transfer,
        "sweep": cmd_sweep,
        "s": cmd_sweep,
        "lint": cmd_lint,
        "l": cmd_lint,
        "test": cmd_test,
        "t": cmd_test,
    }

    handler = command_map.get(args.command)
    if not handler:
        print(f"ERROR: Unknown command: {args.command}")
        sys.exit(2)

    try:
        success = handler(args)
        sys.exit(0 if success else 1)
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        sys.exit(130)
    except BudgetExceeded as e:
        print(f"\nERROR: {e}")
        sys.exit(e.exit_code)
    except PropertyViolation as e:
        print(f"\n[FAIL] {e}")
        if e.counterexample:
            utils.print_counterexample(e.counterexample)
        sys.exit(e.exit_code)
    except FnLabError as e:
        print(f"\nERROR: {e}")
        sys.exit(e.exit_code)
    except Exception as e:
        print(f"\nERROR: {e}")
        import traceback

        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
