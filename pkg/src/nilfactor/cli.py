"""nilfactor command line.

Exit codes: 0 success, 2 bad spec, 3 invariant violation, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .config import ConfigError
from .equidist import ProgressionSet, brute_force_defect, default_family, direct_defect, total_verdict
from .factor import FactorisationError, InvariantViolation, build_tree, factorise_once, tree_partition_ok
from .io import (RunSpec, RunSpecError, dump_json, factorisation_to_json, parse_runspec, tree_to_json,
                 verify_tree)
from .nilgroup import GroupError

EXIT_OK, EXIT_SPEC, EXIT_INVARIANT, EXIT_VERIFY = 0, 2, 3, 4

# brute-force oracle and direct path must agree to this absolute tolerance
ORACLE_TOLERANCE = 1e-9


def _progressions(spec: RunSpec, delta: float, certified: bool) -> ProgressionSet:
    cfg = spec.constants()
    sampled = 0 if (certified or spec.mode == "certified") else (spec.samples or 1000)
    return ProgressionSet.total(spec.N, delta, cfg.q_max, cfg.window_grid, sampled=sampled, seed=spec.seed)


def cmd_equidist(spec: RunSpec, certified: bool):
    g = spec.sequence()
    cfg = spec.constants()
    ok, rep = total_verdict(g, spec.N, spec.delta, cfg, progressions=_progressions(spec, spec.delta, certified))
    out = {"command": "equidist", "passed": ok, "report": rep.to_json(), "config": cfg.to_json(),
           "spec": spec.to_json()}
    return (EXIT_OK if ok else EXIT_VERIFY), out


def cmd_oracle(spec: RunSpec, certified: bool):
    g = spec.sequence()
    cfg = spec.constants()
    fam = default_family(g.group, cfg)
    progs = _progressions(spec, spec.delta, True)
    slow = brute_force_defect(g, spec.N, fam, progs)
    fast = direct_defect(g, spec.N, fam, progs).defect
    agree = abs(slow - fast) <= ORACLE_TOLERANCE
    out = {"command": "oracle", "defect": slow, "direct_defect": fast, "tolerance": ORACLE_TOLERANCE,
           "agree": agree, "progressions": progs.to_json(), "config": cfg.to_json(), "spec": spec.to_json()}
    print(f"oracle: brute force {slow:.12g}, direct {fast:.12g}, |diff| {abs(slow - fast):.3g} "
          f"({'agree' if agree else 'DISAGREE'} at {ORACLE_TOLERANCE:g})", file=sys.stderr)
    return (EXIT_OK if agree else EXIT_VERIFY), out


def cmd_factorise(spec: RunSpec, certified: bool):
    g = spec.sequence()
    cfg = spec.constants()
    f = factorise_once(g, spec.N, cfg.A, cfg, M0=spec.Q0)
    out = {"command": "factorise", "factorisation": factorisation_to_json(f), "config": cfg.to_json(),
           "spec": spec.to_json()}
    return EXIT_OK, out


def cmd_tree(spec: RunSpec, certified: bool):
    g = spec.sequence()
    cfg = spec.constants()
    tree = build_tree(g, spec.tree_params(), cfg)
    out = tree_to_json(tree, spec)
    ok = tree.passed and tree_partition_ok(tree)
    return (EXIT_OK if ok else EXIT_VERIFY), out


COMMANDS = {"equidist": cmd_equidist, "oracle": cmd_oracle, "factorise": cmd_factorise, "tree": cmd_tree}


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(obj, out: Optional[str]) -> None:
    text = dump_json(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilfactor", description="Factorisation of polynomial nilsequences.")
    p.add_argument("command", choices=["equidist", "factorise", "tree", "verify", "oracle"])
    p.add_argument("--spec", help="run spec (JSON)")
    p.add_argument("--tree", help="tree file to check (verify)")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--certified", action="store_true", help="force certified enumeration")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            path = args.tree or args.spec
            if not path:
                print("verify needs --tree", file=sys.stderr)
                return EXIT_SPEC
            try:
                data = json.loads(_read(path))
            except (OSError, json.JSONDecodeError) as exc:
                print(f"cannot read tree file: {exc}", file=sys.stderr)
                return EXIT_SPEC
            ok, out = verify_tree(data)
            _emit(out, args.out)
            return EXIT_OK if ok else EXIT_VERIFY
        if not args.spec:
            print(f"{args.command} needs --spec", file=sys.stderr)
            return EXIT_SPEC
        try:
            spec = parse_runspec(_read(args.spec))
        except OSError as exc:
            print(f"cannot read spec: {exc}", file=sys.stderr)
            return EXIT_SPEC
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                print("seed must be an unsigned 64-bit integer", file=sys.stderr)
                return EXIT_SPEC
            spec = replace(spec, seed=args.seed)
        code, out = COMMANDS[args.command](spec, args.certified)
        _emit(out, args.out)
        return code
    except RunSpecError as exc:
        for e in exc.errors:
            print(f"spec error: {e}", file=sys.stderr)
        return EXIT_SPEC
    except (ConfigError, GroupError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except FactorisationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
