"""Command-line front end: ``lambdar <command> ... TERM``.

Exit codes: 0 on success, 1 on user errors, 2 when fuel runs out,
3 when ``diff`` finds the strategies disagreeing.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import types as ty
from .errors import FuelExhausted, LambdaRError
from .measures import cl_measure, level, show_measure
from .rewrite import fire_with_witness, r_redexes, sub_trace
from .strategies import (
    Policy,
    StepKind,
    flneed_normalize,
    mfe_list,
    name_normalize,
    skeleton,
    split_bigstep,
    st_trace,
)
from .syntax import parse, show
from .term_core import GRAMMARS, Abs, FreshSupply, Sub, Var, all_names, check_grammar
from .trace import Status, Step, Trace

EXIT_OK, EXIT_USER, EXIT_FUEL, EXIT_DISAGREE = 0, 1, 2, 3


class _Out:
    def __init__(self, stream):
        self.stream = stream

    def __call__(self, line=""):
        print(line, file=self.stream)


def _read_term(arg, stdin):
    text = stdin.read() if arg == "-" else arg
    return parse(text)


def _theta(args):
    if not args.theta:
        return []
    return [v.strip() for v in args.theta.split(",") if v.strip()]


def _emit_trace(out, trace, args, key):
    if args.format == "json":
        for line in trace.json_lines(key=key, unicode=args.unicode):
            out(line)
        out(json.dumps({"status": trace.status.value, "steps": len(trace.steps)}))
    else:
        for line in trace.text_lines(unicode=args.unicode):
            out(line)
    return EXIT_FUEL if trace.status is Status.FUEL_EXHAUSTED else EXIT_OK


def _r_explore(t, fuel, seed):
    """A random reduction path: every step fires a redex picked by the seeded RNG."""
    rng = random.Random(seed)
    supply = FreshSupply(set(all_names(t)))
    trace = Trace(t)
    cur = t
    for _ in range(fuel):
        rs = r_redexes(cur)
        if not rs:
            return trace
        r = rng.choice(rs)
        cur, w = fire_with_witness(cur, r, supply)
        trace.steps.append(Step(r.rule, r.path, cur, w))
    trace.status = Status.FUEL_EXHAUSTED if r_redexes(cur) else Status.NORMAL_FORM
    return trace


def cmd_reduce(args, t, out):
    s = args.strategy
    if s == "name":
        tr = name_normalize(t, args.fuel, Policy(args.policy))
        return _emit_trace(out, tr, args, "kind")
    if s == "flneed":
        return _emit_trace(out, flneed_normalize(t, args.fuel), args, "kind")
    if s == "sub":
        try:
            tr = sub_trace(t, FreshSupply(set(all_names(t))), args.fuel)
        except LambdaRError:
            tr = Trace(t, status=Status.FUEL_EXHAUSTED)
        return _emit_trace(out, tr, args, "rule")
    if s == "st":
        tr = st_trace(t, FreshSupply(set(all_names(t))), args.fuel)
        return _emit_trace(out, tr, args, "kind")
    return _emit_trace(out, _r_explore(t, args.fuel, args.seed), args, "rule")


def cmd_measure(args, t, out):
    if args.kind == "level":
        if not args.var:
            raise _UserError("measure level needs --var")
        out(str(level(t, args.var)))
        return EXIT_OK
    if args.kind == "cl":
        out(show_measure(cl_measure(t)))
        return EXIT_OK
    phi = ty.infer(t, args.fuel)
    if phi is None:
        out("no normal form within fuel")
        return EXIT_FUEL
    out(str(ty.measure_d(phi)))
    return EXIT_OK


def cmd_skeleton(args, t, out):
    theta = _theta(args)
    u = args.unicode
    if args.mode == "mfe":
        out(show(skeleton(t, theta), u))
        for i, m in enumerate(mfe_list(t, theta), 1):
            out(f"  ◇{i} = {show(m, u)}")
        return EXIT_OK
    if args.mode == "bigstep":
        out(show(split_bigstep(t, theta, FreshSupply()), u))
        return EXIT_OK
    if len(theta) != 1:
        raise _UserError("smallstep splitting needs exactly one --theta variable")
    y = theta[0]
    names = all_names(t) | {y}
    z = FreshSupply(names).fresh("z")
    tr = st_trace(Abs(y, Sub(Var(z), z, t)), FreshSupply(names))
    return _emit_trace(out, tr, args, "kind")


def cmd_check(args, t, out):
    if args.derivation:
        with open(args.derivation, encoding="utf-8") as fh:
            phi = ty.from_json(json.load(fh), parse)
        ok, diags = ty.check_derivation(phi)
        out("valid" if ok else "invalid")
        for d in diags:
            out(f"  {d}")
        return EXIT_OK if ok else EXIT_USER
    if t is None or not args.grammar:
        raise _UserError("check needs a grammar and a term, or --derivation FILE")
    ok = check_grammar(t, args.grammar)
    out(f"{args.grammar}: {'yes' if ok else 'no'}")
    return EXIT_OK


def cmd_infer(args, t, out):
    phi, tr, _ = ty.infer_traced(t, args.fuel)
    if phi is None:
        out(f"no derivation found: call-by-need run ended with {tr.status.value}")
        return EXIT_FUEL if tr.status is Status.FUEL_EXHAUSTED else EXIT_USER
    if args.format == "json":
        out(json.dumps({"derivation": ty.to_json(phi), "D": list(ty.measure_d(phi))},
                       ensure_ascii=False))
    else:
        for line in ty.render(phi, args.unicode):
            out(line)
        out(f"D = {ty.measure_d(phi)}")
    return EXIT_OK


def cmd_diff(args, t, out):
    name = name_normalize(t, args.fuel, Policy(args.policy))
    need = flneed_normalize(t, args.fuel)
    phi = ty.infer(t, args.fuel)
    ok_name = name.status is Status.NORMAL_FORM
    ok_need = need.status is Status.NORMAL_FORM
    report = {
        "name": {"status": name.status.value, "steps": len(name.steps), "dB": name.count(StepKind.NDB)},
        "flneed": {"status": need.status.value, "steps": len(need.steps), "dB": need.count(StepKind.FL_DB)},
        "typed": phi is not None,
        "D": list(ty.measure_d(phi)) if phi is not None else None,
    }
    agree = ok_name == ok_need == (phi is not None)
    report["agree"] = agree
    if args.format == "json":
        out(json.dumps(report))
    else:
        for k in ("name", "flneed"):
            r = report[k]
            out(f"{k:7} {r['status']:14} steps={r['steps']} dB={r['dB']}")
        out(f"typed   {report['typed']}  D={report['D']}")
        out("agree" if agree else "DISAGREE")
    if not agree:
        return EXIT_DISAGREE
    if Status.FUEL_EXHAUSTED in (name.status, need.status):
        return EXIT_FUEL
    return EXIT_OK


class _UserError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=int, default=10_000)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--policy", choices=[p.value for p in Policy], default=Policy.PREFER_DB.value)
    common.add_argument("--theta", default="", help="comma-separated variables")
    common.add_argument("--unicode", action="store_true", help="print λ instead of \\")

    p = argparse.ArgumentParser(prog="lambdar", description="Node replication calculus toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", parents=[common], help="print a reduction trace")
    r.add_argument("strategy", choices=("name", "flneed", "sub", "st", "r-explore"))
    r.add_argument("term")
    r.set_defaults(run=cmd_reduce)

    m = sub.add_parser("measure", parents=[common], help="level, cuts-level measure or D triple")
    m.add_argument("kind", choices=("level", "cl", "d"))
    m.add_argument("term")
    m.add_argument("--var")
    m.set_defaults(run=cmd_measure)

    s = sub.add_parser("skeleton", parents=[common], help="skeletons and splittings of a pure term")
    s.add_argument("mode", choices=("bigstep", "smallstep", "mfe"))
    s.add_argument("term")
    s.set_defaults(run=cmd_skeleton)

    c = sub.add_parser("check", parents=[common], help="grammar membership or derivation validity")
    c.add_argument("grammar", nargs="?", choices=GRAMMARS)
    c.add_argument("term", nargs="?")
    c.add_argument("--derivation", metavar="FILE")
    c.set_defaults(run=cmd_check)

    i = sub.add_parser("infer", parents=[common], help="type a term of U")
    i.add_argument("term")
    i.set_defaults(run=cmd_infer)

    d = sub.add_parser("diff", parents=[common], help="compare name, flneed and typability")
    d.add_argument("term")
    d.set_defaults(run=cmd_diff)
    return p


def main(argv=None, stdout=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stdin = stdin or sys.stdin
    out = _Out(stdout)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USER if e.code else EXIT_OK
    try:
        t = _read_term(args.term, stdin) if getattr(args, "term", None) else None
        return args.run(args, t, out)
    except (LambdaRError, _UserError, OSError, ValueError) as e:
        if isinstance(e, FuelExhausted):
            print(f"lambdar: {e}", file=sys.stderr)
            return EXIT_FUEL
        print(f"lambdar: {e}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
