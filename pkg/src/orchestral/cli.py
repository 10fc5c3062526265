"""``orchestral`` command line: parse, check, synthesize, simulate.

Exit status is 0 when the answer is positive, 1 when it is negative (or a
listing is empty) and 2 on errors or when a cap made the answer inconclusive.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import orchestrators as O
from .buffers import EMPTY, apply_action
from .compliance import check_full, check_triple_ds, cross_check_prop1, decide_pair
from .graphs import ResourceLimit
from .parser import ParseError, WellFormednessError, parse_contract, parse_orchestrator, render
from .respectfulness import is_respectful
from .synthesis import DEFAULT_ENUM_CAP, Env, enumerate_family, synth
from .system import DEFAULT_NODE_CAP, SystemConfig, is_strict, product_graph, system_step, to_dot, to_json
from .syntax import TAU

FORMAT_ENV = "ORCHESTRAL_FORMAT"


class UsageError(Exception):
    pass


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror or e}") from e


def _contract(path, args):
    return parse_contract(_read(path), check=not args.lenient)


def _orch(path, args):
    return parse_orchestrator(_read(path), check=not args.lenient)


def _emit(args, obj, text_lines):
    if args.format == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _explain_lines(verdict):
    lines = ["name        sound  client_respectful"]
    for a, flags in sorted(verdict.per_name.items()):
        lines.append(f"{a:<11} {'yes' if flags['sound'] else 'no':<6} "
                     f"{'yes' if flags['client_respectful'] else 'no'}")
    lines.append(f"non definitely server-inputted: {'yes' if verdict.server_inputted_ok else 'no'}")
    lines += [f"  {e}" for e in verdict.evidence]
    return lines


def cmd_parse(args):
    path = Path(args.file)
    kind = args.kind or ("orchestrator" if path.suffix == ".orc" else "contract")
    text = _read(path)
    if kind == "orchestrator":
        term = parse_orchestrator(text, check=not args.lenient)
        bad = O.well_formed_orch(term)
    else:
        from .contracts import well_formed
        term = parse_contract(text, check=not args.lenient)
        bad = well_formed(term)
    obj = {"kind": kind, "term": render(term), "violations": [str(v) for v in bad]}
    _emit(args, obj, [render(term)] + [f"violation: {v}" for v in bad])
    return 0


def cmd_check(args):
    client = _contract(args.client, args)
    server = _contract(args.server, args)
    if args.orch is None:
        report = decide_pair(client, server, args.mode, args.enum_cap, args.node_cap)
        orch = report.witness
    else:
        orch = _orch(args.orch, args)
        run = check_full if args.mode == "full" else check_triple_ds
        report = run(client, orch, server, args.node_cap)
    obj = report.to_json()
    lines = [f"{report.mode}: {report.verdict}"]
    if report.witness is not None:
        lines.append(f"witness: {render(report.witness)}")
    lines += [f"evidence: {e}" for e in report.evidence]
    if args.explain and orch is not None:
        v = is_respectful(orch)
        obj["explain"] = v.to_json()
        lines += ["respectfulness of the orchestrator:"] + _explain_lines(v)
    if args.prop1 and orch is not None:
        p = cross_check_prop1(client, orch, server, args.node_cap)
        obj["prop1"] = p.to_json()
        if p.applicable:
            lines.append(f"prop1: full&strict={p.left} ds&respectful={p.right} agree={p.agree}")
        else:
            lines.append("prop1: orchestrator is not strict, equivalence does not apply")
    if orch is not None and (args.dot or args.graph_json):
        g = product_graph(client, orch, server, args.node_cap)
        if args.dot:
            Path(args.dot).write_text(to_dot(g), encoding="utf-8")
        if args.graph_json:
            Path(args.graph_json).write_text(json.dumps(to_json(g), indent=2), encoding="utf-8")
    _emit(args, obj, lines)
    return report.exit_code()


def cmd_synthesize(args):
    client = _contract(args.client, args)
    server = _contract(args.server, args)
    fam = synth(Env(), client, server)
    count = fam.count()
    members = enumerate_family(fam, None, args.enum_cap)
    if args.respectful_only:
        members = [f for f in members
                   if is_respectful(f).respectful
                   and is_strict(client, f, server, node_cap=args.node_cap).strict]
    truncated = count > args.enum_cap
    shown = members[:args.max]
    obj = {"count": count, "respectful_only": args.respectful_only, "truncated": truncated,
           "members": [render(f) for f in shown]}
    head = f"{count} orchestrator{'s' if count != 1 else ''}"
    if args.respectful_only:
        head += f", {len(members)} strict and respectful"
        if truncated:
            head += f" among the first {args.enum_cap}"
    _emit(args, obj, [head] + [render(f) for f in shown])
    return 0 if shown else 1


def cmd_simulate(args):
    client = _contract(args.client, args)
    server = _contract(args.server, args)
    orch = _orch(args.orch, args)
    rng = random.Random(args.seed)
    conf = SystemConfig.of(client, orch, server)
    buf = EMPTY
    steps, status = [], "step limit"
    low = {}
    for i in range(args.steps):
        moves = system_step(conf)
        if not moves:
            break
        label, conf = moves[rng.randrange(len(moves))]
        if label is not TAU:
            buf = apply_action(buf, label)
            cs, sc = buf[label.name]
            lo = low.get(label.name, (0, 0))
            low[label.name] = (min(lo[0], cs), min(lo[1], sc))
        steps.append({"step": i + 1, "label": str(label), "buffer": buf.to_json()})
    if not system_step(conf):
        from .contracts import SUCCESS
        status = "stuck, client done" if conf.client == SUCCESS else "stuck, client not done"
    obj = {"seed": args.seed, "steps": steps, "status": status, "final": str(conf),
           "buffer": buf.to_json(),
           "minima": {a: {"cs": v[0], "sc": v[1]} for a, v in sorted(low.items())}}
    lines = [f"{s['step']:>4}  {s['label']:<20} {_buf_text(s['buffer'])}" for s in steps]
    lines.append(f"{status} after {len(steps)} step{'s' if len(steps) != 1 else ''} at {conf}")
    lines.append(f"buffer {buf}")
    negative = [a for a, v in low.items() if min(v) < 0]
    if negative:
        lines.append("negative buffer reached for " + ", ".join(sorted(negative)))
    _emit(args, obj, lines)
    return 0


def _buf_text(obj):
    from .buffers import Buffer
    return str(Buffer.from_json(obj))


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _nonnegative(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be at least 0")
    return n


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    default_format = os.environ.get(FORMAT_ENV, "text")
    if default_format not in ("text", "json"):
        default_format = "text"
    common.add_argument("--format", choices=["text", "json"], default=default_format)
    common.add_argument("--node-cap", type=_positive, default=DEFAULT_NODE_CAP)
    common.add_argument("--enum-cap", type=_positive, default=DEFAULT_ENUM_CAP)
    common.add_argument("--lenient", action="store_true",
                        help="skip well-formedness checks (terms must still parse)")

    p = argparse.ArgumentParser(prog="orchestral", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", parents=[common], help="parse and print a canonical term")
    sp.add_argument("file")
    sp.add_argument("--kind", choices=["contract", "orchestrator"])
    sp.set_defaults(run=cmd_parse)

    sp = sub.add_parser("check", parents=[common], help="decide compliance of a pair or triple")
    sp.add_argument("client")
    sp.add_argument("server")
    sp.add_argument("--orch")
    sp.add_argument("--mode", choices=["ds", "full"], default="full")
    sp.add_argument("--explain", action="store_true")
    sp.add_argument("--prop1", action="store_true")
    sp.add_argument("--dot", metavar="PATH")
    sp.add_argument("--graph-json", metavar="PATH")
    sp.set_defaults(run=cmd_check)

    sp = sub.add_parser("synthesize", parents=[common], help="list synthesised orchestrators")
    sp.add_argument("client")
    sp.add_argument("server")
    sp.add_argument("--max", type=_nonnegative, default=10)
    sp.add_argument("--respectful-only", action="store_true")
    sp.set_defaults(run=cmd_synthesize)

    sp = sub.add_parser("simulate", parents=[common], help="random walk over the orchestrated system")
    sp.add_argument("client")
    sp.add_argument("server")
    sp.add_argument("orch")
    sp.add_argument("--steps", type=_nonnegative, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(run=cmd_simulate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (ParseError, WellFormednessError, UsageError) as e:
        print(f"orchestral: {e}", file=sys.stderr)
    except ResourceLimit as e:
        print(f"orchestral: resource limit: {e}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
