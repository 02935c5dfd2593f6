"""Command-line interface: ``immunize <command> ...``.

Reports are plain ``key = value`` lines. Exit status: 0 success, 1 malformed input or bad
arguments, 2 validation failure, 3 budget exhausted. Budgets default to the
``IMMUNIZATION_MAX_*`` environment variables (see :mod:`immunization.config`).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import constructions, engine, graphs, pathdecomp, protocols, solver
from .engine import ModelParams
from .errors import BudgetExhausted, ConstructionError, FormatError

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    """Well-formed input that fails a semantic check (exit 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _parsed(path: str, parse):
    try:
        return parse(_read(path))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _graph(args):
    return _parsed(args.graph, graphs.parse_graph)


def _protocol(args, g):
    proto = _parsed(args.protocol, engine.parse_protocol)
    try:
        engine.check_protocol(g, proto)
    except ValueError as exc:
        raise FormatError(f"{args.protocol}: {exc}") from None
    return proto


def _params(args) -> ModelParams:
    try:
        return ModelParams(args.r, args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _bool(x: bool) -> str:
    return "true" if x else "false"


def _report(**fields) -> None:
    for key, value in fields.items():
        if isinstance(value, bool):
            value = _bool(value)
        print(f"{key} = {value}")


def _ids(vs) -> str:
    return ",".join(map(str, sorted(vs))) or "-"


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args):
    try:
        g = graphs.generate(args.family, *args.params)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    _write(args.output, graphs.format_graph(g))
    if args.output not in (None, "-"):
        _report(family=args.family, n=g.n, m=g.m)


def cmd_simulate(args):
    g = _graph(args)
    proto = _protocol(args, g)
    trace = engine.run(g, proto)
    _report(steps=len(proto), width=engine.protocol_width(proto) if proto.steps else 0,
            clears=engine.clears(trace), red_final=_ids(trace.red(trace.length)))
    if args.trace:
        sys.stdout.write(engine.format_trace(trace))


def cmd_check(args):
    g = _graph(args)
    proto = _protocol(args, g)
    checks = {
        "clears": lambda: engine.clears(engine.run(g, proto)),
        "minimal": lambda: protocols.is_minimal(g, proto),
        "monotone": lambda: protocols.is_monotone(g, proto),
        "cautious": lambda: protocols.is_cautious(g, proto),
    }
    for prop in args.property:
        _report(**{prop: checks[prop]()})


def cmd_minimize(args):
    g = _graph(args)
    proto = _protocol(args, g)
    try:
        out = protocols.minimize(g, proto)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    removed = sum(len(a) for a in proto.steps) - sum(len(a) for a in out.steps)
    _write(args.output, engine.format_protocol(out))
    if args.output not in (None, "-"):
        _report(removed=removed, width=engine.protocol_width(out))


def cmd_solve(args):
    g = _graph(args)
    params = _params(args)
    res = solver.immunization_number(g, params, max_states=args.budget, max_subsets=args.budget,
                                     max_width=args.max_width)
    if res.number is None:
        _report(i=f"> {res.lower.width}")
    else:
        _report(i=res.number)
    _report(lower=f"i > {res.lower.width} ({res.lower.method}"
                  + (f", p = {res.lower.p})" if res.lower.p is not None else ")"))
    text = solver.format_certificate(res.lower)
    if res.upper is not None:
        _report(upper=f"i <= {res.upper.width} (protocol, {len(res.upper.protocol)} steps)")
        text += solver.format_certificate(res.upper)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)


def cmd_bound(args):
    g = _graph(args)
    params = _params(args)
    if args.kind == "upper":
        value, cert = solver.upper_bound_pathwidth(g, params, max_vertices=args.budget)
        _report(bound=f"i <= {value}", pathwidth=cert.notes["pathwidth"], method=cert.method)
    else:
        cert = solver.lower_bound(g, params, max_subsets=args.budget)
        _report(bound=f"i > {cert.width}", method=cert.method)
        if cert.p is not None:
            _report(p=cert.p)
    if not solver.check_certificate(g, cert, max_subsets=args.budget):
        raise InvalidInput("certificate failed its own check")
    if args.output:
        _write(args.output, solver.format_certificate(cert))


def cmd_pathwidth(args):
    g = _graph(args)
    pw, pd = pathdecomp.pathwidth(g, args.budget)
    _report(pathwidth=pw, bags=len(pd))
    if args.output:
        _write(args.output, pathdecomp.format_decomposition(pd))


def cmd_pd2proto(args):
    g = _graph(args)
    pd = _parsed(args.decomposition, pathdecomp.parse_decomposition)
    params = _params(args)
    report = pathdecomp.validate(g, pd)
    if not report.ok:
        raise InvalidInput(f"not a path decomposition: {report.describe()}")
    proto = protocols.protocol_from_decomposition(g, pd, params)
    _write(args.output, engine.format_protocol(proto))
    if args.output not in (None, "-"):
        _report(width=engine.protocol_width(proto), steps=len(proto),
                clears=engine.clears(engine.run(g, proto)))


def cmd_proto2pd(args):
    g = _graph(args)
    proto = _protocol(args, g)
    if not protocols.is_cautious(g, proto):
        raise InvalidInput("protocol is not cautious")
    pd = protocols.decomposition_from_cautious(g, proto)
    _write(args.output, pathdecomp.format_decomposition(pd))
    if args.output not in (None, "-"):
        _report(width=pd.width, bags=len(pd), valid=pathdecomp.validate(g, pd).ok)


def cmd_construct_tree(args):
    t = _graph(args)
    if not t.is_tree():
        raise InvalidInput("input graph is not a tree")
    sub, proto = constructions.tree_subdivision_protocol(t, method=args.method)
    _emit_construction(args, sub, proto)


def cmd_construct_grid_example(args):
    g, proto = constructions.build_subdivided_grid_example()
    _emit_construction(args, g, proto)


def _emit_construction(args, g, proto):
    trace = engine.run(g, proto)
    if args.out_graph:
        _write(args.out_graph, graphs.format_graph(g))
    if args.out_proto:
        _write(args.out_proto, engine.format_protocol(proto))
    _report(n=g.n, steps=len(proto), width=engine.protocol_width(proto),
            clears=engine.clears(trace), cautious=protocols.is_cautious(g, proto))
    if args.trace:
        sys.stdout.write(engine.format_trace(trace))


def cmd_isoperimetric(args):
    g = _graph(args)
    if not 1 <= args.k <= g.n:
        raise UsageError(f"k must lie in 1..{g.n}")
    res = graphs.min_boundary(g, args.k, budget=args.budget)
    _report(k=args.k, phi=res.value, witness=_ids(res.witness), examined=res.examined)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="immunize", description="Discrete-time (r,s)-immunization toolkit.")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker cap (accepted for compatibility; all work runs in one process)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=fn)
        return sp

    def graph_arg(sp):
        sp.add_argument("-g", "--graph", required=True, help="graph file")

    def proto_arg(sp):
        sp.add_argument("-p", "--protocol", required=True, help="protocol file")

    def rs_args(sp):
        sp.add_argument("--r", type=int, default=1, help="protective period (default 1)")
        sp.add_argument("--s", type=int, default=1, help="latency (default 1)")

    def out_arg(sp):
        sp.add_argument("-o", "--output", help="output file (default stdout)")

    def budget_arg(sp, what):
        sp.add_argument("--budget", type=int, default=None, help=f"{what} (default from environment)")

    sp = cmd("gen", cmd_gen, "generate a named graph family")
    sp.add_argument("family", choices=sorted(graphs.FAMILIES))
    sp.add_argument("params", type=int, nargs="*")
    out_arg(sp)

    sp = cmd("simulate", cmd_simulate, "run a protocol and report the outcome")
    graph_arg(sp), proto_arg(sp)
    sp.add_argument("--trace", action="store_true", help="print every time-step's color classes")

    sp = cmd("check", cmd_check, "test protocol properties")
    graph_arg(sp), proto_arg(sp)
    sp.add_argument("--property", action="append", required=True,
                    choices=["clears", "minimal", "monotone", "cautious"])

    sp = cmd("minimize", cmd_minimize, "drop unnecessary immunizations")
    graph_arg(sp), proto_arg(sp), out_arg(sp)

    sp = cmd("solve", cmd_solve, "exact immunization number with certificates")
    graph_arg(sp), rs_args(sp), out_arg(sp)
    sp.add_argument("--max-width", type=int, default=None, help="stop after this width")
    budget_arg(sp, "state and subset budget")

    sp = cmd("bound", cmd_bound, "certified lower or upper bound without a full search")
    graph_arg(sp), rs_args(sp), out_arg(sp)
    sp.add_argument("--kind", choices=["lower", "upper"], required=True)
    budget_arg(sp, "subset budget (lower) or vertex cap for pathwidth (upper)")

    sp = cmd("pathwidth", cmd_pathwidth, "exact pathwidth with a witness decomposition")
    graph_arg(sp), out_arg(sp)
    budget_arg(sp, "largest vertex count for the exact algorithm")

    sp = cmd("pd2proto", cmd_pd2proto, "protocol from a path decomposition")
    graph_arg(sp), rs_args(sp), out_arg(sp)
    sp.add_argument("-d", "--decomposition", required=True, help="decomposition file")

    sp = cmd("proto2pd", cmd_proto2pd, "path decomposition from a cautious protocol")
    graph_arg(sp), proto_arg(sp), out_arg(sp)

    for name, fn, help_text in [
        ("construct-tree", cmd_construct_tree, "subdivide a tree to immunization number 2"),
        ("construct-grid-example", cmd_construct_grid_example, "the subdivided 4x4 grid example"),
    ]:
        sp = cmd(name, fn, help_text)
        if name == "construct-tree":
            graph_arg(sp)
            sp.add_argument("--method", choices=["auto", "hatted", "direct"], default="auto")
        sp.add_argument("-o-graph", "--out-graph", dest="out_graph", help="write the graph here")
        sp.add_argument("-o-proto", "--out-proto", dest="out_proto", help="write the protocol here")
        sp.add_argument("--trace", action="store_true", help="print the color-class history")

    sp = cmd("isoperimetric", cmd_isoperimetric, "minimum vertex boundary over k-subsets")
    graph_arg(sp)
    sp.add_argument("-k", type=int, required=True)
    budget_arg(sp, "subset budget")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidInput, ConstructionError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
