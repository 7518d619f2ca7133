"""Command line entry point: ``polysys <subcommand> ...``.

Exit codes: 0 success or property satisfied, 1 property violated,
2 unreadable input, 3 inputs that parse but do not fit together.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import behavior as bh
from . import finpoly as fp
from .coalg import Coalgebra, InitializedMachine, iterate, run_stream
from .laws import SUITES, run_laws
from .learners import FinLearner, compose_parallel, compose_serial
from .smoothlearn import NumericOverflow, mse, network_from_config, read_dataset, train
from .sysnet import Rewirer, apply_sys

EXIT_OK, EXIT_VIOLATED, EXIT_PARSE, EXIT_MISMATCH = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_PARSE) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", EXIT_PARSE) from exc


def _build(path: str, loader):
    data = _load_json(path)
    try:
        return loader(data)
    except fp.InterfaceMismatch as exc:
        raise CliError(f"{path}: {exc}", EXIT_MISMATCH) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: malformed content ({exc!r})", EXIT_PARSE) from exc


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_run(args) -> int:
    machine = _build(args.machine, Coalgebra.from_dict)
    try:
        inputs = [int(x) for x in args.inputs.split(",")] if args.inputs.strip() else []
    except ValueError as exc:
        raise CliError(f"--inputs: {exc}", EXIT_PARSE) from exc
    try:
        outputs = run_stream(InitializedMachine(machine, args.start), inputs)
    except (fp.InterfaceMismatch, ValueError) as exc:
        raise CliError(str(exc), EXIT_MISMATCH) from exc
    print(",".join(str(b) for b in outputs))
    return EXIT_OK


def cmd_check(args) -> int:
    machine = _build(args.machine, Coalgebra.from_dict)
    prop = _build(args.prop, lambda d: bh.Proposition.from_dict(d, machine.interface))
    if not 0 <= args.start < machine.n_states:
        raise CliError(f"--start {args.start} is not a state", EXIT_MISMATCH)
    result = bh.check_proposition(machine, args.start, prop)
    if result:
        print("satisfied")
        return EXIT_OK
    p = machine.interface
    print("violated: " + "->".join(p.label(machine.readout[s]) for s in result.path))
    return EXIT_VIOLATED


def cmd_wire(args) -> int:
    w = _build(args.spec, Rewirer.from_dict)
    paths = [x for x in args.inner.split(",") if x] if args.inner else []
    inner = [_build(path, Coalgebra.from_dict) for path in paths]
    try:
        combined = apply_sys(w, inner)
    except fp.InterfaceMismatch as exc:
        raise CliError(str(exc), EXIT_MISMATCH) from exc
    _write(json.dumps(combined.to_dict()), args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_json(args.net)
    layers = config["layers"] if isinstance(config, dict) else config
    if args.seed is None and any(
            spec.get("kind") in ("linear", "affine") and "init" not in spec for spec in layers):
        raise CliError("layers without 'init' need --seed", EXIT_PARSE)
    try:
        net = network_from_config(config, seed=args.seed or 0)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{args.net}: {exc}", EXIT_PARSE) from exc
    try:
        data = read_dataset(args.data, net.in_dim, net.out_dim)
    except OSError as exc:
        raise CliError(f"{args.data}: {exc.strerror}", EXIT_PARSE) from exc
    except ValueError as exc:
        raise CliError(f"{args.data}: {exc}", EXIT_PARSE) from exc
    try:
        net, trace = train(net, data, args.steps)
    except NumericOverflow as exc:
        if args.trace and exc.trace is not None:
            exc.trace.to_csv(args.trace)
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    if args.trace:
        trace.to_csv(args.trace)
    print(f"steps={len(trace)} mse={mse(net, data):.6g}")
    return EXIT_OK


def cmd_laws(args) -> int:
    if args.trials == 0:
        print("no trials")
        return EXIT_OK
    failures = run_laws(args.seed, args.trials, args.suite)
    if failures:
        print(f"law violated: {failures[0]}")
        return EXIT_VIOLATED
    print(f"all laws hold ({args.trials} trials per suite, seed {args.seed})")
    return EXIT_OK


def cmd_learn_compose(args) -> int:
    files = args.serial or args.parallel
    learners = [_build(path, FinLearner.from_dict) for path in files]
    op = compose_serial if args.serial else compose_parallel
    try:
        out = learners[0]
        for L in learners[1:]:
            out = op(out, L)
    except fp.InterfaceMismatch as exc:
        raise CliError(str(exc), EXIT_MISMATCH) from exc
    _write(json.dumps(out.to_dict()), args.out)
    return EXIT_OK


def cmd_tree(args) -> int:
    machine = _build(args.machine, Coalgebra.from_dict)
    if not 0 <= args.start < machine.n_states:
        raise CliError(f"--start {args.start} is not a state", EXIT_MISMATCH)
    tree = iterate(machine, args.depth)[args.start]
    p = machine.interface
    _write(bh.tree_to_dot(tree, p) if args.dot else bh.render_tree(tree, p), args.out)
    return EXIT_OK


def cmd_graph(args) -> int:
    machine = _build(args.machine, Coalgebra.from_dict)
    g = bh.behavior_graph(machine)
    if args.dot:
        _write(bh.graph_to_dot(g), args.out)
    else:
        p = machine.interface
        lines = [f"{k} {p.label(pos)} -> {list(g.arrows[k])}" for k, pos in enumerate(g.positions)]
        lines.append("classes: " + ",".join(str(k) for k in g.pi))
        _write("\n".join(lines), args.out)
    return EXIT_OK


def cmd_poly(args) -> int:
    try:
        p, q = fp.parse(args.p), fp.parse(args.q)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from exc
    try:
        if args.op == "compose":
            out = fp.compose_poly(p, q)
        elif args.op == "tensor":
            out = fp.tensor(p, q)
        else:
            out = fp.internal_hom(p, q, args.size_guard)
    except fp.HomTooLarge as exc:
        raise CliError(str(exc), EXIT_MISMATCH) from exc
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polysys", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="run a Moore machine on an input stream")
    s.add_argument("--machine", required=True)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--inputs", default="", help="comma-separated input indices")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("check", help="check a safety proposition from a start state")
    s.add_argument("--machine", required=True)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--prop", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("wire", help="combine machines through a rewirer")
    s.add_argument("--spec", required=True)
    s.add_argument("--inner", default="", help="comma-separated machine files")
    s.add_argument("--out")
    s.set_defaults(func=cmd_wire)

    s = sub.add_parser("train", help="train a serial network by gradient descent")
    s.add_argument("--net", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--steps", type=_non_negative, default=1000)
    s.add_argument("--seed", type=int)
    s.add_argument("--trace")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("laws", help="run randomized law suites")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--trials", type=_non_negative, default=100)
    s.add_argument("--suite", action="append", choices=sorted(SUITES))
    s.set_defaults(func=cmd_laws)

    s = sub.add_parser("learn-compose", help="compose finite learners")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--serial", nargs="+", metavar="FILE")
    g.add_argument("--parallel", nargs="+", metavar="FILE")
    s.add_argument("--out")
    s.set_defaults(func=cmd_learn_compose)

    s = sub.add_parser("tree", help="print the depth-truncated behavior tree of a state")
    s.add_argument("--machine", required=True)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--depth", type=_non_negative, default=3)
    s.add_argument("--dot", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("graph", help="print the behavior graph (bisimulation quotient)")
    s.add_argument("--machine", required=True)
    s.add_argument("--dot", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("poly", help="compose, tensor or internal-hom two polynomials")
    s.add_argument("op", choices=["compose", "tensor", "hom"])
    s.add_argument("p")
    s.add_argument("q")
    s.add_argument("--size-guard", type=int, default=fp.DEFAULT_SIZE_GUARD)
    s.set_defaults(func=cmd_poly)
    return parser


def _non_negative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
