"""Command-line front end: ``vqpl {check,run,explore,denote,compare} FILE``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import denot
from .ast import Config
from .errors import ParseError, TypeCheckError, VQPLError
from .evaluator import DEFAULT_NODE_BUDGET, explore, make_rng, run_path, StepCache
from .loader import check_source, config_from_fixture, resolve_path
from .parser import parse_program
from .printer import show_config, show_term, show_type
from .qstate import DEFAULT_MAX_QUBITS

EXIT_OK, EXIT_DIAG, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _show(v):
    return show_config(v) if isinstance(v, Config) else show_term(v)


def _color(text, code, stream):
    if os.environ.get("NO_COLOR") is not None or not stream.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


# ---------------------------------------------------------------- diagnostics

def _diag(kind, message, span=None, name=None):
    d = {"severity": "error", "kind": kind, "message": message,
         "span": None if span is None else [span.start, span.end]}
    if name is not None:
        d["declaration"] = name
    return d


def _diags_of(exc, name=None):
    if isinstance(exc, ParseError):
        out = []
        for d in exc.diagnostics:
            j = d.to_json()
            j["kind"] = "ParseError"
            out.append(j)
        return out
    if isinstance(exc, TypeCheckError):
        return [_diag(exc.kind.value, exc.message, exc.span, name)]
    return [_diag(type(exc).__name__, str(exc), None, name)]


def _report_diags(diags, as_json, extra=None):
    if as_json:
        body = {"ok": False, "diagnostics": diags}
        body.update(extra or {})
        _emit_json(body)
    else:
        for d in diags:
            where = f" [{d['declaration']}]" if d.get("declaration") else ""
            span = f" at bytes {d['span'][0]}-{d['span'][1]}" if d.get("span") else ""
            head = _color("error", "31", sys.stdout)
            print(f"{head}: {d['kind']}{where}{span}: {d['message']}")
    return EXIT_DIAG


def _emit_json(obj):
    # key order is fixed by construction, so output is byte-stable
    print(json.dumps(obj, separators=(",", ":")))


# ---------------------------------------------------------------- loading

def _load(args):
    """Parse and check the file; return ``(program, target)`` where target is
    the elaborated entry term or the fixture configuration."""
    text = resolve_path(args.file)
    prog = check_source(parse_program(text))
    if args.fixture:
        with open(args.fixture, encoding="utf-8") as fh:
            data = json.load(fh)
        return prog, config_from_fixture(data, prog)
    return prog, prog[args.entry].term


# ---------------------------------------------------------------- commands

def cmd_check(args):
    text = resolve_path(args.file)
    prog = check_source(parse_program(text))
    decls = [{"name": c.name, "type": show_type(c.ty)} for c in prog.checked.values()]
    diags = [d for name, e in prog.errors.items() for d in _diags_of(e, name)]
    if diags:
        return _report_diags(diags, args.json, {"declarations": decls})
    if args.json:
        _emit_json({"ok": True, "declarations": decls, "diagnostics": []})
        return EXIT_OK
    shown = decls if args.all or args.entry not in prog.checked else [
        d for d in decls if d["name"] == args.entry]
    for d in shown:
        print(f"{d['name']} : {d['type']}")
    return EXIT_OK


def cmd_run(args):
    _, t = _load(args)
    cache = StepCache(args.max_qubits)
    rng = make_rng(args.seed)
    results = []
    for _ in range(args.samples):
        v, n = run_path(t, rng, args.max_steps, cache)
        results.append({"value": _show(v), "steps": n})
    if args.json:
        _emit_json({"seed": args.seed, "samples": results})
    else:
        for r in results:
            print(r["value"])
    return EXIT_OK


def cmd_explore(args):
    _, t = _load(args)
    rep = explore(t, args.max_steps, args.node_budget, args.max_qubits, args.threads)
    outcomes = rep.dist.outcomes(_show)
    if args.json:
        _emit_json({"outcomes": outcomes, "residual": rep.residual, "steps": args.max_steps})
    else:
        for o in outcomes:
            print(f"{o['prob']:.12g}\t{o['value']}")
        print(f"residual\t{rep.residual:.12g}")
    return EXIT_OK


def _state_json(s):
    return {"type": show_type(s.ty), "blocks": s.to_json()["blocks"]}


def cmd_denote(args):
    _, t = _load(args)
    if isinstance(t, Config):
        s, k = denot.interp_config(t, args.fuel)
        body = {"kind": "state", "aux_qubits": k, **_state_json(s)}
        if args.json:
            _emit_json(body)
        else:
            print(f"state on [[{body['type']}]] (x) qbit^{k}")
            for i, b in enumerate(s.blocks):
                print(f"block {i}:")
                for row in b:
                    print("  " + "  ".join(f"{complex(z):.6g}" for z in row))
        return EXIT_OK
    d = denot.cdenote(t, args.fuel)
    if args.json:
        _emit_json({"kind": "subdist", "outcomes": d.outcomes(_show), "total": d.total()})
    else:
        for o in d.outcomes(_show):
            print(f"{o['prob']:.12g}\t{o['value']}")
        print(f"total\t{d.total():.12g}")
    return EXIT_OK


def cmd_compare(args):
    _, t = _load(args)
    rep = denot.adequacy_check(t, args.max_steps, args.tol, args.fuel)
    if args.json:
        _emit_json(rep.to_json(_show))
    else:
        verdict = _color("pass", "32", sys.stdout) if rep.passed else _color("fail", "31", sys.stdout)
        print(f"{verdict}: tv {rep.tv:.3g}, residual {rep.residual:.3g}, "
              f"soundness defect {rep.soundness_defect:.3g}, tol {rep.tol:.3g}")
    return EXIT_OK if rep.passed else EXIT_DIAG


COMMANDS = {
    "check": cmd_check, "run": cmd_run, "explore": cmd_explore,
    "denote": cmd_denote, "compare": cmd_compare,
}


# ---------------------------------------------------------------- argument parsing

def build_parser():
    p = _Parser(prog="vqpl", description="Type-check, run and interpret VQPL programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, steps_default):
        sp.add_argument("file", help="program file (.vqpl)")
        sp.add_argument("--entry", default="main", help="declaration to use (default: main)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--fixture", help="JSON configuration fixture to use instead of the entry")
        sp.add_argument("--max-steps", type=int, default=steps_default,
                        help=f"reduction step bound (default: {steps_default})")
        sp.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS,
                        help=f"qubit capacity (default: {DEFAULT_MAX_QUBITS})")
        sp.add_argument("--seed", type=int, default=0, help="PRNG seed (default: 0)")
        sp.add_argument("--threads", type=int, default=1, help="explore worker threads (default: 1)")
        sp.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET,
                        help=f"explore node budget (default: {DEFAULT_NODE_BUDGET})")
        sp.add_argument("--tol", type=float, default=1e-9, help="comparison tolerance (default: 1e-9)")
        sp.add_argument("--fuel", type=int, default=denot.DEFAULT_FUEL,
                        help=f"beta-reduction budget of the denotation (default: {denot.DEFAULT_FUEL})")
        return sp

    c = sub.add_parser("check", help="type-check every declaration")
    c.add_argument("file")
    c.add_argument("--entry", default="main")
    c.add_argument("--json", action="store_true")
    c.add_argument("--all", action="store_true", help="list every declaration")
    common(sub.add_parser("run", help="sample one reduction path"), 10_000).add_argument(
        "--samples", type=int, default=1, help="number of samples (default: 1)")
    common(sub.add_parser("explore", help="exact distribution up to a step bound"), 100)
    common(sub.add_parser("denote", help="denotational interpretation"), 100)
    common(sub.add_parser("compare", help="denotation versus exploration"), 200)
    return p


def _validate(args):
    checks = [
        ("max_steps", lambda v: v >= 0, "must be non-negative"),
        ("max_qubits", lambda v: 0 < v <= 30, "must be between 1 and 30"),
        ("threads", lambda v: v >= 1, "must be at least 1"),
        ("node_budget", lambda v: v >= 1, "must be at least 1"),
        ("tol", lambda v: v >= 0 and v == v, "must be a non-negative number"),
        ("fuel", lambda v: v >= 0, "must be non-negative"),
        ("samples", lambda v: v >= 1, "must be at least 1"),
    ]
    for name, ok, msg in checks:
        if hasattr(args, name) and not ok(getattr(args, name)):
            raise _UsageError(f"--{name.replace('_', '-')} {msg}")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    as_json = getattr(args, "json", False)
    try:
        return COMMANDS[args.command](args)
    except (VQPLError, KeyError) as e:
        if isinstance(e, KeyError):
            e = VQPLError(f"no declaration named {e.args[0]}")
        return _report_diags(_diags_of(e), as_json)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        return _report_diags([_diag("InputError", str(e))], as_json)
    except (ValueError, TypeError, RecursionError) as e:
        return _report_diags([_diag("InvalidInput", str(e) or type(e).__name__)], as_json)


if __name__ == "__main__":
    sys.exit(main())
