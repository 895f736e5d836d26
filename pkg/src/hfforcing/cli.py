"""Command-line front end.

Exit status: 0 on success, 1 when a verification suite fails, 2 on malformed
input, 3 when a dense set is not met within the search bound.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .forces import MUTANTS, forces_holds, forces_transform
from .formula import (
    FormulaSyntaxError,
    RenameError,
    Satisfier,
    SatsError,
    arity,
    parse,
    rename,
    to_sexpr,
)
from .harness import (
    SHIPPED_CONTEXTS,
    SUITES,
    EventuallyPeriodic,
    Report,
    avoid_dense,
    context_from_spec,
    length_dense,
    make_battery,
    reports_to_json,
    run_suites,
    check_definition_of_forcing,
)
from .hfset import HfSyntaxError, format_hf, make_set, parse_hf, parse_hf_list, vset
from .names import ContextError, closure_diagnostics
from .posets import (
    DensityBoundExceeded,
    PosetError,
    cohen_poset,
    hf_to_seq,
    is_filter,
    rsl_filter,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BOUND = 0, 1, 2, 3


class InputError(Exception):
    pass


_INPUT_ERRORS = (InputError, HfSyntaxError, FormulaSyntaxError, RenameError, SatsError,
                 PosetError, ContextError, ValueError, KeyError, json.JSONDecodeError)


# -- argument helpers ---------------------------------------------------------------

def _load_spec(text: str):
    """A shipped context name, a path to a JSON spec file, or inline JSON."""
    if text in SHIPPED_CONTEXTS:
        return text
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    if text.lstrip().startswith("{") and ":" in text and '"' in text:
        return json.loads(text)
    raise InputError(f"unknown context {text!r}: expected one of {sorted(SHIPPED_CONTEXTS)}, "
                     "a JSON spec file, or inline JSON")


def _context(text: str):
    return context_from_spec(_load_spec(text))


def _model(text: str) -> tuple:
    """Carrier for ``sats``: ``vset:n``, an HF literal, or a context spec."""
    if text.startswith("vset:"):
        return vset(int(text.split(":", 1)[1])).children
    if text in SHIPPED_CONTEXTS or os.path.exists(text) or text.lstrip().startswith('{"'):
        return _context(text).M
    return parse_hf(text).children


def _rename_map(text: str) -> dict:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            a, b = part.split(":")
            out[int(a)] = int(b)
        except ValueError:
            raise InputError(f"bad renaming entry {part!r}; expected SRC:DST") from None
    return out


def _battery_args(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"bad battery option {item!r}; expected key=value")
        key = key.strip()
        if key in ("depth", "arity", "name_rank", "variants"):
            out[key] = int(value)
        elif key == "curated":
            out[key] = value.lower() in ("1", "true", "yes")
        elif key == "exhaustive":
            tiers = []
            for t in value.split(";"):
                if t.strip():
                    d, a = t.split("/")
                    tiers.append((int(d), int(a)))
            out[key] = tuple(tiers)
        else:
            raise InputError(f"unknown battery option {key!r}")
    return out


def _denses(spec: str) -> list:
    """``len:N`` adds ``len >= 1 .. len >= N``; ``avoid:PREFIX(PERIOD)`` adds the
    conditions disagreeing with that stream.  Items are comma separated."""
    out = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        kind, _, arg = item.partition(":")
        if kind == "len":
            out += [length_dense(n) for n in range(1, int(arg) + 1)]
        elif kind == "avoid":
            out.append(avoid_dense(EventuallyPeriodic.parse(arg)))
        else:
            raise InputError(f"unknown dense set {item!r}; expected len:N or avoid:PREFIX(PERIOD)")
    return out


def _filter_text(G) -> str:
    return "{" + ",".join(format_hf(p) for p in sorted(G)) + "}"


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


# -- subcommands -----------------------------------------------------------------------

def cmd_formula(args) -> int:
    phi = parse(args.formula)
    if args.action == "parse":
        print(repr(phi))
    elif args.action == "print":
        print(to_sexpr(phi))
    elif args.action == "arity":
        print(arity(phi))
    elif args.action == "rename":
        if args.map is None:
            raise InputError("formula rename needs a map such as 0:2,1:3")
        print(to_sexpr(rename(phi, _rename_map(args.map))))
    return EXIT_OK


def cmd_model(args) -> int:
    ctx = _context(args.spec)
    diag = closure_diagnostics(ctx)
    diag["context"] = ctx.name
    diag["poset"] = ctx.poset.to_json()
    diag["generic_filters"] = [_filter_text(G) for G in ctx.generic_filters()]
    _print_json(diag)
    return EXIT_OK


def cmd_sats(args) -> int:
    M = _model(args.model)
    env = parse_hf_list(args.env)
    phi = parse(args.formula)
    print("true" if Satisfier(M)(env, phi) else "false")
    return EXIT_OK


def cmd_forces(args) -> int:
    if args.action == "transform":
        print(to_sexpr(forces_transform(parse(args.args[0]))))
        return EXIT_OK
    if len(args.args) != 4:
        raise InputError("usage: forces eval <ctx> <p> <formula> <env>")
    ctx_text, p_text, phi_text, env_text = args.args
    ctx = _context(ctx_text)
    p = parse_hf(p_text)
    phi = parse(phi_text)
    env = parse_hf_list(env_text)
    for k, x in enumerate(env):
        if x not in ctx:
            raise InputError(f"environment entry {k} = {format_hf(x)} is not in M")
    print("true" if forces_holds(ctx, p, phi, env, args.mutant) else "false")
    return EXIT_OK


def cmd_generic(args) -> int:
    if args.action == "all":
        if args.target is None:
            raise InputError("generic all needs a context")
        ctx = _context(args.target)
        for G in ctx.generic_filters():
            print(_filter_text(G))
        return EXIT_OK
    if args.target not in (None, "cohen"):
        raise InputError("generic rsl runs over the cohen poset only")
    P = cohen_poset()
    G = rsl_filter(P, _denses(args.denses or ""), args.bound)
    bits = hf_to_seq(G.last)
    _print_json({
        "decided_prefix": len(bits),
        "generic_prefix": "".join(map(str, bits)),
        "steps": [{"dense": name, "condition": "".join(map(str, hf_to_seq(q)))} for name, q in G.steps],
    })
    return EXIT_OK


def cmd_extend(args) -> int:
    ctx = _context(args.ctx)
    G = frozenset(parse_hf(args.filter).children)
    ctx.poset.require(*G)
    if not is_filter(ctx.poset, G):
        raise InputError(f"{args.filter} is not a filter on {ctx.poset.name}")
    generic = G in ctx.generic_filters()
    if not generic:
        print(f"warning: {args.filter} is not M-generic", file=sys.stderr)
    for x in ctx.extension(G):
        print(format_hf(x))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SHIPPED_CONTEXTS) if args.ctx == "all" else [args.ctx]
    suites = [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; expected one of {sorted(SUITES)} or all")
    opts = _battery_args(args.battery)
    reports: list[Report] = []
    contexts = [_context(n) for n in names]
    for ctx in contexts:
        battery = make_battery(ctx, **opts)
        for r in run_suites(ctx, suites, battery):
            reports.append(r)
            if not args.quiet:
                print(r.to_text(), flush=True)
    if args.ctx == "all" and args.suite in ("all", "mutants"):
        reports.append(_mutation_sensitivity(reports))
        if not args.quiet:
            print(reports[-1].to_text())
    payload = reports_to_json(reports)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if payload["passed"] else EXIT_FAIL


def _mutation_sensitivity(reports: Sequence[Report]) -> Report:
    """Every mutant must be caught on at least one of the contexts run."""
    out = Report("mutation_sensitivity", "all")
    caught = {m: [] for m in MUTANTS}
    for r in reports:
        if r.suite == "mutants":
            for m, hit in r.info.get("caught", {}).items():
                if hit:
                    caught.setdefault(m, []).append(r.context)
    out.checked = len(caught)
    for m, where in caught.items():
        if not where:
            out.fail({"mutant": m}, "caught on some context", "never caught")
    out.info["caught_on"] = caught
    return out


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hfforcing", description=(
        "Forcing over hereditarily finite ground models: formulas, forcing "
        "evaluation, generic filters and verification suites."))
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("formula", help="parse, print, measure or rename s-expression formulas")
    f.add_argument("action", choices=["parse", "print", "arity", "rename"])
    f.add_argument("formula")
    f.add_argument("map", nargs="?", help="for rename: SRC:DST pairs, comma separated")
    f.set_defaults(func=cmd_formula)

    m = sub.add_parser("model", help="build a forcing context and print closure diagnostics")
    m.add_argument("action", choices=["build"])
    m.add_argument("spec", help=f"one of {', '.join(SHIPPED_CONTEXTS)}, a JSON spec file, or inline JSON")
    m.set_defaults(func=cmd_model)

    s = sub.add_parser("sats", help="satisfaction in a finite structure")
    s.add_argument("model", help="vset:n, an HF literal, or a context spec (uses its M)")
    s.add_argument("env", help="HF list, e.g. '[0, {0}]'")
    s.add_argument("formula")
    s.set_defaults(func=cmd_sats)

    fo = sub.add_parser("forces", help="evaluate forcing or print the transformed formula")
    fo.add_argument("action", choices=["eval", "transform"])
    fo.add_argument("args", nargs="+", help="eval: <ctx> <p> <formula> <env>; transform: <formula>")
    fo.add_argument("--mutant", choices=sorted(MUTANTS), default=None,
                    help="use a deliberately broken atomic forcing relation")
    fo.set_defaults(func=cmd_forces)

    g = sub.add_parser("generic", help="enumerate generic filters or run the RS construction")
    g.add_argument("action", choices=["all", "rsl"])
    g.add_argument("target", nargs="?", help="all: a context; rsl: cohen")
    g.add_argument("--denses", help="rsl: comma separated len:N and avoid:PREFIX(PERIOD) items")
    g.add_argument("--bound", type=int, default=1 << 16, help="rsl: extension search bound")
    g.set_defaults(func=cmd_generic)

    e = sub.add_parser("extend", help="print M[G] for a filter G")
    e.add_argument("ctx")
    e.add_argument("filter", help="HF literal for the set of conditions, e.g. '{0,1}'")
    e.set_defaults(func=cmd_extend)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", help=f"one of {', '.join(SUITES)}, or all")
    v.add_argument("ctx", help="a context spec, or all for the shipped contexts")
    v.add_argument("--battery", nargs="*", default=[], metavar="KEY=VALUE",
                   help="depth=D arity=A name_rank=R variants=V curated=BOOL exhaustive=D/A;D/A")
    v.add_argument("--json", metavar="OUT", help="write the JSON report here")
    v.add_argument("--quiet", action="store_true", help="no per-suite text output")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except DensityBoundExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BOUND
    except _INPUT_ERRORS as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
