"""Verification suites for the forcing relation.

The central oracle is :func:`mt_forces`, the model-theoretic reading of
forcing: ``p`` forces ``phi`` when ``phi`` holds in every generic extension
whose filter contains ``p``.  Every suite compares the syntactic relation
(:func:`~hfforcing.forces.forces_holds`) against it or checks one of the
lemmas relating the two, and returns a :class:`Report`.
"""

from __future__ import annotations

import functools
import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .formula import (
    BatchSatisfier,
    Equal,
    Forall,
    Formula,
    Member,
    Nand,
    Satisfier,
    and_,
    arity,
    depth,
    exists,
    free_indices,
    iff_,
    implies,
    neg,
    or_,
    to_sexpr,
    zf_axiom,
)
from .forces import (
    FTuple,
    MUTANTS,
    _satisfier,
    call_graph,
    forces_eq,
    forces_holds,
    forces_holds_codes,
    forces_mem,
    forces_transform,
    frecR,
)
from .hfset import (
    EMPTY,
    HfSet,
    format_hf,
    format_hf_list,
    is_ordinal,
    make_set,
    opair,
    ordinal,
    pair,
    parse_hf,
    rank,
    union,
    vset,
)
from .names import (
    ForcingContext,
    check,
    closure_diagnostics,
    gdot,
    name_closure,
    opair_name,
)
from .posets import (
    FinitePoset,
    DenseSet,
    chain_poset,
    cohen_poset,
    dense_below,
    hf_to_seq,
    incompat,
    is_separative,
    rsl_filter,
    seq_to_hf,
    seq_upd,
    trivial_poset,
    v_poset,
)

__all__ = [
    "Report",
    "Battery",
    "make_battery",
    "pure_formulas",
    "shape_formulas",
    "CURATED",
    "mt_forces",
    "run_battery",
    "check_definition_of_forcing",
    "check_density",
    "check_strengthening",
    "check_truth",
    "check_characterizations",
    "check_IV240a",
    "check_atomic_symmetry",
    "check_ordinals_and_rank",
    "check_extension",
    "check_axioms_mg",
    "check_frecR",
    "check_mutants",
    "proper_extension_demo",
    "EventuallyPeriodic",
    "SHIPPED_CONTEXTS",
    "shipped_context",
    "context_from_spec",
    "BATTERY_SUITES",
    "SUITES",
    "run_suites",
    "reports_to_json",
]


# -- reports ------------------------------------------------------------------

@dataclass
class Report:
    """Outcome of one suite on one context.

    ``failures`` holds ``{"inputs": ..., "expected": ..., "got": ...}`` with
    inputs rendered as HF literals and s-expressions so they can be replayed.
    ``info`` carries suite-specific facts that are reported, not judged.
    """

    suite: str
    context: str
    checked: int = 0
    failures: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    elapsed: float = 0.0
    max_failures: int = 50
    dropped: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, inputs: dict, expected, got) -> None:
        if len(self.failures) < self.max_failures:
            self.failures.append({"inputs": inputs, "expected": expected, "got": got})
        else:
            self.dropped += 1

    def to_json(self) -> dict:
        """The comparison payload: no timings, so it is stable across runs."""
        return {
            "suite": self.suite,
            "context": self.context,
            "passed": self.passed,
            "checked": self.checked,
            "failure_count": len(self.failures) + self.dropped,
            "failures": self.failures,
            "info": self.info,
        }

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        head = (f"{status} {self.suite} [{self.context}] checked={self.checked} "
                f"failures={len(self.failures) + self.dropped} ({self.elapsed * 1000:.0f} ms)")
        lines = [head]
        for f in self.failures[:10]:
            lines.append(f"  {json.dumps(f['inputs'], sort_keys=True)} expected={f['expected']} got={f['got']}")
        for k, v in self.info.items():
            lines.append(f"  {k}: {v if not isinstance(v, (dict, list)) else json.dumps(v, sort_keys=True)}")
        return "\n".join(lines)


def reports_to_json(reports: Sequence[Report]) -> dict:
    """Stable payload under ``reports``; wall-clock times kept apart under ``timings``."""
    return {
        "passed": all(r.passed for r in reports),
        "reports": [r.to_json() for r in reports],
        "timings": {f"{r.suite}@{r.context}": round(r.elapsed * 1000) for r in reports},
    }


class _Timer:
    def __init__(self, report: Report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.elapsed += time.perf_counter() - self.t0
        return False


# -- formula batteries ---------------------------------------------------------

def _atoms(n: int) -> list[Formula]:
    return ([Member(i, j) for i in range(n) for j in range(n)]
            + [Equal(i, j) for i in range(n) for j in range(n)])


@functools.lru_cache(maxsize=None)
def pure_formulas(max_depth: int, n: int) -> tuple[Formula, ...]:
    """Every formula over Member/Equal/Nand/Forall of depth at most
    ``max_depth`` whose free indices are below ``n``."""
    if max_depth < 1:
        return ()
    out = list(_atoms(n))
    if max_depth >= 2:
        sub = pure_formulas(max_depth - 1, n)
        out += [Nand(a, b) for a in sub for b in sub]
        out += [Forall(b) for b in pure_formulas(max_depth - 1, n + 1)]
    return tuple(dict.fromkeys(out))


@functools.lru_cache(maxsize=None)
def _shapes(max_depth: int) -> tuple:
    """Constructor skeletons: ``()`` is a hole for an atom."""
    if max_depth < 1:
        return ()
    out = [()]
    if max_depth >= 2:
        sub = _shapes(max_depth - 1)
        out += [("forall", s) for s in sub]
        out += [("nand", a, b) for a in sub for b in sub]
    return tuple(out)


def _nesting(shape) -> int:
    if shape == ():
        return 0
    if shape[0] == "forall":
        return 1 + _nesting(shape[1])
    return max(_nesting(shape[1]), _nesting(shape[2]))


def _shape_depth(shape) -> int:
    if shape == ():
        return 1
    return 1 + max(_shape_depth(s) for s in shape[1:])


def _fill(shape, free: int, variant: int) -> Formula:
    """Instantiate the holes of ``shape`` deterministically.

    Hole number ``k`` under ``b`` binders gets an atom over the indices
    ``0 .. b+free-1`` picked from a fixed cycle by ``k`` and ``variant``, so
    consecutive holes see different variables and both atom kinds occur.
    """
    counter = itertools.count()

    def go(s, b: int) -> Formula:
        if s == ():
            k = next(counter)
            n = max(b + free, 1)
            pairs = [(i, j) for i in range(n) for j in range(n)]
            i, j = pairs[(5 * k + 3 * variant + b) % len(pairs)]
            kind = Equal if (k + variant) % 3 == 2 else Member
            return kind(i, j)
        if s[0] == "forall":
            return Forall(go(s[1], b + 1))
        return Nand(go(s[1], b), go(s[2], b))

    return go(shape, 0)


@functools.lru_cache(maxsize=None)
def shape_formulas(max_depth: int, max_arity: int, variants: int = 2,
                   min_depth: int = 3) -> tuple[Formula, ...]:
    """One or more instances of every constructor skeleton of depth between
    ``min_depth`` and ``max_depth``.

    The free-variable budget of an instance shrinks by one per nested
    quantifier (each ranges over the whole ground model), which keeps the
    exhaustive environment sweep affordable.
    """
    out = []
    for shape in _shapes(max_depth):
        if _shape_depth(shape) < min_depth:
            continue
        free = max(max_arity - _nesting(shape), 0)
        for v in range(variants):
            phi = _fill(shape, free, v)
            if arity(phi) <= max_arity:
                out.append(phi)
    return tuple(dict.fromkeys(out))


def _curated() -> tuple[Formula, ...]:
    x_in_y = Member(0, 1)
    return (
        # p-independent truths and falsities
        Equal(0, 0),
        neg(Equal(0, 0)),
        neg(Member(0, 0)),
        # membership, subset and equality between names
        exists(Member(0, 1)),
        exists(and_(Member(0, 1), Member(0, 2))),
        Forall(implies(Member(0, 1), Member(0, 2))),
        Forall(iff_(Member(0, 1), Member(0, 2))),
        or_(Member(0, 1), neg(Member(0, 1))),
        implies(Equal(0, 1), Equal(1, 0)),
        implies(and_(Equal(0, 1), x_in_y), Member(1, 1)),
        # emptiness and singletons
        Forall(neg(Member(0, 1))),
        exists(Forall(neg(Member(0, 1)))),
        exists(and_(Member(0, 1), Forall(implies(Member(0, 2), Equal(0, 1))))),
        # a name is a member of some ground element
        exists(Member(1, 0)),
        # foundation instance for a parameter
        implies(exists(Member(0, 1)),
                exists(and_(Member(0, 1), Forall(implies(Member(0, 1), neg(Member(0, 2))))))),
    )


CURATED = _curated()


@dataclass
class Battery:
    """Formulas, the names environments are drawn from, and the conditions.

    Each formula is paired with every tuple of ``names`` of length exactly
    its arity (so the arity never exceeds the environment length).
    """

    formulas: tuple
    names: tuple
    conditions: tuple
    caps: dict = field(default_factory=dict)

    def envs(self, phi: Formula) -> Iterator[tuple]:
        return itertools.product(self.names, repeat=arity(phi))

    def size(self) -> int:
        n = len(self.names)
        return sum(n ** arity(phi) for phi in self.formulas) * len(self.conditions)

    def describe(self) -> dict:
        return {**self.caps, "formulas": len(self.formulas), "names": len(self.names),
                "conditions": len(self.conditions), "points": self.size()}


def make_battery(ctx: ForcingContext, depth: int = 4, arity: int = 3,
                 exhaustive: Sequence[tuple[int, int]] = ((2, 3), (3, 2)),
                 name_rank: int = 4, variants: int = 4, curated: bool = True) -> Battery:
    """The verification battery for ``ctx``.

    Formulas: for each ``(d, a)`` in ``exhaustive``, every pure formula of
    depth at most ``d`` and arity at most ``a`` (both clipped to the caps);
    every constructor skeleton up to ``depth`` not already covered,
    instantiated ``variants`` ways; and the curated list.  Environments: all
    tuples of names of rank at most ``name_rank``.  Conditions: the carrier.
    """
    tiers = sorted({(min(d, depth), min(a, arity)) for d, a in exhaustive})
    fs: list = []
    for d, a in tiers:
        fs += pure_formulas(d, a)
    covered = max((d for d, _ in tiers), default=0)
    fs += shape_formulas(depth, arity, variants, covered + 1)
    if curated:
        fs += [phi for phi in CURATED if _arity(phi) <= arity and _depth(phi) <= max(depth, 8)]
    fs = tuple(dict.fromkeys(fs))
    return Battery(
        formulas=fs,
        names=ctx.names(name_rank),
        conditions=ctx.poset.carrier,
        caps={"depth": depth, "arity": arity, "exhaustive": [list(t) for t in tiers],
              "name_rank": name_rank, "variants": variants, "curated": curated},
    )


_depth = depth
_arity = arity


# -- the oracle ----------------------------------------------------------------

def _mg_satisfier(ctx: ForcingContext, G: frozenset) -> Satisfier:
    cache = ctx.caches.setdefault("mg_sats", {})
    s = cache.get(G)
    if s is None:
        s = cache[G] = Satisfier(ctx.extension(G))
    return s


def mt_forces(ctx: ForcingContext, p: HfSet, phi: Formula, env: Sequence[HfSet]) -> bool:
    """``phi`` holds in ``M[G]`` under ``val(G, env)`` for every generic ``G`` with ``p`` in it."""
    ctx.poset.require(p)
    for G in ctx.generic_filters():
        if p in G:
            v = ctx.valuation(G)
            if not _mg_satisfier(ctx, G)([v(t) for t in env], phi):
                return False
    return True


def _inputs(ctx: ForcingContext, phi: Formula, env, p: Optional[HfSet] = None, **extra) -> dict:
    out = {"context": ctx.name, "formula": to_sexpr(phi), "env": format_hf_list(env)}
    if p is not None:
        out["p"] = format_hf(p)
    for k, v in extra.items():
        out[k] = format_hf(v) if isinstance(v, HfSet) else v
    return out


# -- battery suites ------------------------------------------------------------

class _FormulaTable:
    """Both sides of the oracle for one formula over the battery's environments.

    ``forced[e, k]`` is ``forces_holds(conditions[k], phi, envs[e])``,
    computed in one vectorized sweep; ``holds[g][e]`` is the truth of
    ``phi`` in the ``g``-th generic extension at ``val(G, envs[e])``.
    """

    def __init__(self, ctx: ForcingContext, battery: Battery, phi: Formula,
                 mutant: Optional[str] = None):
        self.ctx = ctx
        self.phi = phi
        self.mutant = mutant
        self.envs = list(battery.envs(phi))
        self.conditions = tuple(battery.conditions)
        self.col = {p: k for k, p in enumerate(self.conditions)}
        code = {x: k for k, x in enumerate(ctx.M)}
        width = arity(phi)
        self.codes = np.array([[code[x] for x in env] for env in self.envs],
                              dtype=np.int64).reshape(len(self.envs), width)
        self.forced = forces_holds_codes(ctx, phi, self.codes, self.conditions, mutant)
        self.filters = ctx.generic_filters()
        self.holds = [_mg_holds(ctx, G, phi, self.codes) for G in self.filters]

    def mt(self):
        """``mt_forces`` at every ``(env, p)``."""
        out = np.ones(self.forced.shape, dtype=bool)
        for G, h in zip(self.filters, self.holds):
            for k, p in enumerate(self.conditions):
                if p in G:
                    out[:, k] &= h
        return out

    def force(self, psi: Formula, codes, conditions=None):
        return forces_holds_codes(self.ctx, psi, codes,
                                  self.conditions if conditions is None else conditions, self.mutant)


def _mg_holds(ctx: ForcingContext, G: frozenset, phi: Formula, codes):
    """Truth of ``phi`` in ``M[G]`` at ``val(G, env)`` for each row of ``codes``."""
    cache = ctx.caches.setdefault("mg_batch", {})
    hit = cache.get(G)
    if hit is None:
        B = BatchSatisfier(ctx.extension(G))
        v = ctx.valuation(G)
        to_mg = np.array([B._code[v(t)] for t in ctx.M], dtype=np.int64)
        hit = cache[G] = (B, to_mg)
    B, to_mg = hit
    rows = codes.shape[0]
    cols = [to_mg[codes[:, k]] for k in range(codes.shape[1])]
    return B.holds(phi, cols, rows)


def _report_mismatch(table: _FormulaTable, report: Report, want, got, **extra) -> None:
    report.checked += want.size
    bad = np.argwhere(want != got)
    ctx, phi = table.ctx, table.phi
    for e, k in bad[:report.max_failures]:
        report.fail(_inputs(ctx, phi, table.envs[e], table.conditions[k], **extra),
                    bool(want[e, k]), bool(got[e, k]))
    report.dropped += max(len(bad) - report.max_failures, 0)


def _suite_definition(table: _FormulaTable, report: Report) -> None:
    _report_mismatch(table, report, table.mt(), table.forced)


def _suite_density(table: _FormulaTable, report: Report) -> None:
    """Dense-below is decided once per distinct row pattern over the conditions."""
    P = table.ctx.poset
    conds = table.conditions
    F = table.forced
    patterns, inverse = np.unique(F, axis=0, return_inverse=True)
    dense = np.zeros((len(patterns), len(conds)), dtype=bool)
    for r, pat in enumerate(patterns):
        D = DenseSet(lambda q, pat=pat: bool(pat[table.col[q]]) if q in table.col else False)
        for k, p in enumerate(conds):
            dense[r, k] = dense_below(P, D, p)
    _report_mismatch(table, report, F, dense[inverse.reshape(-1)])


def _suite_strengthening(table: _FormulaTable, report: Report) -> None:
    ctx, phi, P = table.ctx, table.phi, table.ctx.poset
    F = table.forced
    for k, p in enumerate(table.conditions):
        for q in P.below(p):
            kq = table.col[q]
            report.checked += int(F[:, k].sum())
            bad = np.flatnonzero(F[:, k] & ~F[:, kq])
            for e in bad[:report.max_failures]:
                report.fail(_inputs(ctx, phi, table.envs[e], p, q=q), True, False)
            report.dropped += max(len(bad) - report.max_failures, 0)


def _suite_truth(table: _FormulaTable, report: Report) -> None:
    ctx, phi = table.ctx, table.phi
    for G, holds in zip(table.filters, table.holds):
        g_text = format_hf(make_set(G))
        ks = [table.col[p] for p in G if p in table.col]
        some = table.forced[:, ks].any(axis=1)
        report.checked += len(holds)
        bad = np.flatnonzero(some != holds)
        for e in bad[:report.max_failures]:
            report.fail(_inputs(ctx, phi, table.envs[e], G=g_text), bool(holds[e]), bool(some[e]))
        report.dropped += max(len(bad) - report.max_failures, 0)


def _suite_characterizations(table: _FormulaTable, report: Report) -> None:
    """Unfold one step of ``forces``: atoms, Forall and Nand."""
    ctx, phi, P = table.ctx, table.phi, table.ctx.poset
    cls = phi.__class__
    conds = table.conditions
    n_env = len(table.envs)
    if cls is Member or cls is Equal:
        atomic = forces_mem if cls is Member else forces_eq
        want = np.array([[atomic(ctx, p, env[phi.i], env[phi.j], table.mutant) for p in conds]
                         for env in table.envs], dtype=bool).reshape(n_env, len(conds))
    elif cls is Forall:
        m = len(ctx.M)
        xs = np.repeat(np.arange(m, dtype=np.int64), n_env)[:, None]
        codes = np.concatenate([xs, np.tile(table.codes, (m, 1))], axis=1)
        inst = table.force(phi.body, codes).reshape(m, n_env, len(conds))
        want = inst.all(axis=0)
    else:
        both = table.force(phi.lhs, table.codes) & table.force(phi.rhs, table.codes)
        below = np.array([[P.leq(q, p) for q in conds] for p in conds], dtype=bool)
        want = ~(both[:, None, :] & below[None, :, :]).any(axis=2)
    _report_mismatch(table, report, want, table.forced)


BATTERY_SUITES: dict[str, Callable] = {
    "definition_of_forcing": _suite_definition,
    "density": _suite_density,
    "strengthening": _suite_strengthening,
    "truth": _suite_truth,
    "characterizations": _suite_characterizations,
}


def run_battery(ctx: ForcingContext, battery: Battery, suites: Iterable[str] = tuple(BATTERY_SUITES),
                mutant: Optional[str] = None, stop_on_failure: bool = False,
                progress: Optional[Callable[[int, int], None]] = None) -> list[Report]:
    """Run several battery suites in one sweep, sharing the forcing tables.

    With ``stop_on_failure`` the sweep ends after the first formula that
    produced a failure in any suite.
    """
    suites = list(suites)
    for s in suites:
        if s not in BATTERY_SUITES:
            raise KeyError(f"unknown battery suite {s!r}")
    label = ctx.name if mutant is None else f"{ctx.name}+{mutant}"
    reports = {s: Report(s, label) for s in suites}
    t0 = time.perf_counter()
    for k, phi in enumerate(battery.formulas):
        table = _FormulaTable(ctx, battery, phi, mutant)
        for s in suites:
            BATTERY_SUITES[s](table, reports[s])
        if progress is not None:
            progress(k + 1, len(battery.formulas))
        if stop_on_failure and any(not r.passed for r in reports.values()):
            break
    elapsed = time.perf_counter() - t0
    for r in reports.values():
        r.elapsed = elapsed / len(suites)
        r.info["battery"] = battery.describe()
    return [reports[s] for s in suites]


def check_definition_of_forcing(ctx: ForcingContext, battery: Battery,
                                mutant: Optional[str] = None,
                                stop_on_failure: bool = False) -> Report:
    """``forces_holds`` agrees with :func:`mt_forces` at every battery point."""
    return run_battery(ctx, battery, ["definition_of_forcing"], mutant, stop_on_failure)[0]


def check_density(ctx: ForcingContext, battery: Battery) -> Report:
    """``p`` forces ``phi`` iff the conditions forcing ``phi`` are dense below ``p``."""
    return run_battery(ctx, battery, ["density"])[0]


def check_strengthening(ctx: ForcingContext, battery: Battery) -> Report:
    """Forcing is inherited by stronger conditions."""
    return run_battery(ctx, battery, ["strengthening"])[0]


def check_truth(ctx: ForcingContext, battery: Battery) -> Report:
    """``phi`` holds in ``M[G]`` iff some ``p`` in ``G`` forces it."""
    return run_battery(ctx, battery, ["truth"])[0]


def check_characterizations(ctx: ForcingContext, battery: Battery) -> Report:
    """Member/Equal reduce to the atomic relations, Forall to all instances
    from ``M``, Nand to "no stronger condition forces both"."""
    return run_battery(ctx, battery, ["characterizations"])[0]


# -- atomic and name-level suites ------------------------------------------------

def check_atomic_symmetry(ctx: ForcingContext, names: Optional[Sequence[HfSet]] = None) -> Report:
    """``forces_eq`` is reflexive and symmetric at every condition, over all of ``M``."""
    report = Report("atomic_symmetry", ctx.name)
    names = ctx.M if names is None else tuple(names)
    with _Timer(report):
        for p in ctx.poset.carrier:
            for t in names:
                report.checked += 1
                if not forces_eq(ctx, p, t, t):
                    report.fail({"p": format_hf(p), "t": format_hf(t)}, True, False)
            for i, a in enumerate(names):
                for b in names[i + 1:]:
                    report.checked += 1
                    x, y = forces_eq(ctx, p, a, b), forces_eq(ctx, p, b, a)
                    if x != y:
                        report.fail({"p": format_hf(p), "t1": format_hf(a), "t2": format_hf(b)}, x, y)
    return report


def check_IV240a(ctx: ForcingContext) -> Report:
    """For ``p`` in a generic ``G``: forced equality and membership of names
    hold between their values."""
    report = Report("IV240a", ctx.name)
    with _Timer(report):
        for G in ctx.generic_filters():
            v = ctx.valuation(G)
            conds = [p for p in ctx.poset.carrier if p in G]
            for t1 in ctx.M:
                a = v(t1)
                for t2 in ctx.M:
                    b = v(t2)
                    for p in conds:
                        report.checked += 2
                        inputs = {"context": ctx.name, "p": format_hf(p),
                                  "t1": format_hf(t1), "t2": format_hf(t2)}
                        if forces_eq(ctx, p, t1, t2) and a is not b:
                            report.fail({**inputs, "relation": "eq"}, "val equal", "differ")
                        if forces_mem(ctx, p, t1, t2) and a not in b:
                            report.fail({**inputs, "relation": "mem"}, "val member", "not member")
    return report


def check_ordinals_and_rank(ctx: ForcingContext) -> Report:
    """Values never exceed the rank of their names, and ``M`` and ``M[G]``
    have the same ordinals."""
    report = Report("ordinals_and_rank", ctx.name)
    with _Timer(report):
        ords_M = sorted(x for x in ctx.M if is_ordinal(x))
        for G in ctx.generic_filters():
            v = ctx.valuation(G)
            for x in ctx.M:
                report.checked += 1
                if rank(v(x)) > rank(x):
                    report.fail({"name": format_hf(x), "G": format_hf(make_set(G))},
                                f"rank <= {rank(x)}", rank(v(x)))
            ords_MG = sorted(x for x in ctx.extension(G) if is_ordinal(x))
            report.checked += 1
            if ords_M != ords_MG:
                report.fail({"G": format_hf(make_set(G))}, format_hf_list(ords_M), format_hf_list(ords_MG))
        report.info["ordinals"] = format_hf_list(ords_M)
    return report


def check_extension(ctx: ForcingContext, pair_rank: int = 3) -> Report:
    """Check names and the generic extension.

    Checks ``val(G, check(x)) = x`` on ``M``, the pairing of names up to
    ``pair_rank``, ``G`` in ``M[G]`` when the name for the generic filter
    is in ``M``, and the part of ``M ⊆ M[G]`` the context supports.
    """
    report = Report("extension", ctx.name)
    with _Timer(report):
        diag = closure_diagnostics(ctx)
        one = ctx.one
        small = ctx.names(pair_rank)
        gd = gdot(ctx.poset)
        literal = []
        for G in ctx.generic_filters():
            g_text = format_hf(make_set(G))
            v = ctx.valuation(G)
            MG = frozenset(ctx.extension(G))
            for x in ctx.M:
                report.checked += 1
                if v(check(x, one)) is not x:
                    report.fail({"x": format_hf(x), "G": g_text}, format_hf(x), format_hf(v(check(x, one))))
            for s in small:
                for r in small:
                    report.checked += 1
                    got, want = v(opair_name(s, r, one)), opair(v(s), v(r))
                    if got is not want:
                        report.fail({"sigma": format_hf(s), "rho": format_hf(r), "G": g_text},
                                    format_hf(want), format_hf(got))
            # G is the value of its canonical name, hence in M[G] once that name is.
            report.checked += 1
            if v(gd) is not make_set(G):
                report.fail({"G": g_text}, g_text, format_hf(v(gd)))
            if diag["gdot_in_M"]:
                report.checked += 1
                if make_set(G) not in MG:
                    report.fail({"G": g_text, "claim": "G in M[G]"}, True, False)
            # Elements whose check name is in M, the seed in particular, are in M[G].
            covered = [x for x in ctx.M if check(x, one) in ctx]
            for x in covered:
                report.checked += 1
                if x not in MG:
                    report.fail({"x": format_hf(x), "G": g_text, "claim": "x in M[G]"}, True, False)
            if diag["check_closed"]:
                report.checked += 1
                if not all(x in MG for x in ctx.M):
                    report.fail({"G": g_text, "claim": "M subset M[G]"}, True, False)
            literal.append(sum(1 for x in ctx.M if x not in MG))
        report.info.update({
            "check_closed": diag["check_closed"],
            "gdot_in_M": diag["gdot_in_M"],
            "seed_checks_in_M": diag["seed_checks_in_M"],
            "M_subset_MG": all(n == 0 for n in literal),
            "M_minus_MG_sizes": literal,
            "extension_sizes": [len(ctx.extension(G)) for G in ctx.generic_filters()],
        })
    return report


def _brute_pairing(N: Sequence[HfSet]) -> bool:
    Ns = frozenset(N)
    return all(pair(x, y) in Ns for x in N for y in N) if N else True


def _brute_union(N: Sequence[HfSet]) -> bool:
    Ns = frozenset(N)
    return all(union(x) in Ns for x in N)


def _brute_extensionality(N: Sequence[HfSet]) -> bool:
    # Transitive structures are extensional: members within N are all members.
    Ns = frozenset(N)
    seen = {}
    for x in N:
        key = frozenset(y for y in x if y in Ns)
        if key in seen:
            return False
        seen[key] = x
    return True


_BRUTE = {"pairing": _brute_pairing, "union": _brute_union, "extensionality": _brute_extensionality}
_HARD_AXIOMS = ("extensionality", "foundation")


def check_axioms_mg(ctx: ForcingContext, axioms: Sequence[str] = ("extensionality", "foundation",
                                                                   "pairing", "union")) -> Report:
    """Evaluate closed axioms, given by name or as formulas, in every ``M[G]``.

    Extensionality and foundation must hold (the extensions are transitive);
    the other verdicts are reported and must agree with a direct set-level
    computation.
    """
    report = Report("axioms_mg", ctx.name)
    with _Timer(report):
        verdicts: dict = {}
        for name in axioms:
            if isinstance(name, Formula):
                phi, name = name, to_sexpr(name)
            else:
                phi = zf_axiom(name)
            if arity(phi) != 0:
                raise ValueError(f"axiom {name} is not closed")
            verdicts[name] = []
            for G in ctx.generic_filters():
                N = ctx.extension(G)
                got = Satisfier(N)([], phi)
                verdicts[name].append(got)
                report.checked += 1
                g_text = format_hf(make_set(G))
                if name in _HARD_AXIOMS and not got:
                    report.fail({"axiom": name, "G": g_text}, True, got)
                brute = _BRUTE.get(name)
                if brute is not None and brute(N) != got:
                    report.fail({"axiom": name, "G": g_text, "check": "brute force"}, brute(N), got)
        report.info["verdicts"] = verdicts
    return report


def check_frecR(ctx: ForcingContext, max_rank: int = 5) -> Report:
    """The recursion relation is well founded below every root over names of
    rank at most ``max_rank``: finite, acyclic and irreflexive."""
    report = Report("frecR", ctx.name)
    with _Timer(report):
        names = ctx.names(max_rank)
        conds = ctx.poset.carrier
        roots = [FTuple(flag, a, b, p) for flag in ("eq", "mem")
                 for a in names for b in names for p in conds]
        g = call_graph(roots, conds)
        report.checked = len(roots)
        if not g["acyclic"]:
            report.fail({"context": ctx.name, "max_rank": max_rank}, "acyclic", "cycle found")
        for b in roots:
            if frecR(b, b):
                report.fail({"node": [b.flag, format_hf(b.t1), format_hf(b.t2), format_hf(b.p)]},
                            False, True)
        depths = g["depth"].values()
        report.info.update({
            "acyclic": g["acyclic"],
            "roots": len(roots),
            "nodes": g["nodes"],
            "edges": g["edges"],
            "max_depth": max(depths, default=0),
            "depth_histogram": _histogram(depths),
        })
    return report


def _histogram(values: Iterable[int]) -> dict:
    out: dict = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def check_mutants(ctx: ForcingContext, battery: Battery,
                  mutants: Iterable[str] = tuple(MUTANTS)) -> Report:
    """Each deliberately broken variant of atomic forcing must be caught by
    the definition-of-forcing comparison; records the first counterexample."""
    report = Report("mutants", ctx.name)
    with _Timer(report):
        caught = {}
        for m in mutants:
            r = check_definition_of_forcing(ctx, battery, mutant=m, stop_on_failure=True)
            report.checked += 1
            caught[m] = r.failures[0] if r.failures else None
        report.info["caught"] = {m: c is not None for m, c in caught.items()}
        report.info["counterexamples"] = {m: c for m, c in caught.items() if c is not None}
    return report


# -- the proper extension demo ----------------------------------------------------

@dataclass(frozen=True)
class EventuallyPeriodic:
    """The bit stream ``prefix`` followed by ``period`` repeated forever."""

    prefix: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ValueError("an eventually periodic stream needs a nonempty period")
        if any(b not in (0, 1) for b in self.prefix + self.period):
            raise ValueError("stream bits must be 0 or 1")

    def __call__(self, k: int) -> int:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    @classmethod
    def parse(cls, text: str) -> EventuallyPeriodic:
        """``"01(10)"`` is 0, 1, then 1, 0 repeated."""
        text = text.strip()
        if "(" not in text or not text.endswith(")"):
            raise ValueError(f"expected PREFIX(PERIOD), got {text!r}")
        head, _, rest = text.partition("(")
        bits = lambda s: tuple(int(c) for c in s if not c.isspace())
        try:
            return cls(bits(head), bits(rest[:-1]))
        except ValueError as e:
            raise ValueError(f"bad bit stream {text!r}: {e}") from None

    def __str__(self) -> str:
        return "".join(map(str, self.prefix)) + "(" + "".join(map(str, self.period)) + ")"


def length_dense(n: int) -> DenseSet:
    """Conditions of length at least ``n``."""
    return DenseSet(lambda f: len(hf_to_seq(f)) >= n, name=f"len>={n}")


def avoid_dense(h: EventuallyPeriodic) -> DenseSet:
    """Conditions that disagree with ``h`` somewhere."""

    def test(f: HfSet) -> bool:
        bits = hf_to_seq(f)
        return any(b != h(k) for k, b in enumerate(bits))
    return DenseSet(test, name=f"avoid {h}")


def proper_extension_demo(requested: int = 50, ground_reals: Sequence[EventuallyPeriodic] = (),
                          bound: int = 1 << 16, probes: int = 8) -> Report:
    """Build a Cohen-generic chain meeting ``len >= n`` for ``n = 1..requested``
    and one avoidance set per ground real, interleaved.

    The resulting real differs from every listed ground real.  Raises
    :class:`~hfforcing.posets.DensityBoundExceeded` if a dense set is not
    met within ``bound`` extensions.
    """
    report = Report("proper_extension", "cohen")
    with _Timer(report):
        P = cohen_poset()
        reals = list(ground_reals)
        denses = []
        for n in range(1, requested + 1):
            denses.append(length_dense(n))
            if n - 1 < len(reals):
                denses.append(avoid_dense(reals[n - 1]))
        denses += [avoid_dense(h) for h in reals[requested:]]
        G = rsl_filter(P, denses, bound)
        last = hf_to_seq(G.last)
        report.checked = len(denses)
        if len(last) < requested:
            report.fail({"requested": requested}, f">= {requested}", len(last))
        conflicts = {}
        for h in reals:
            k = next((k for k, b in enumerate(last) if b != h(k)), None)
            if k is None:
                report.fail({"ground_real": str(h)}, "a conflict", None)
                continue
            witness = next(q for name, q in G.steps if name == f"avoid {h}")
            conflicts[str(h)] = {"position": k, "condition": "".join(map(str, hf_to_seq(witness)))}
        sample = [seq_to_hf(last[:k]) for k in range(0, len(last) + 1, max(len(last) // probes, 1))]
        sep = is_separative(P, sample[:probes])
        zero_one = all(incompat(P, seq_upd(f, 0), seq_upd(f, 1)) is True for f in sample)
        report.info.update({
            "decided_prefix": len(last),
            "generic_prefix": "".join(map(str, last)),
            "conflicts": conflicts,
            "separative_probe": str(sep.value if hasattr(sep, "value") else sep),
            "seq_upd_incompatible": zero_one,
            "dense_sets_met": len(G.steps),
        })
    return report


# -- shipped contexts and context specs -----------------------------------------------

SHIPPED_CONTEXTS: dict[str, Callable[[], FinitePoset]] = {
    "trivial": trivial_poset,
    "vposet": v_poset,
    "chain3": lambda: chain_poset(3),
}

SHIPPED_SEED_STAGE = 3
SHIPPED_RANK_CAP = 9


@functools.lru_cache(maxsize=None)
def shipped_context(name: str) -> ForcingContext:
    """One of the three desk-scale contexts: the poset over ``vset(3)``,
    name-closed up to rank 9."""
    try:
        poset = SHIPPED_CONTEXTS[name]()
    except KeyError:
        raise KeyError(f"unknown context {name!r}; expected one of {sorted(SHIPPED_CONTEXTS)}") from None
    return name_closure(vset(SHIPPED_SEED_STAGE).children, poset, SHIPPED_RANK_CAP, name=name)


def _poset_from_spec(spec) -> FinitePoset:
    if isinstance(spec, dict):
        return FinitePoset.from_json(spec)
    if spec in SHIPPED_CONTEXTS:
        return SHIPPED_CONTEXTS[spec]()
    if isinstance(spec, str) and spec.startswith("chain:"):
        return chain_poset(int(spec.split(":", 1)[1]))
    if spec == "cohen":
        raise ValueError("the cohen poset is countable; it has no finite forcing context")
    raise ValueError(f"unknown poset {spec!r}")


def _seed_from_spec(spec) -> list[HfSet]:
    if isinstance(spec, str) and spec.startswith("vset:"):
        return list(vset(int(spec.split(":", 1)[1])).children)
    if isinstance(spec, str):
        return list(parse_hf(spec).children)
    if isinstance(spec, list):
        return [parse_hf(s) for s in spec]
    raise ValueError(f"unknown seed {spec!r}")


def context_from_spec(spec) -> ForcingContext:
    """Build a finite context from a name of a shipped context or a dict
    ``{"seed", "poset", "rank_cap", "regime", "name"}``."""
    if isinstance(spec, str):
        return shipped_context(spec)
    regime = spec.get("regime", "finite")
    if regime != "finite":
        raise ValueError(f"forcing contexts need the finite regime, got {regime!r}")
    poset = _poset_from_spec(spec.get("poset", "trivial"))
    seed = _seed_from_spec(spec.get("seed", f"vset:{SHIPPED_SEED_STAGE}"))
    cap = int(spec.get("rank_cap", SHIPPED_RANK_CAP))
    return name_closure(seed, poset, cap, name=spec.get("name", poset.name))


# -- suite registry -------------------------------------------------------------------

def _battery_suite(name: str):
    def run(ctx: ForcingContext, battery: Battery) -> Report:
        return run_battery(ctx, battery, [name])[0]
    return run


SUITES: dict[str, Callable] = {
    **{name: _battery_suite(name) for name in BATTERY_SUITES},
    "atomic_symmetry": lambda ctx, battery: check_atomic_symmetry(ctx),
    "IV240a": lambda ctx, battery: check_IV240a(ctx),
    "ordinals_and_rank": lambda ctx, battery: check_ordinals_and_rank(ctx),
    "extension": lambda ctx, battery: check_extension(ctx),
    "axioms_mg": lambda ctx, battery: check_axioms_mg(ctx),
    "frecR": lambda ctx, battery: check_frecR(ctx),
    "mutants": lambda ctx, battery: check_mutants(ctx, battery),
}


def run_suites(ctx: ForcingContext, names: Sequence[str], battery: Optional[Battery] = None,
               progress: Optional[Callable[[int, int], None]] = None) -> list[Report]:
    """Run the named suites (``"all"`` for every one), sharing one sweep for
    the battery suites."""
    names = list(SUITES) if "all" in names else list(names)
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {n!r}; expected one of {sorted(SUITES)} or 'all'")
    battery = battery or make_battery(ctx)
    swept = [n for n in names if n in BATTERY_SUITES]
    out = {}
    if swept:
        for r in run_battery(ctx, battery, swept, progress=progress):
            out[r.suite] = r
    for n in names:
        if n not in out:
            out[n] = SUITES[n](ctx, battery)
    return [out[n] for n in names]
