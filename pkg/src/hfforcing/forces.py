"""The forcing relation on a finite forcing context.

Atomic forcing is the mutual recursion

    forces_eq(p, t1, t2)  iff  for all s in dom(t1) | dom(t2), all q <= p:
                               forces_mem(q, s, t1) <-> forces_mem(q, s, t2)
    forces_mem(p, t1, t2) iff  {q <= p : some <s, r> in t2 with q <= r and
                               forces_eq(q, t1, s)} is dense below p

which terminates because every recursive call is a ``frecR``-predecessor of
its caller.  Compound formulas go through :func:`forces_transform`, a purely
syntactic translation whose only non-first-order ingredients are the two
forcing atoms.
"""

from __future__ import annotations

import functools
from collections import namedtuple
from typing import Iterable, Optional, Sequence

from .formula import (
    BatchSatisfier,
    Equal,
    ForcesEq,
    ForcesMem,
    Forall,
    Formula,
    Member,
    Nand,
    Satisfier,
    SatsError,
    and_,
    arity,
    pair_fm,
    exists,
    rename,
)
from .hfset import HfSet, domain, format_hf, unpair
from .names import ForcingContext
from .posets import PosetError

__all__ = [
    "FTuple",
    "frecR",
    "predecessors",
    "call_graph",
    "AtomicForcing",
    "MUTANTS",
    "forces_eq",
    "forces_mem",
    "leq_fm",
    "forces_transform",
    "sats_x",
    "forces_holds",
    "atom_tables",
    "forces_holds_batch",
    "forces_holds_codes",
]

FTuple = namedtuple("FTuple", "flag t1 t2 p")
FTuple.__doc__ = "A node of the atomic forcing recursion; ``flag`` is 'eq' or 'mem'."


def frecR(a: FTuple, b: FTuple) -> bool:
    """``a`` is an immediate recursive call made while evaluating ``b``.

    An 'eq' node ``(t1, t2)`` calls ``mem(s, t1)`` and ``mem(s, t2)`` for
    ``s`` in ``dom(t1) | dom(t2)``; a 'mem' node ``(t1, t2)`` calls
    ``eq(t1, s)`` for ``s`` in ``dom(t2)``.  The condition components are
    not constrained.
    """
    if b.flag == "eq":
        return (a.flag == "mem" and (a.t2 is b.t1 or a.t2 is b.t2)
                and (a.t1 in domain(b.t1) or a.t1 in domain(b.t2)))
    if b.flag == "mem":
        return a.flag == "eq" and a.t1 is b.t1 and a.t2 in domain(b.t2)
    return False


def predecessors(b: FTuple, conditions: Iterable[HfSet]) -> list[FTuple]:
    """All ``a`` with ``frecR(a, b)`` whose condition is among ``conditions``."""
    conds = tuple(conditions)
    out = []
    if b.flag == "eq":
        for s in sorted(set(domain(b.t1)) | set(domain(b.t2))):
            for t in dict.fromkeys((b.t1, b.t2)):
                out.extend(FTuple("mem", s, t, q) for q in conds)
    elif b.flag == "mem":
        for s in domain(b.t2):
            out.extend(FTuple("eq", b.t1, s, q) for q in conds)
    return out


def call_graph(roots: Iterable[FTuple], conditions: Iterable[HfSet]) -> dict:
    """Explore the ``frecR`` graph below ``roots``.

    Returns ``{"nodes": n, "edges": e, "acyclic": bool, "depth": {root: d}}``
    where ``d`` is the length of the longest descending chain from the root.
    """
    conds = tuple(conditions)
    preds: dict[FTuple, list[FTuple]] = {}
    stack = list(roots)
    while stack:
        b = stack.pop()
        if b in preds:
            continue
        ps = preds[b] = predecessors(b, conds)
        stack.extend(a for a in ps if a not in preds)

    # Iterative DFS with colours; records longest-path depth on the way out.
    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(preds, WHITE)
    depth: dict[FTuple, int] = {}
    acyclic = True
    for start in preds:
        if colour[start] != WHITE:
            continue
        work = [(start, iter(preds[start]))]
        colour[start] = GREY
        while work:
            node, it = work[-1]
            advanced = False
            for a in it:
                c = colour[a]
                if c == GREY:
                    acyclic = False
                elif c == WHITE:
                    colour[a] = GREY
                    work.append((a, iter(preds[a])))
                    advanced = True
                    break
            if not advanced:
                work.pop()
                colour[node] = BLACK
                depth[node] = 1 + max((depth.get(a, 0) for a in preds[node]), default=-1)
    edges = sum(len(v) for v in preds.values())
    return {
        "nodes": len(preds),
        "edges": edges,
        "acyclic": acyclic,
        "depth": {r: depth[r] for r in roots} if acyclic else {},
    }


# -- atomic forcing -----------------------------------------------------------

MUTANTS = {
    "drop_q_leq_r": "membership witnesses ignore the requirement q <= r",
    "eq_left_domain": "equality quantifies only over dom(t1)",
    "mem_no_density": "membership needs a witness at p itself instead of densely below p",
    "eq_only_at_p": "equality compares memberships at p only, not at every q <= p",
}


class AtomicForcing:
    """Memoized ``forces_eq`` / ``forces_mem`` for one context.

    ``mutant`` selects a deliberately wrong variant (see :data:`MUTANTS`),
    used to confirm that the verification suites can tell the difference.
    """

    def __init__(self, ctx: ForcingContext, mutant: Optional[str] = None):
        if mutant is not None and mutant not in MUTANTS:
            raise ValueError(f"unknown mutant {mutant!r}")
        self.ctx = ctx
        self.poset = ctx.poset
        self.mutant = mutant
        self._eq: dict = {}
        self._mem: dict = {}
        self._wit: dict = {}
        self._pairs: dict = {}
        self._dom: dict = {}

    def _conditioned_pairs(self, t: HfSet) -> tuple:
        hit = self._pairs.get(t)
        if hit is None:
            P = self.poset
            hit = []
            for z in t:
                ab = unpair(z)
                if ab is not None and ab[1] in P:
                    hit.append(ab)
            hit = self._pairs[t] = tuple(hit)
        return hit

    def _domain(self, t: HfSet) -> frozenset:
        hit = self._dom.get(t)
        if hit is None:
            hit = self._dom[t] = frozenset(domain(t).children)
        return hit

    def eq(self, p: HfSet, t1: HfSet, t2: HfSet) -> bool:
        key = (p, t1, t2)
        hit = self._eq.get(key)
        if hit is not None:
            return hit
        if self.mutant == "eq_left_domain":
            ss = self._domain(t1)
        else:
            ss = self._domain(t1) | self._domain(t2)
        qs = (p,) if self.mutant == "eq_only_at_p" else self.poset.below(p)
        out = all(self.mem(q, s, t1) == self.mem(q, s, t2) for s in sorted(ss) for q in qs)
        self._eq[key] = out
        return out

    def _witness(self, q: HfSet, t1: HfSet, t2: HfSet) -> bool:
        key = (q, t1, t2)
        hit = self._wit.get(key)
        if hit is not None:
            return hit
        leq = self.poset.leq
        loose = self.mutant == "drop_q_leq_r"
        out = any((loose or leq(q, r)) and self.eq(q, t1, s)
                  for s, r in self._conditioned_pairs(t2))
        self._wit[key] = out
        return out

    def mem(self, p: HfSet, t1: HfSet, t2: HfSet) -> bool:
        key = (p, t1, t2)
        hit = self._mem.get(key)
        if hit is not None:
            return hit
        if self.mutant == "mem_no_density":
            out = self._witness(p, t1, t2)
        else:
            below = self.poset.below
            out = all(any(self._witness(q, t1, t2) for q in below(v)) for v in below(p))
        self._mem[key] = out
        return out


def _engine(ctx: ForcingContext, mutant: Optional[str] = None) -> AtomicForcing:
    engines = ctx.caches.setdefault("atomic", {})
    eng = engines.get(mutant)
    if eng is None:
        eng = engines[mutant] = AtomicForcing(ctx, mutant)
    return eng


def forces_eq(ctx: ForcingContext, p: HfSet, t1: HfSet, t2: HfSet,
              mutant: Optional[str] = None) -> bool:
    ctx.poset.require(p)
    return _engine(ctx, mutant).eq(p, t1, t2)


def forces_mem(ctx: ForcingContext, p: HfSet, t1: HfSet, t2: HfSet,
               mutant: Optional[str] = None) -> bool:
    ctx.poset.require(p)
    return _engine(ctx, mutant).mem(p, t1, t2)


# -- the formula transformer ----------------------------------------------------

def leq_fm(q: int, p: int, leq: int) -> Formula:
    """``<env[q], env[p]> in env[leq]``."""
    return exists(and_(Member(0, leq + 1), pair_fm(q + 1, p + 1, 0)))


# Prefix layout of the environment: [p, P, leq, one] @ env.
_P, _LEQ, _ONE = 1, 2, 3


@functools.lru_cache(maxsize=None)
def forces_transform(phi: Formula) -> Formula:
    """The formula ``forces(phi)`` evaluated at ``[p, P, leq, one] @ env``.

    Atoms become forcing atoms with the p-slot at index 0.  ``Nand(a, b)``
    becomes "no q in P with q <= p forces both a and b", with ``q`` bound by
    a fresh quantifier.  ``Forall`` keeps its quantifier and moves the bound
    variable from just past the prefix to the head of the environment.
    """
    if isinstance(phi, Member):
        return ForcesMem(0, phi.i + 4, phi.j + 4)
    if isinstance(phi, Equal):
        return ForcesEq(0, phi.i + 4, phi.j + 4)
    if isinstance(phi, Nand):
        # Inside the binder: [q, p, P, leq, one] @ env.
        def at_q(f: Formula) -> Formula:
            n = max(arity(f), 4)
            return rename(f, {0: 0, _P: _P + 1, _LEQ: _LEQ + 1, _ONE: _ONE + 1,
                              **{i: i + 1 for i in range(4, n)}})

        a = at_q(forces_transform(phi.lhs))
        b = a if phi.rhs is phi.lhs else at_q(forces_transform(phi.rhs))
        both = a if b is a else and_(a, b)
        return Forall(Nand(Member(0, _P + 1), and_(leq_fm(0, 1, _LEQ + 1), both)))
    if isinstance(phi, Forall):
        # forces(body) reads the bound variable at index 4; Forall puts it at 0.
        body = forces_transform(phi.body)
        n = max(arity(body), 5)
        rho = {0: 1, 1: 2, 2: 3, 3: 4, 4: 0, **{i: i for i in range(5, n)}}
        return Forall(rename(body, rho))
    raise TypeError(f"forces_transform expects a pure formula, got {phi!r}")


def _satisfier(ctx: ForcingContext, mutant: Optional[str] = None) -> Satisfier:
    sats_cache = ctx.caches.setdefault("sats_x", {})
    s = sats_cache.get(mutant)
    if s is None:
        eng = _engine(ctx, mutant)
        P = ctx.poset

        def hook(cls: type, p: HfSet, t1: HfSet, t2: HfSet) -> bool:
            if p not in P:
                return False
            if cls is ForcesEq:
                return eng.eq(p, t1, t2)
            return eng.mem(p, t1, t2)

        s = sats_cache[mutant] = Satisfier(ctx.M, extended=hook)
    return s


def sats_x(ctx: ForcingContext, env: Sequence[HfSet], phi: Formula,
           mutant: Optional[str] = None) -> bool:
    """Satisfaction in ``ctx.M`` with the forcing atoms interpreted."""
    return _satisfier(ctx, mutant)(env, phi)


def forces_holds(ctx: ForcingContext, p: HfSet, phi: Formula, env: Sequence[HfSet],
                 mutant: Optional[str] = None) -> bool:
    """``p ⊩ phi env``, i.e. ``M, [p, P, leq, one] @ env ⊨ forces(phi)``."""
    ctx.poset.require(p)
    if len(env) < arity(phi):
        raise SatsError(f"environment of length {len(env)} is shorter than arity {arity(phi)}")
    return sats_x(ctx, (p,) + ctx.prefix + tuple(env), forces_transform(phi), mutant)


# -- batch evaluation -------------------------------------------------------------

def atom_tables(ctx: ForcingContext, mutant: Optional[str] = None) -> dict:
    """``forces_eq``/``forces_mem`` tabulated over the codes of ``ctx.M``.

    Entry ``[p, a, b]`` is false whenever ``p`` is not a condition, matching
    the guarded reading of the extended atoms.
    """
    import numpy as np

    cache = ctx.caches.setdefault("atom_tables", {})
    hit = cache.get(mutant)
    if hit is not None:
        return hit
    eng = _engine(ctx, mutant)
    M = ctx.M
    n = len(M)
    code = {x: k for k, x in enumerate(M)}
    eq = np.zeros((n, n, n), dtype=bool)
    mem = np.zeros((n, n, n), dtype=bool)
    for p in ctx.poset.carrier:
        c = code[p]
        for i, a in enumerate(M):
            for j, b in enumerate(M):
                eq[c, i, j] = eng.eq(p, a, b)
                mem[c, i, j] = eng.mem(p, a, b)
    hit = cache[mutant] = {ForcesEq: eq, ForcesMem: mem}
    return hit


def _batch(ctx: ForcingContext, mutant: Optional[str] = None) -> BatchSatisfier:
    cache = ctx.caches.setdefault("batch", {})
    s = cache.get(mutant)
    if s is None:
        s = cache[mutant] = BatchSatisfier(ctx.M, atom_tables(ctx, mutant))
    return s


def forces_holds_batch(ctx: ForcingContext, phi: Formula, envs: Sequence[Sequence[HfSet]],
                       conditions: Optional[Sequence[HfSet]] = None,
                       mutant: Optional[str] = None):
    """``forces_holds`` at every ``(env, p)``, as a boolean array of shape
    ``(len(envs), len(conditions))``.

    Evaluates the same formula ``forces(phi)`` at ``[p, P, leq, one] @ env``
    as :func:`forces_holds`, with the vectorized satisfier.
    """
    width = arity(phi)
    for env in envs:
        if len(env) < width:
            raise SatsError(f"environment of length {len(env)} is shorter than arity {width}")
    S = _batch(ctx, mutant)
    import numpy as np

    code = S._code
    codes = np.array([[code[x] for x in env[:width]] for env in envs],
                     dtype=np.int64).reshape(len(envs), width)
    return forces_holds_codes(ctx, phi, codes, conditions, mutant)


def forces_holds_codes(ctx: ForcingContext, phi: Formula, codes,
                       conditions: Optional[Sequence[HfSet]] = None,
                       mutant: Optional[str] = None):
    """:func:`forces_holds_batch` on environments given as an integer array
    of positions in ``ctx.M`` (one row per environment)."""
    import numpy as np

    conditions = tuple(ctx.poset.carrier if conditions is None else conditions)
    ctx.poset.require(*conditions)
    S = _batch(ctx, mutant)
    codes = np.asarray(codes, dtype=np.int64)
    n_env, n_p = codes.shape[0], len(conditions)
    if codes.shape[1] < arity(phi):
        raise SatsError(f"environment of length {codes.shape[1]} is shorter than arity {arity(phi)}")
    rows = n_env * n_p
    if rows == 0:
        return np.zeros((n_env, n_p), dtype=bool)
    code = S._code
    pc = np.array([code[p] for p in conditions], dtype=np.int64)
    cols = [np.tile(pc, n_env)]
    cols += [np.full(rows, code[x], dtype=np.int64) for x in ctx.prefix]
    cols += [np.repeat(codes[:, k], n_p) for k in range(codes.shape[1])]
    return S.holds(forces_transform(phi), cols, rows).reshape(n_env, n_p)
