"""Internalized first-order formulas over the language {∈, =}.

Variables are de Bruijn indices into an environment list: index 0 reads the
head, and ``Forall`` prepends the bound value.  ``Nand`` and ``Forall`` are
the only non-atomic constructors; everything else is an abbreviation.

Two extra atoms, ``ForcesEq`` and ``ForcesMem``, appear only in the output
of the forcing transformer.  They carry an explicit index for the condition
and are evaluated by :mod:`hfforcing.forces`.
"""

from __future__ import annotations

import functools
import operator
import threading
import weakref
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .hfset import HfSet, format_hf

__all__ = [
    "Formula",
    "Member",
    "Equal",
    "Nand",
    "Forall",
    "ForcesEq",
    "ForcesMem",
    "arity",
    "free_indices",
    "depth",
    "is_pure",
    "rename",
    "RenameError",
    "neg",
    "and_",
    "or_",
    "implies",
    "iff_",
    "exists",
    "upair_fm",
    "pair_fm",
    "zf_axiom",
    "ZF_AXIOMS",
    "sats",
    "Satisfier",
    "BatchSatisfier",
    "SatsError",
    "parse",
    "to_sexpr",
    "FormulaSyntaxError",
]


class _Interned(type):
    """Hash-conses instances: structurally equal formulas are one object."""

    _table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __call__(cls, *args, **kwargs):
        obj = super().__call__(*args, **kwargs)
        key = (cls,) + obj._fields()
        with _Interned._lock:
            hit = _Interned._table.get(key)
            if hit is not None:
                return hit
            _Interned._table[key] = obj
        return obj


class Formula(metaclass=_Interned):
    """Base class of formula nodes; instances are immutable, hashable and
    interned, so equal formulas are identical."""

    __slots__ = ()

    def __reduce__(self):
        return (self.__class__, self._fields())


def _cached_hash(self) -> int:
    return self._hash


def _formula_eq(a, b) -> bool:
    """Structural equality that visits each pair of shared nodes once.

    Formulas produced by the transformer share subterms heavily, so the
    naive field-by-field comparison would unfold the DAG into a tree.
    """
    if a is b:
        return True
    if not isinstance(b, Formula):
        return NotImplemented
    seen = set()
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        cls = x.__class__
        if y.__class__ is not cls or x._hash != y._hash:
            return False
        key = (id(x), id(y))
        if key in seen:
            continue
        seen.add(key)
        if cls is Nand:
            stack.append((x.lhs, y.lhs))
            stack.append((x.rhs, y.rhs))
        elif cls is Forall:
            stack.append((x.body, y.body))
        elif cls is ForcesEq or cls is ForcesMem:
            if (x.p, x.i, x.j) != (y.p, y.i, y.j):
                return False
        elif (x.i, x.j) != (y.i, y.j):
            return False
    return True


@dataclass(frozen=True, eq=False, repr=False)
class Member(Formula):
    i: int
    j: int
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        _check_indices(self.i, self.j)
        object.__setattr__(self, "_hash", hash(("Member", self.i, self.j)))

    __hash__ = _cached_hash
    __eq__ = _formula_eq

    def _fields(self) -> tuple:
        return (self.i, self.j)

    def __repr__(self) -> str:
        return f"Member({self.i},{self.j})"


@dataclass(frozen=True, eq=False, repr=False)
class Equal(Formula):
    i: int
    j: int
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        _check_indices(self.i, self.j)
        object.__setattr__(self, "_hash", hash(("Equal", self.i, self.j)))

    __hash__ = _cached_hash
    __eq__ = _formula_eq

    def _fields(self) -> tuple:
        return (self.i, self.j)

    def __repr__(self) -> str:
        return f"Equal({self.i},{self.j})"


@dataclass(frozen=True, eq=False, repr=False)
class Nand(Formula):
    lhs: Formula
    rhs: Formula
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Nand", self.lhs._hash, self.rhs._hash)))

    __hash__ = _cached_hash
    __eq__ = _formula_eq

    def _fields(self) -> tuple:
        return (self.lhs, self.rhs)

    def __repr__(self) -> str:
        return f"Nand({self.lhs!r},{self.rhs!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Forall(Formula):
    body: Formula
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("Forall", self.body._hash)))

    __hash__ = _cached_hash
    __eq__ = _formula_eq

    def _fields(self) -> tuple:
        return (self.body,)

    def __repr__(self) -> str:
        return f"Forall({self.body!r})"


@dataclass(frozen=True, eq=False, repr=False)
class ForcesEq(Formula):
    """``env[p] ⊩ env[i] = env[j]`` (false when ``env[p]`` is not a condition)."""

    p: int
    i: int
    j: int
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        _check_indices(self.p, self.i, self.j)
        object.__setattr__(self, "_hash", hash(("ForcesEq", self.p, self.i, self.j)))

    __hash__ = _cached_hash
    __eq__ = _formula_eq

    def _fields(self) -> tuple:
        return (self.p, self.i, self.j)

    def __repr__(self) -> str:
        return f"ForcesEq({self.p},{self.i},{self.j})"


@dataclass(frozen=True, eq=False, repr=False)
class ForcesMem(Formula):
    """``env[p] ⊩ env[i] ∈ env[j]`` (false when ``env[p]`` is not a condition)."""

    p: int
    i: int
    j: int
    _hash: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        _check_indices(self.p, self.i, self.j)
        object.__setattr__(self, "_hash", hash(("ForcesMem", self.p, self.i, self.j)))

    __hash__ = _cached_hash
    __eq__ = _formula_eq

    def _fields(self) -> tuple:
        return (self.p, self.i, self.j)

    def __repr__(self) -> str:
        return f"ForcesMem({self.p},{self.i},{self.j})"


Atom2 = (Member, Equal)
AtomX = (ForcesEq, ForcesMem)


def _check_indices(*ixs):
    for k in ixs:
        if isinstance(k, bool) or not isinstance(k, int) or k < 0:
            raise ValueError(f"de Bruijn index must be a natural number, got {k!r}")


# -- structural queries -----------------------------------------------------

@functools.lru_cache(maxsize=None)
def free_indices(phi: Formula) -> frozenset[int]:
    """Indices of ``phi`` that point into the surrounding environment."""
    if isinstance(phi, Atom2):
        return frozenset((phi.i, phi.j))
    if isinstance(phi, AtomX):
        return frozenset((phi.p, phi.i, phi.j))
    if isinstance(phi, Nand):
        return free_indices(phi.lhs) | free_indices(phi.rhs)
    if isinstance(phi, Forall):
        return frozenset(k - 1 for k in free_indices(phi.body) if k > 0)
    raise TypeError(f"not a formula: {phi!r}")


@functools.lru_cache(maxsize=None)
def arity(phi: Formula) -> int:
    """Minimal environment length needed to evaluate ``phi``."""
    if isinstance(phi, Atom2):
        return max(phi.i, phi.j) + 1
    if isinstance(phi, AtomX):
        return max(phi.p, phi.i, phi.j) + 1
    if isinstance(phi, Nand):
        return max(arity(phi.lhs), arity(phi.rhs))
    if isinstance(phi, Forall):
        return max(arity(phi.body) - 1, 0)
    raise TypeError(f"not a formula: {phi!r}")


@functools.lru_cache(maxsize=None)
def depth(phi: Formula) -> int:
    """Height of the syntax tree; atoms have depth 1."""
    if isinstance(phi, Nand):
        return 1 + max(depth(phi.lhs), depth(phi.rhs))
    if isinstance(phi, Forall):
        return 1 + depth(phi.body)
    return 1


@functools.lru_cache(maxsize=None)
def is_pure(phi: Formula) -> bool:
    """True when ``phi`` contains no forcing atoms."""
    if isinstance(phi, AtomX):
        return False
    if isinstance(phi, Nand):
        return is_pure(phi.lhs) and is_pure(phi.rhs)
    if isinstance(phi, Forall):
        return is_pure(phi.body)
    return True


# -- renaming ---------------------------------------------------------------

class RenameError(ValueError):
    pass


def rename(phi: Formula, rho: Mapping[int, int]) -> Formula:
    """Replace every free index ``i`` of ``phi`` by ``rho[i]``.

    Under a binder the map is lifted: 0 stays 0 and ``i+1`` goes to
    ``rho[i]+1``.  ``rho`` must be injective and defined on every free index.
    """
    if len(set(rho.values())) != len(rho):
        raise RenameError(f"renaming is not injective: {dict(rho)}")
    missing = free_indices(phi) - rho.keys()
    if missing:
        raise RenameError(f"renaming undefined on free indices {sorted(missing)}")
    return _rename(phi, dict(rho), 0)


def _rename(phi: Formula, rho: dict, shift: int, memo: Optional[dict] = None) -> Formula:
    # ``memo`` keeps shared subterms shared (and the walk linear in the DAG).
    if memo is None:
        memo = {}
    key = (id(phi), shift)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]

    def r(k: int) -> int:
        return k if k < shift else rho[k - shift] + shift

    if isinstance(phi, Member):
        out = Member(r(phi.i), r(phi.j))
    elif isinstance(phi, Equal):
        out = Equal(r(phi.i), r(phi.j))
    elif isinstance(phi, ForcesEq):
        out = ForcesEq(r(phi.p), r(phi.i), r(phi.j))
    elif isinstance(phi, ForcesMem):
        out = ForcesMem(r(phi.p), r(phi.i), r(phi.j))
    elif isinstance(phi, Nand):
        lhs = _rename(phi.lhs, rho, shift, memo)
        rhs = lhs if phi.rhs is phi.lhs else _rename(phi.rhs, rho, shift, memo)
        out = Nand(lhs, rhs)
    elif isinstance(phi, Forall):
        out = Forall(_rename(phi.body, rho, shift + 1, memo))
    else:
        raise TypeError(f"not a formula: {phi!r}")
    memo[key] = (phi, out)  # holding phi keeps its id from being reused
    return out


# -- derived connectives ----------------------------------------------------

def neg(phi: Formula) -> Formula:
    return Nand(phi, phi)


def and_(phi: Formula, psi: Formula) -> Formula:
    return neg(Nand(phi, psi))


def or_(phi: Formula, psi: Formula) -> Formula:
    return Nand(neg(phi), neg(psi))


def implies(phi: Formula, psi: Formula) -> Formula:
    return Nand(phi, neg(psi))


def iff_(phi: Formula, psi: Formula) -> Formula:
    return and_(implies(phi, psi), implies(psi, phi))


def exists(phi: Formula) -> Formula:
    return neg(Forall(neg(phi)))


# -- library of internal formulas --------------------------------------------

def upair_fm(x: int, y: int, z: int) -> Formula:
    """``env[z] = {env[x], env[y]}``.

    Same shape as Isabelle/ZF's ``upair_fm``: both listed elements belong to
    ``z`` and every member of ``z`` equals one of them.
    """
    return and_(
        Member(x, z),
        and_(
            Member(y, z),
            Forall(implies(Member(0, z + 1), or_(Equal(0, x + 1), Equal(0, y + 1)))),
        ),
    )


def pair_fm(x: int, y: int, z: int) -> Formula:
    """``env[z] = <env[x], env[y]>`` (Kuratowski), via two auxiliary pairs."""
    return exists(exists(and_(
        upair_fm(x + 2, x + 2, 1),
        and_(upair_fm(x + 2, y + 2, 0), upair_fm(1, 0, z + 2)),
    )))


def _extensionality() -> Formula:
    # ∀x ∀y. (∀z. z∈x ↔ z∈y) → x = y      env inside: [z, y, x]
    return Forall(Forall(implies(
        Forall(iff_(Member(0, 2), Member(0, 1))),
        Equal(1, 0),
    )))


def _foundation() -> Formula:
    # ∀x. (∃y. y∈x) → ∃y. y∈x ∧ ∀z. z∈y → ¬ z∈x
    return Forall(implies(
        exists(Member(0, 1)),
        exists(and_(Member(0, 1), Forall(implies(Member(0, 1), neg(Member(0, 2)))))),
    ))


def _pairing() -> Formula:
    return Forall(Forall(exists(upair_fm(2, 1, 0))))


def _union() -> Formula:
    # ∀x ∃u ∀y. y∈u ↔ ∃z. z∈x ∧ y∈z       env at y: [y, u, x]; at z: [z, y, u, x]
    return Forall(exists(Forall(iff_(
        Member(0, 1),
        exists(and_(Member(0, 3), Member(1, 0))),
    ))))


ZF_AXIOMS: dict[str, Callable[[], Formula]] = {
    "extensionality": _extensionality,
    "foundation": _foundation,
    "pairing": _pairing,
    "union": _union,
}


def zf_axiom(name: str) -> Formula:
    try:
        return ZF_AXIOMS[name]()
    except KeyError:
        raise KeyError(f"unknown axiom {name!r}; expected one of {sorted(ZF_AXIOMS)}") from None


# -- satisfaction -----------------------------------------------------------

class SatsError(ValueError):
    pass


@functools.lru_cache(maxsize=None)
def _guards(phi: Formula, v: int = 0) -> tuple[frozenset, frozenset]:
    """Indices ``k`` such that ``phi`` is true (resp. false) whenever
    ``env[v]`` is not a member of ``env[k]``.

    A purely syntactic under-approximation, used to restrict a quantifier to
    the members of one environment entry without changing its value.  The
    step through ``Forall`` for the "false" side assumes a nonempty carrier,
    which holds whenever an enclosing quantifier is being iterated.
    """
    cls = phi.__class__
    if cls is Member:
        if phi.i == v and phi.j != v:
            return frozenset(), frozenset((phi.j,))
        return frozenset(), frozenset()
    if cls is Nand:
        ta, fa = _guards(phi.lhs, v)
        if phi.rhs is phi.lhs:
            return fa, ta
        tb, fb = _guards(phi.rhs, v)
        return fa | fb, ta & tb
    if cls is Forall:
        tb, fb = _guards(phi.body, v + 1)
        return (frozenset(k - 1 for k in tb if k > 0),
                frozenset(k - 1 for k in fb if k > 0))
    return frozenset(), frozenset()


AtomHook = Callable[[type, HfSet, HfSet, HfSet], bool]


class Satisfier:
    """Tarskian evaluator over a fixed finite carrier.

    Formulas are compiled once into closures over integer codes for the
    carrier, with a memo per quantified subformula keyed on the codes at its
    free indices.  ``extended(cls, p, a, b)`` interprets the forcing atoms;
    without it they are an error.  Memoization and quantifier bounding never
    change results.
    """

    def __init__(self, universe: Iterable[HfSet], extended: Optional[AtomHook] = None):
        self.universe = tuple(sorted(set(universe)))
        self.members = frozenset(self.universe)
        self.extended = extended
        code = self._code = {x: n for n, x in enumerate(self.universe)}
        inside = [tuple(code[y] for y in x if y in code) for x in self.universe]
        self._inside = tuple(frozenset(c) for c in inside)
        self._inside_seq = tuple(inside)
        self._all = tuple(range(len(self.universe)))
        self._compiled: dict = {}
        self._atom_memo: dict = {}

    def clear(self) -> None:
        """Drop compiled formulas and memo tables."""
        self._compiled.clear()
        self._atom_memo.clear()

    def check_env(self, env: Sequence[HfSet], phi: Formula) -> tuple:
        env = tuple(env)
        if len(env) < arity(phi):
            raise SatsError(f"environment of length {len(env)} is shorter than arity {arity(phi)}")
        for k, x in enumerate(env):
            if x not in self.members:
                raise SatsError(f"environment entry {k} = {format_hf(x)} is not in the carrier")
        return env

    def __call__(self, env: Sequence[HfSet], phi: Formula) -> bool:
        env = self.check_env(env, phi)
        code = self._code
        return self.compile(phi)(tuple([code[x] for x in env]))

    def holds_coded(self, phi: Formula, codes: tuple) -> bool:
        """Evaluate on an environment already given as carrier codes."""
        return self.compile(phi)(codes)

    def encode(self, env: Sequence[HfSet]) -> tuple:
        code = self._code
        return tuple([code[x] for x in env])

    def compile(self, phi: Formula):
        fn = self._compiled.get(phi)
        if fn is None:
            fn = self._compiled[phi] = self._build(phi)
        return fn

    def _build(self, phi: Formula):
        cls = phi.__class__
        if cls is Member:
            i, j = phi.i, phi.j
            inside = self._inside
            return lambda env: env[i] in inside[env[j]]
        if cls is Equal:
            i, j = phi.i, phi.j
            return lambda env: env[i] == env[j]
        if cls is ForcesEq or cls is ForcesMem:
            return self._build_atom(phi)
        if cls is Nand:
            fa = self.compile(phi.lhs)
            if phi.rhs is phi.lhs:
                return lambda env: not fa(env)
            fb = self.compile(phi.rhs)
            return lambda env: not (fa(env) and fb(env))
        if cls is Forall:
            # Only quantifiers are memoized; connectives above them are cheap.
            return self._memoized(phi, self._build_forall(phi))
        raise TypeError(f"not a formula: {phi!r}")

    def _memoized(self, phi: Formula, fn):
        slots = sorted(free_indices(phi))
        memo: dict = {}
        if not slots:
            def closed(env):
                hit = memo.get(None)
                if hit is None:
                    hit = memo[None] = fn(env)
                return hit
            return closed
        key_of = operator.itemgetter(*slots)

        def cached(env):
            key = key_of(env)
            hit = memo.get(key)
            if hit is None:
                hit = memo[key] = fn(env)
            return hit
        return cached

    def _build_forall(self, phi: Forall):
        body = self.compile(phi.body)
        bounds = sorted(_guards(phi.body)[0])
        if not bounds:
            everything = self._all

            def forall(env):
                for x in everything:
                    if not body((x,) + env):
                        return False
                return True
            return forall
        seq = self._inside_seq
        ks = [k - 1 for k in bounds]
        if len(ks) == 1:
            (k,) = ks

            def bounded(env):
                # The body can only fail at members of env[k].
                for x in seq[env[k]]:
                    if not body((x,) + env):
                        return False
                return True
            return bounded

        def bounded_min(env):
            dom = min((seq[env[k]] for k in ks), key=len)
            for x in dom:
                if not body((x,) + env):
                    return False
            return True
        return bounded_min

    def _build_atom(self, phi: Formula):
        hook = self.extended
        if hook is None:
            raise SatsError(f"forcing atom {phi!r} needs a forcing context")
        cls = phi.__class__
        p, i, j = phi.p, phi.i, phi.j
        U = self.universe
        memo = self._atom_memo.setdefault(cls, {})

        def atom(env):
            key = (env[p], env[i], env[j])
            hit = memo.get(key)
            if hit is None:
                hit = memo[key] = hook(cls, U[key[0]], U[key[1]], U[key[2]])
            return hit
        return atom


class BatchSatisfier:
    """Evaluate one formula at many environments at once.

    Environments are given column-wise as integer arrays of carrier codes
    (``columns[k][r]`` is entry ``k`` of row ``r``).  The semantics is the
    one of :class:`Satisfier`; a quantifier is evaluated by expanding
    every row with every candidate value, after collapsing rows that agree
    on its free indices.  ``tables`` maps ``ForcesEq``/``ForcesMem`` to
    boolean arrays indexed by the codes of ``(p, a, b)``.
    """

    def __init__(self, universe: Iterable[HfSet], tables: Optional[Mapping[type, "object"]] = None):
        import numpy as np

        self.np = np
        self.universe = tuple(sorted(set(universe)))
        n = self.n = len(self.universe)
        code = self._code = {x: k for k, x in enumerate(self.universe)}
        self.member = np.zeros((max(n, 1), max(n, 1)), dtype=bool)
        for b, y in enumerate(self.universe):
            for x in y:
                a = code.get(x)
                if a is not None:
                    self.member[a, b] = True
        self._inside = [np.flatnonzero(self.member[:, b]) for b in range(n)]
        self.all_codes = np.arange(n, dtype=np.int64)
        self.tables = dict(tables or {})

    def encode(self, envs: Sequence[Sequence[HfSet]], width: int) -> list:
        """Stack ``envs`` (each of length at least ``width``) into columns."""
        np = self.np
        code = self._code
        rows = np.array([[code[x] for x in env[:width]] for env in envs],
                        dtype=np.int64).reshape(len(envs), width)
        return [rows[:, k] for k in range(width)]

    def holds(self, phi: Formula, columns: Sequence, rows: Optional[int] = None):
        """Boolean array with the truth value of ``phi`` at every row."""
        columns = list(columns)
        if rows is None:
            rows = len(columns[0]) if columns else 1
        need = free_indices(phi)
        if need and max(need) >= len(columns):
            raise SatsError(f"environment of length {len(columns)} is shorter than arity {arity(phi)}")
        return self._eval(phi, columns, rows)

    def _eval(self, phi: Formula, cols: list, rows: int):
        np = self.np
        cls = phi.__class__
        if cls is Member:
            return self.member[cols[phi.i], cols[phi.j]]
        if cls is Equal:
            return cols[phi.i] == cols[phi.j]
        if cls is ForcesEq or cls is ForcesMem:
            table = self.tables.get(cls)
            if table is None:
                raise SatsError(f"forcing atom {phi!r} needs a forcing context")
            return table[cols[phi.p], cols[phi.i], cols[phi.j]]
        if cls is Nand:
            a = self._eval(phi.lhs, cols, rows)
            if phi.rhs is phi.lhs:
                return ~a
            if not a.any():
                return np.ones(rows, dtype=bool)
            if a.all():
                return ~self._eval(phi.rhs, cols, rows)
            idx = np.flatnonzero(a)
            sub = [c[idx] if c is not None else None for c in cols]
            out = np.ones(rows, dtype=bool)
            out[idx] = ~self._eval(phi.rhs, sub, len(idx))
            return out
        if cls is Forall:
            return self._forall(phi, cols, rows)
        raise TypeError(f"not a formula: {phi!r}")

    def _distinct(self, phi: Formula, cols: list, rows: int):
        """Rows of ``cols`` restricted to the free indices of ``phi``, deduplicated.

        Returns ``(reduced columns, count, inverse)`` with ``inverse`` mapping
        each original row to its representative, or ``None`` when no row repeats.
        """
        np = self.np
        free = sorted(free_indices(phi))
        if rows < 2:
            return None
        if not free:
            keep = np.zeros(1, dtype=np.int64)
            inverse = np.zeros(rows, dtype=np.int64)
        else:
            base = max(self.n, 1)
            if base ** len(free) < (1 << 62):
                key = cols[free[0]].astype(np.int64)
                for k in free[1:]:
                    key = key * base + cols[k]
                _, keep, inverse = np.unique(key, return_index=True, return_inverse=True)
            else:
                stacked = np.stack([cols[k] for k in free], axis=1)
                _, keep, inverse = np.unique(stacked, axis=0, return_index=True, return_inverse=True)
            if len(keep) == rows:
                return None
        reduced = [None] * len(cols)
        for k in free:
            reduced[k] = cols[k][keep]
        return reduced, len(keep), inverse.reshape(-1)

    def _forall(self, phi: Forall, cols: list, rows: int):
        np = self.np
        collapsed = self._distinct(phi, cols, rows)
        if collapsed is not None:
            reduced, count, inverse = collapsed
            return self._forall_rows(phi, reduced, count)[inverse]
        return self._forall_rows(phi, cols, rows)

    def _forall_rows(self, phi: Forall, cols: list, rows: int):
        np = self.np
        body = phi.body
        bounds = sorted(_guards(body)[0])
        mask_col = None
        if bounds:
            # Candidates: members of the bounding entry in some row; the body
            # holds outside each row's own bound, which the mask accounts for.
            best = None
            for k in bounds:
                vals = np.unique(cols[k - 1])
                cand = np.unique(np.concatenate([self._inside[v] for v in vals])) if len(vals) else vals
                if best is None or len(cand) < len(best[1]):
                    best = (k - 1, cand)
            mask_col, xs = best
        else:
            xs = self.all_codes
        m = len(xs)
        if m == 0 or rows == 0:
            return np.ones(rows, dtype=bool)
        need = free_indices(body)
        inner = [None] * (len(cols) + 1)
        inner[0] = np.tile(xs, rows)
        for k in need:
            if k > 0:
                inner[k] = np.repeat(cols[k - 1], m)
        vals = self._eval(body, inner, rows * m).reshape(rows, m)
        if mask_col is not None:
            vals |= ~self.member[xs[None, :], cols[mask_col][:, None]]
        return vals.all(axis=1)


def sats(M: Iterable[HfSet], env: Sequence[HfSet], phi: Formula) -> bool:
    """``M, env ⊨ phi`` for a finite carrier ``M``."""
    return Satisfier(M)(env, phi)


# -- s-expression syntax ----------------------------------------------------

class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _sexpr_tokens(text: str) -> list[tuple[str, int]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            toks.append((c, i))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            toks.append((text[i:j], i))
            i = j
    return toks


_BINARY_SUGAR = {"And": and_, "Or": or_, "Implies": implies, "Iff": iff_}
_UNARY_SUGAR = {"Neg": neg, "Exists": exists}
_ATOMS = {"Member": (Member, 2), "Equal": (Equal, 2), "ForcesEq": (ForcesEq, 3), "ForcesMem": (ForcesMem, 3)}


class _SexprParser:
    def __init__(self, text: str):
        self.toks = _sexpr_tokens(text)
        self.i = 0
        self.end = len(text)

    def take(self) -> tuple[str, int]:
        if self.i >= len(self.toks):
            raise FormulaSyntaxError("unexpected end of input", self.end)
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, what: str):
        tok, pos = self.take()
        if tok != what:
            raise FormulaSyntaxError(f"expected {what!r}, got {tok!r}", pos)

    def index(self) -> int:
        tok, pos = self.take()
        if not tok.isdigit() or not tok.isascii():
            raise FormulaSyntaxError(f"index must be a natural number, got {tok!r}", pos)
        return int(tok)

    def formula(self) -> Formula:
        self.expect("(")
        head, pos = self.take()
        if head in _ATOMS:
            cls, n = _ATOMS[head]
            out = cls(*(self.index() for _ in range(n)))
        elif head == "Nand":
            out = Nand(self.formula(), self.formula())
        elif head == "Forall":
            out = Forall(self.formula())
        elif head in _BINARY_SUGAR:
            out = _BINARY_SUGAR[head](self.formula(), self.formula())
        elif head in _UNARY_SUGAR:
            out = _UNARY_SUGAR[head](self.formula())
        else:
            raise FormulaSyntaxError(f"unknown constructor {head!r}", pos)
        self.expect(")")
        return out


def parse(text: str) -> Formula:
    """Parse the s-expression syntax; sugar is expanded to Nand/Forall."""
    p = _SexprParser(text)
    phi = p.formula()
    if p.i != len(p.toks):
        tok, pos = p.toks[p.i]
        raise FormulaSyntaxError(f"unexpected {tok!r} after formula", pos)
    return phi


def to_sexpr(phi: Formula) -> str:
    """Canonical s-expression over the primitive basis."""
    if isinstance(phi, Member):
        return f"(Member {phi.i} {phi.j})"
    if isinstance(phi, Equal):
        return f"(Equal {phi.i} {phi.j})"
    if isinstance(phi, ForcesEq):
        return f"(ForcesEq {phi.p} {phi.i} {phi.j})"
    if isinstance(phi, ForcesMem):
        return f"(ForcesMem {phi.p} {phi.i} {phi.j})"
    if isinstance(phi, Nand):
        return f"(Nand {to_sexpr(phi.lhs)} {to_sexpr(phi.rhs)})"
    if isinstance(phi, Forall):
        return f"(Forall {to_sexpr(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")
