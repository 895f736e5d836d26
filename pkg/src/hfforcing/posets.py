"""Forcing notions: finite preorders with a top, countable posets, filters,
density, and the Rasiowa-Sikorski chain for countable posets.

Conditions are always :class:`~hfforcing.hfset.HfSet` values.  ``leq(q, p)``
reads "q is stronger than p".
"""

from __future__ import annotations

import enum
import functools
import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .hfset import (
    EMPTY,
    HfSet,
    format_hf,
    make_set,
    opair,
    ordinal,
    ordinal_value,
    subset,
    unpair,
)

__all__ = [
    "PosetError",
    "DensityBoundExceeded",
    "Verdict",
    "FinitePoset",
    "CountablePoset",
    "DenseSet",
    "LazyFilter",
    "compat",
    "incompat",
    "is_filter",
    "is_dense",
    "dense_below",
    "all_generic_filters",
    "filters_meeting",
    "rsl_filter",
    "trivial_poset",
    "v_poset",
    "chain_poset",
    "cohen_poset",
    "seq_to_hf",
    "hf_to_seq",
    "seq_upd",
    "is_separative",
]


class PosetError(ValueError):
    pass


class DensityBoundExceeded(RuntimeError):
    """No witness for a dense set was found within the search bound."""

    def __init__(self, dense_name: str, bound: int, below: HfSet):
        super().__init__(
            f"density bound exceeded: no element of {dense_name} found among the first "
            f"{bound} extensions of {format_hf(below)}"
        )
        self.dense_name = dense_name
        self.bound = bound
        self.below = below


class Verdict(enum.Enum):
    """Outcome of a bounded search over a countable poset."""

    TRUE = "true"
    FALSE = "false"
    UNDECIDED = "undecided within bound"

    def __bool__(self):
        raise TypeError("a Verdict is three-valued; compare it with Verdict.TRUE explicitly")


# -- finite posets ----------------------------------------------------------

class FinitePoset:
    """A finite preorder with a top element, plus its HF encodings."""

    def __init__(self, carrier: Iterable[HfSet], leq: Iterable[tuple[HfSet, HfSet]],
                 one: HfSet, name: str = "poset"):
        self.name = name
        self.carrier = tuple(sorted(set(carrier)))
        self.one = one
        members = frozenset(self.carrier)
        pairs = set(leq)
        for q, p in pairs:
            if q not in members or p not in members:
                raise PosetError(f"leq pair <{format_hf(q)},{format_hf(p)}> leaves the carrier")
        pairs.update((p, p) for p in self.carrier)
        pairs.update((p, one) for p in self.carrier)
        self.leq_pairs = frozenset(_transitive_pairs(pairs))
        if one not in members:
            raise PosetError("top element is not in the carrier")
        self._members = members
        self._below = {p: tuple(q for q in self.carrier if (q, p) in self.leq_pairs)
                       for p in self.carrier}
        self.carrier_set = make_set(self.carrier)
        self.leq_set = make_set(opair(q, p) for q, p in self.leq_pairs)

    def __contains__(self, p) -> bool:
        return p in self._members

    def __len__(self) -> int:
        return len(self.carrier)

    def __repr__(self) -> str:
        return f"FinitePoset({self.name}, {len(self.carrier)} conditions)"

    def require(self, *ps: HfSet) -> None:
        for p in ps:
            if p not in self._members:
                raise PosetError(f"{format_hf(p)} is not a condition of {self.name}")

    def leq(self, q: HfSet, p: HfSet) -> bool:
        return (q, p) in self.leq_pairs

    def below(self, p: HfSet) -> tuple[HfSet, ...]:
        """All ``q <= p``, in canonical order."""
        return self._below[p]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "carrier": [format_hf(p) for p in self.carrier],
            "leq": sorted([format_hf(q), format_hf(p)] for q, p in self.leq_pairs),
            "one": format_hf(self.one),
        }

    @classmethod
    def from_json(cls, data: dict) -> FinitePoset:
        from .hfset import parse_hf

        carrier = [parse_hf(t) for t in data["carrier"]]
        leq = [(parse_hf(q), parse_hf(p)) for q, p in data.get("leq", [])]
        return cls(carrier, leq, parse_hf(data["one"]), name=data.get("name", "poset"))


def _transitive_pairs(pairs: set) -> set:
    out = set(pairs)
    while True:
        extra = {(a, d) for (a, b) in out for (c, d) in out if b is c} - out
        if not extra:
            return out
        out |= extra


def trivial_poset() -> FinitePoset:
    """The one-point forcing ``{1}`` with ``1 = 0``."""
    return FinitePoset([EMPTY], [], EMPTY, name="trivial")


def v_poset() -> FinitePoset:
    """``{1, a, b}`` with ``a, b <= 1`` and ``a`` incompatible with ``b``.

    Encoded as ``1 = 0``, ``a = 1``, ``b = {1}``.
    """
    one, a, b = EMPTY, ordinal(1), make_set([ordinal(1)])
    return FinitePoset([one, a, b], [(a, one), (b, one)], one, name="vposet")


def chain_poset(n: int) -> FinitePoset:
    """Linear order ``0 >= 1 >= ... >= n-1`` on the first ``n`` ordinals (top is 0)."""
    if n < 1:
        raise PosetError("a chain needs at least one element")
    elems = [ordinal(k) for k in range(n)]
    return FinitePoset(elems, [(elems[j], elems[i]) for i in range(n) for j in range(i, n)],
                       EMPTY, name=f"chain{n}")


# -- countable posets -------------------------------------------------------

@dataclass
class CountablePoset:
    """A countable preorder with top, presented by decision procedures.

    ``enumerate`` must hit every condition.  ``below``, when given, yields the
    conditions under ``p`` in enumeration order (a fast path for the naive
    filter over ``enumerate``); ``compat`` decides compatibility exactly;
    ``index`` inverts ``enumerate``.
    """

    contains: Callable[[HfSet], bool]
    leq: Callable[[HfSet, HfSet], bool]
    one: HfSet
    enumerate: Callable[[int], HfSet]
    below: Optional[Callable[[HfSet], Iterator[HfSet]]] = None
    compat: Optional[Callable[[HfSet, HfSet], bool]] = None
    index: Optional[Callable[[HfSet], int]] = None
    name: str = "countable"

    def __contains__(self, p) -> bool:
        return isinstance(p, HfSet) and self.contains(p)

    def require(self, *ps: HfSet) -> None:
        for p in ps:
            if p not in self:
                raise PosetError(f"{format_hf(p)} is not a condition of {self.name}")

    def index_of(self, p: HfSet, bound: int) -> int:
        """Position of ``p`` in the enumeration."""
        if self.index is not None:
            return self.index(p)
        for n in range(bound):
            if self.enumerate(n) is p:
                return n
        raise PosetError(f"{format_hf(p)} is not among the first {bound} enumerated conditions")

    def iter_below(self, p: HfSet) -> Iterator[HfSet]:
        if self.below is not None:
            return self.below(p)
        return (q for q in map(self.enumerate, itertools.count()) if self.leq(q, p))


@dataclass
class DenseSet:
    """A set of conditions given by a membership test."""

    test: Callable[[HfSet], bool]
    name: str = "D"

    def __contains__(self, p) -> bool:
        return self.test(p)


def _as_test(D) -> Callable[[HfSet], bool]:
    if isinstance(D, DenseSet):
        return D.test
    if callable(D):
        return D
    return D.__contains__


def _name_of(D) -> str:
    return D.name if isinstance(D, DenseSet) else getattr(D, "__name__", "D")


# -- order-theoretic predicates -----------------------------------------------

def compat(P, p: HfSet, q: HfSet, bound: int = 1000):
    """Some condition lies below both.  Countable posets without an exact
    ``compat`` answer a :class:`Verdict` from a bounded search."""
    P.require(p, q)
    if isinstance(P, FinitePoset):
        below_q = set(P.below(q))
        return any(r in below_q for r in P.below(p))
    if P.compat is not None:
        return P.compat(p, q)
    for r in itertools.islice(P.iter_below(p), bound):
        if P.leq(r, q):
            return Verdict.TRUE
    return Verdict.UNDECIDED


def incompat(P, p: HfSet, q: HfSet, bound: int = 1000):
    c = compat(P, p, q, bound)
    if isinstance(c, Verdict):
        return Verdict.FALSE if c is Verdict.TRUE else Verdict.UNDECIDED
    return not c


def is_filter(P: FinitePoset, F: Iterable[HfSet]) -> bool:
    """Nonempty, upward closed and downward directed (within ``F``)."""
    F = frozenset(F)
    if not F:
        return False
    P.require(*F)
    for p in F:
        for q in P.carrier:
            if P.leq(p, q) and q not in F:
                return False
    for p in F:
        for q in F:
            if not any(P.leq(r, p) and P.leq(r, q) for r in F):
                return False
    return True


def dense_below(P, D, p: HfSet, probe: int = 64, bound: int = 1000):
    """Every ``q <= p`` has some ``r <= q`` in ``D``.

    On a countable poset only the first ``probe`` conditions below ``p`` are
    tested, each with a ``bound``-limited witness search.
    """
    test = _as_test(D)
    P.require(p)
    if isinstance(P, FinitePoset):
        return all(any(test(r) for r in P.below(q)) for q in P.below(p))
    for q in itertools.islice(P.iter_below(p), probe):
        if not any(test(r) for r in itertools.islice(P.iter_below(q), bound)):
            return Verdict.UNDECIDED
    return Verdict.TRUE


def is_dense(P, D, probe: int = 64, bound: int = 1000):
    return dense_below(P, D, P.one, probe, bound)


def filters_meeting(P: FinitePoset, denses: Sequence[Iterable[HfSet]]) -> list[frozenset]:
    """All filters on ``P`` meeting each of ``denses``, in canonical order."""
    denses = [frozenset(D) for D in denses]
    out = []
    carrier = P.carrier
    for bits in itertools.product((False, True), repeat=len(carrier)):
        F = frozenset(p for p, keep in zip(carrier, bits) if keep)
        if P.one not in F or not is_filter(P, F):
            continue
        if all(F & D for D in denses):
            out.append(F)
    out.sort(key=lambda F: make_set(F))
    return out


def all_generic_filters(ctx) -> list[frozenset]:
    """Filters on ``ctx.poset`` meeting every dense subset of P lying in ``ctx.M``."""
    P = ctx.poset
    denses = [frozenset(D.children) for D in ctx.M
              if subset(D, P.carrier_set) and is_dense(P, D.children)]
    out = filters_meeting(P, denses)
    if not out:
        raise RuntimeError(f"no generic filter found for {P.name}; finite posets always have one")
    return out


# -- Rasiowa-Sikorski ---------------------------------------------------------

class LazyFilter:
    """Upward closure of a descending chain grown by the RS construction.

    After the explicitly met dense sets, the chain continues along a fixed
    schedule: step ``k`` meets ``{q : q <= r_k or q incompatible with r_k}``
    for the ``k``-th enumerated condition ``r_k``.  A membership query for
    ``r`` runs the schedule up to the index of ``r``, so the filter is fixed
    in advance and answers do not depend on the order of queries.  Access is
    serialized with an internal lock.
    """

    def __init__(self, poset: CountablePoset, bound: int):
        self.poset = poset
        self.bound = bound
        self.chain: list[HfSet] = [poset.one]
        self.steps: list[tuple[str, HfSet]] = []
        self._scheduled = 0
        self._decided: dict[HfSet, bool] = {}
        self._lock = threading.RLock()

    @property
    def last(self) -> HfSet:
        return self.chain[-1]

    def meet(self, D, name: Optional[str] = None) -> HfSet:
        """Extend the chain with the first enumerated ``q <= last`` lying in ``D``."""
        test = _as_test(D)
        name = name or _name_of(D)
        with self._lock:
            p = self.chain[-1]
            for q in itertools.islice(self.poset.iter_below(p), self.bound):
                if test(q):
                    if q is not p:
                        self.chain.append(q)
                    self.steps.append((name, q))
                    return q
            raise DensityBoundExceeded(name, self.bound, p)

    def _decides(self, r: HfSet) -> Callable[[HfSet], bool]:
        P = self.poset

        def test(q: HfSet) -> bool:
            if P.leq(q, r):
                return True
            c = compat(P, q, r, self.bound)
            return c is False or c is Verdict.FALSE
        return test

    def __contains__(self, r: HfSet) -> bool:
        P = self.poset
        with self._lock:
            hit = self._decided.get(r)
            if hit is not None:
                return hit
            P.require(r)
            k = P.index_of(r, self.bound)
            while self._scheduled <= k:
                rk = P.enumerate(self._scheduled)
                self.meet(self._decides(rk), name=f"decide({format_hf(rk)})")
                self._scheduled += 1
            self._decided[r] = any(P.leq(p, r) for p in self.chain)
            return self._decided[r]


def rsl_filter(P: CountablePoset, denses: Iterable, bound: int) -> LazyFilter:
    """Run the Rasiowa-Sikorski construction against ``denses`` in order."""
    G = LazyFilter(P, bound)
    for D in denses:
        G.meet(D)
    return G


# -- the Cohen poset ----------------------------------------------------------

_BITS = (ordinal(0), ordinal(1))


def seq_to_hf(bits: Sequence[int]) -> HfSet:
    """Encode a 0/1 sequence as the graph ``{<k, bit_k>}`` over an ordinal."""
    return make_set(opair(ordinal(k), _BITS[b]) for k, b in enumerate(bits))


@functools.lru_cache(maxsize=None)
def hf_to_seq(x: HfSet) -> Optional[tuple[int, ...]]:
    """Decode a Cohen condition, or ``None`` if ``x`` is not one."""
    out: dict[int, int] = {}
    for z in x:
        ab = unpair(z)
        if ab is None:
            return None
        k = ordinal_value(ab[0])
        b = ordinal_value(ab[1])
        if k is None or b not in (0, 1) or k in out:
            return None
        out[k] = b
    if sorted(out) != list(range(len(out))):
        return None
    return tuple(out[k] for k in range(len(out)))


def seq_upd(f: HfSet, x: int) -> HfSet:
    """Append bit ``x`` to the Cohen condition ``f``."""
    bits = hf_to_seq(f)
    if bits is None or x not in (0, 1):
        raise PosetError("seq_upd needs a finite binary sequence and a bit")
    return make_set(f.children + (opair(ordinal(len(bits)), _BITS[x]),))


def _shortlex(n: int) -> tuple[int, ...]:
    # The n-th binary word in shortlex order: n+1 in binary without its leading 1.
    return tuple(int(c) for c in bin(n + 1)[3:])


def cohen_poset() -> CountablePoset:
    """Finite binary sequences ordered by reverse inclusion; top is the empty sequence."""

    def below(p: HfSet) -> Iterator[HfSet]:
        prefix = hf_to_seq(p)
        for n in itertools.count():
            yield seq_to_hf(prefix + _shortlex(n))

    return CountablePoset(
        contains=lambda x: hf_to_seq(x) is not None,
        leq=lambda q, p: subset(p, q),
        one=EMPTY,
        enumerate=lambda n: seq_to_hf(_shortlex(n)),
        below=below,
        compat=lambda p, q: subset(p, q) or subset(q, p),
        index=lambda p: int("1" + "".join(map(str, hf_to_seq(p))), 2) - 1,
        name="cohen",
    )


def is_separative(P, probes: Optional[Iterable[HfSet]] = None, bound: int = 64):
    """Every probed condition has two incompatible extensions.

    Finite posets are checked exhaustively; countable ones over ``probes``
    with the first ``bound`` extensions of each probe as candidates.
    """
    if isinstance(P, FinitePoset):
        probes = P.carrier if probes is None else probes
        return all(
            any(not compat(P, a, b) for a in P.below(p) for b in P.below(p))
            for p in probes
        )
    if probes is None:
        raise PosetError("countable posets need an explicit list of probes")
    for p in probes:
        cands = list(itertools.islice(P.iter_below(p), bound))
        found = False
        for i, a in enumerate(cands):
            for b in cands[i + 1:]:
                if incompat(P, a, b, bound) in (True, Verdict.TRUE):
                    found = True
                    break
            if found:
                break
        if not found:
            return Verdict.UNDECIDED
    return Verdict.TRUE
