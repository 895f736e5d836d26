"""P-names, their interpretation by filters, and finite generic extensions."""

from __future__ import annotations

import functools
from typing import Iterable, Optional

from .hfset import (
    EMPTY,
    HfSet,
    domain,
    format_hf,
    is_ordinal,
    is_transitive,
    make_set,
    mem,
    opair,
    powerset,
    rank,
    subset,
    transitive_closure,
    unpair,
    vset,
)
from .posets import FinitePoset, all_generic_filters

__all__ = [
    "ContextError",
    "ForcingContext",
    "ed",
    "val",
    "Valuation",
    "check",
    "gdot",
    "upair_name",
    "opair_name",
    "generic_extension",
    "name_closure",
    "closure_diagnostics",
]


class ContextError(ValueError):
    pass


def ed(x: HfSet, y: HfSet) -> bool:
    """``x`` is in the domain of ``y``: the well-founded order names recurse on."""
    return mem(x, domain(y))


class Valuation:
    """``val(G, -)`` for one filter, memoized by name.

    ``G`` is anything supporting ``p in G``: a frozenset of conditions or a
    :class:`~hfforcing.posets.LazyFilter`.  Members of a name that are not
    pairs, or whose condition is not in ``G``, contribute nothing.
    """

    def __init__(self, G):
        self.G = G
        self._memo: dict[HfSet, HfSet] = {}

    def __call__(self, tau: HfSet) -> HfSet:
        memo = self._memo
        hit = memo.get(tau)
        if hit is not None:
            return hit
        G = self.G
        out = []
        for z in tau:
            ab = unpair(z)
            if ab is not None and ab[1] in G:
                out.append(self(ab[0]))
        v = memo[tau] = make_set(out)
        return v


def val(G, tau: HfSet) -> HfSet:
    return Valuation(G)(tau)


@functools.lru_cache(maxsize=None)
def _check(x: HfSet, one: HfSet) -> HfSet:
    return make_set(opair(_check(y, one), one) for y in x)


def check(x: HfSet, one: HfSet = EMPTY) -> HfSet:
    """The canonical name ``{<check(y), one> : y in x}``."""
    return _check(x, one)


def upair_name(sigma: HfSet, rho: HfSet, one: HfSet = EMPTY) -> HfSet:
    return make_set((opair(sigma, one), opair(rho, one)))


def opair_name(sigma: HfSet, rho: HfSet, one: HfSet = EMPTY) -> HfSet:
    """A name whose value is the Kuratowski pair of the values of ``sigma``, ``rho``."""
    return upair_name(upair_name(sigma, sigma, one), upair_name(sigma, rho, one), one)


def gdot(poset: FinitePoset) -> HfSet:
    """The canonical name ``{<check(p), p> : p in P}`` for the generic filter."""
    return make_set(opair(check(p, poset.one), p) for p in poset.carrier)


class ForcingContext:
    """A finite transitive ground model ``M`` with a forcing notion ``P`` in it.

    Also owns the per-context caches used by the forcing evaluator and by
    :meth:`extension`, so distinct contexts never share memo state.
    """

    def __init__(self, M: Iterable[HfSet], poset: FinitePoset, name: str = "ctx",
                 seed: Optional[Iterable[HfSet]] = None):
        self.name = name
        self.M = tuple(sorted(set(M)))
        self.M_set = make_set(self.M)
        self.poset = poset
        self.seed = tuple(sorted(set(seed))) if seed is not None else self.M
        self._members = frozenset(self.M)
        self.caches: dict = {}
        if not is_transitive(self.M_set):
            raise ContextError("ground model is not transitive")
        for label, x in (("P", poset.carrier_set), ("leq", poset.leq_set), ("one", poset.one)):
            if x not in self._members:
                raise ContextError(f"{label} = {format_hf(x)} is not an element of M")

    def __contains__(self, x) -> bool:
        return x in self._members

    def __repr__(self) -> str:
        return f"ForcingContext({self.name}: |M|={len(self.M)}, P={self.poset.name})"

    @property
    def P(self) -> HfSet:
        return self.poset.carrier_set

    @property
    def leq(self) -> HfSet:
        return self.poset.leq_set

    @property
    def one(self) -> HfSet:
        return self.poset.one

    @property
    def prefix(self) -> tuple[HfSet, HfSet, HfSet]:
        """``(P, leq, one)``: the environment entries that follow ``p``."""
        return (self.poset.carrier_set, self.poset.leq_set, self.poset.one)

    def generic_filters(self) -> list[frozenset]:
        hit = self.caches.get("generic")
        if hit is None:
            hit = self.caches["generic"] = all_generic_filters(self)
        return hit

    def extension(self, G) -> tuple[HfSet, ...]:
        """``M[G]`` as a canonically sorted tuple."""
        G = frozenset(G)
        cache = self.caches.setdefault("extension", {})
        hit = cache.get(G)
        if hit is None:
            hit = cache[G] = generic_extension(self, G)
        return hit

    def valuation(self, G) -> Valuation:
        G = frozenset(G)
        cache = self.caches.setdefault("valuation", {})
        hit = cache.get(G)
        if hit is None:
            hit = cache[G] = Valuation(G)
        return hit

    def names(self, max_rank: Optional[int] = None) -> tuple[HfSet, ...]:
        if max_rank is None:
            return self.M
        return tuple(x for x in self.M if rank(x) <= max_rank)

    def subsets_of_P_in_M(self) -> bool:
        """Every subset of P is an element of M (so M-genericity is full genericity)."""
        return all(s in self._members for s in powerset(self.poset.carrier_set))


def generic_extension(ctx: ForcingContext, G) -> tuple[HfSet, ...]:
    """``{val(G, tau) : tau in M}``."""
    v = ctx.valuation(G) if isinstance(G, (set, frozenset)) else Valuation(G)
    return tuple(sorted({v(tau) for tau in ctx.M}))


def name_closure(seed: Iterable[HfSet], poset: FinitePoset, rank_cap: int,
                 name: str = "ctx", extra_names: Iterable[HfSet] = ()) -> ForcingContext:
    """Build a ground model around ``seed`` that contains the names it needs.

    One pass, since check-closure of a finite set never terminates: start
    from the seed, the poset's encodings and every subset of P; add
    ``check(x)`` for those members, the name for the generic filter, the
    one-pair names ``{<check(x), p>}`` and the pair names ``opair_name`` of
    checks, keeping only names of rank at most ``rank_cap``; finally take the
    transitive closure.
    """
    one = poset.one
    seed = set(seed)
    base = set(seed)
    base.update(poset.carrier)
    base.update((poset.carrier_set, poset.leq_set))
    base.update(powerset(poset.carrier_set))
    base = set(transitive_closure(make_set(base)).children) | base

    names = {check(x, one) for x in base}
    names.add(gdot(poset))
    small = sorted(x for x in seed if rank(x) <= 1)
    for x in small:
        for p in poset.carrier:
            names.add(make_set([opair(check(x, one), p)]))
        for y in small:
            names.add(opair_name(check(x, one), check(y, one), one))
    names.update(extra_names)
    names = {n for n in names if rank(n) <= rank_cap}

    M = base | names
    M = set(transitive_closure(make_set(M)).children) | M
    return ForcingContext(M, poset, name=name, seed=seed)


def closure_diagnostics(ctx: ForcingContext) -> dict:
    """What the finite ground model does and does not contain.

    A finite transitive M with a nonempty member is never closed under
    ``check``, so the check-closure flag is reported, not assumed.
    """
    one = ctx.one
    M = ctx._members
    return {
        "size": len(ctx.M),
        "rank": rank(ctx.M_set),
        "transitive": is_transitive(ctx.M_set),
        "check_closed": all(check(x, one) in M for x in ctx.M),
        "seed_checks_in_M": all(check(x, one) in M for x in ctx.seed),
        "gdot_in_M": gdot(ctx.poset) in M,
        "subsets_of_P_in_M": ctx.subsets_of_P_in_M(),
        "ordinals": [format_hf(x) for x in ctx.M if is_ordinal(x)],
    }
