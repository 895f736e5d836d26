"""Hereditarily finite sets as canonical, interned values.

Every :class:`HfSet` is built through :func:`make_set`, which hash-conses on
the member set.  Two sets are therefore extensionally equal exactly when they
are the same Python object, and the canonical total order is the
lexicographic order on the (recursively sorted) child sequences.
"""

from __future__ import annotations

import functools
import re
from typing import Callable, Iterable, Iterator, Optional, Sequence

__all__ = [
    "HfSet",
    "EMPTY",
    "make_set",
    "mem",
    "subset",
    "is_transitive",
    "rank",
    "transitive_closure",
    "pair",
    "opair",
    "unpair",
    "is_opair",
    "domain",
    "cartprod",
    "union",
    "powerset",
    "ordinal",
    "ordinal_value",
    "is_ordinal",
    "vset",
    "least",
    "parse_hf",
    "parse_hf_list",
    "format_hf",
    "format_hf_list",
    "HfSyntaxError",
]

_HASH_SEED = 0x5F3759DF
_table: dict = {}


@functools.total_ordering
class HfSet:
    """An immutable hereditarily finite set.

    Do not instantiate directly; use :func:`make_set`.
    """

    __slots__ = ("_children", "_members", "_key", "_rank", "_hash")

    def __init__(self, members: frozenset):
        children = tuple(sorted(members, key=_sort_key))
        self._members = members
        self._children = children
        self._key = tuple(c._key for c in children)
        self._rank = 1 + max((c._rank for c in children), default=-1)
        # Deterministic across runs, unlike id()-based hashing.
        self._hash = hash((_HASH_SEED,) + tuple(c._hash for c in children))

    @property
    def children(self) -> tuple[HfSet, ...]:
        return self._children

    def __iter__(self) -> Iterator[HfSet]:
        return iter(self._children)

    def __len__(self) -> int:
        return len(self._children)

    def __contains__(self, x) -> bool:
        return x in self._members

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if isinstance(other, HfSet):
            # Only reachable if interning was bypassed.
            return self._key == other._key
        return NotImplemented

    def __lt__(self, other: HfSet) -> bool:
        if not isinstance(other, HfSet):
            return NotImplemented
        return self._key < other._key

    def __bool__(self) -> bool:
        return bool(self._children)

    def __reduce__(self):
        return (make_set, (self._children,))

    def __repr__(self) -> str:
        return f"HfSet({format_hf(self)})"

    def __str__(self) -> str:
        return format_hf(self)


def _sort_key(x: HfSet):
    return x._key


def make_set(children: Iterable[HfSet] = ()) -> HfSet:
    """Return the canonical set whose members are exactly ``children``."""
    members = frozenset(children)
    found = _table.get(members)
    if found is not None:
        return found
    for c in members:
        if not isinstance(c, HfSet):
            raise TypeError(f"HF set members must be HfSet, got {type(c).__name__}")
    return _table.setdefault(members, HfSet(members))


EMPTY = make_set()


def mem(x: HfSet, y: HfSet) -> bool:
    return x in y._members


def subset(x: HfSet, y: HfSet) -> bool:
    return x._members <= y._members


def is_transitive(x: HfSet) -> bool:
    ms = x._members
    return all(z in ms for y in x._children for z in y._children)


def rank(x: HfSet) -> int:
    return x._rank


@functools.lru_cache(maxsize=None)
def transitive_closure(x: HfSet) -> HfSet:
    """Least transitive set containing every member of ``x``."""
    out = set(x._children)
    for y in x._children:
        out.update(transitive_closure(y)._children)
    return make_set(out)


def pair(x: HfSet, y: HfSet) -> HfSet:
    return make_set((x, y))


def opair(x: HfSet, y: HfSet) -> HfSet:
    """Kuratowski pair ``{{x}, {x, y}}``."""
    return make_set((make_set((x,)), make_set((x, y))))


@functools.lru_cache(maxsize=None)
def unpair(z: HfSet) -> Optional[tuple[HfSet, HfSet]]:
    """Components of a Kuratowski pair, or ``None`` if ``z`` is not one."""
    cs = z._children
    if len(cs) == 1:
        (u,) = cs
        if len(u) == 1:
            return (u._children[0], u._children[0])
        return None
    if len(cs) != 2:
        return None
    u, v = cs
    if len(u) != 1:
        u, v = v, u
    if len(u) != 1 or len(v) != 2:
        return None
    x = u._children[0]
    if x not in v._members:
        return None
    y = v._children[1] if v._children[0] is x else v._children[0]
    return (x, y)


def is_opair(z: HfSet) -> bool:
    return unpair(z) is not None


def domain(r: HfSet) -> HfSet:
    """First components of the members of ``r`` that are pairs; others are skipped."""
    out = []
    for z in r._children:
        ab = unpair(z)
        if ab is not None:
            out.append(ab[0])
    return make_set(out)


def cartprod(a: HfSet, b: HfSet) -> HfSet:
    return make_set(opair(x, y) for x in a for y in b)


def union(x: HfSet) -> HfSet:
    return make_set(z for y in x for z in y)


def powerset(x: HfSet) -> HfSet:
    subsets = [EMPTY]
    for c in x._children:
        subsets += [make_set(s._children + (c,)) for s in subsets]
    return make_set(subsets)


@functools.lru_cache(maxsize=None)
def ordinal(n: int) -> HfSet:
    """The von Neumann ordinal ``n``."""
    if n < 0:
        raise ValueError("ordinals are natural numbers")
    if n == 0:
        return EMPTY
    prev = ordinal(n - 1)
    return make_set(prev._children + (prev,))


def is_ordinal(x: HfSet) -> bool:
    """Transitive and linearly ordered by membership."""
    if not is_transitive(x):
        return False
    cs = x._children
    for i, a in enumerate(cs):
        for b in cs[i + 1:]:
            if not (a in b._members or b in a._members):
                return False
    return True


def ordinal_value(x: HfSet) -> Optional[int]:
    """The natural number ``n`` with ``x == ordinal(n)``, else ``None``."""
    n = x._rank
    return n if ordinal(n) is x else None


@functools.lru_cache(maxsize=None)
def vset(n: int) -> HfSet:
    """The ``n``-th stage of the cumulative hierarchy (``vset(0)`` is empty)."""
    if n < 0:
        raise ValueError("vset stage must be a natural number")
    if n == 0:
        return EMPTY
    return powerset(vset(n - 1))


def least(pred: Callable[[int], bool], bound: int) -> Optional[int]:
    """Smallest ``k < bound`` with ``pred(k)``, or ``None``."""
    for k in range(bound):
        if pred(k):
            return k
    return None


# -- textual notation -------------------------------------------------------

class HfSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    for m in _TOKEN.finditer(text):
        if m.group(1) is not None:
            out.append((m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append((m.group(2), m.start(2)))
        pos = m.end()
    if text[pos:].strip():
        raise HfSyntaxError("unexpected trailing input", pos)
    return out


class _HfParser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0
        self.end = len(text)

    def peek(self) -> tuple[str, int]:
        if self.i < len(self.toks):
            return self.toks[self.i]
        return ("", self.end)

    def take(self, expected: Optional[str] = None) -> tuple[str, int]:
        tok, pos = self.peek()
        if expected is not None and tok != expected:
            raise HfSyntaxError(f"expected {expected!r}, got {tok or 'end of input'!r}", pos)
        if not tok:
            raise HfSyntaxError("unexpected end of input", pos)
        self.i += 1
        return tok, pos

    def value(self) -> HfSet:
        tok, pos = self.take()
        if tok.isdigit():
            return ordinal(int(tok))
        if tok == "{":
            return make_set(self.items("}"))
        if tok == "<":
            items = self.items(">")
            if len(items) != 2:
                raise HfSyntaxError("ordered pair needs exactly two components", pos)
            return opair(*items)
        raise HfSyntaxError(f"unexpected {tok!r}", pos)

    def items(self, close: str) -> list[HfSet]:
        out: list[HfSet] = []
        if self.peek()[0] == close:
            self.take()
            return out
        while True:
            out.append(self.value())
            tok, pos = self.take()
            if tok == close:
                return out
            if tok != ",":
                raise HfSyntaxError(f"expected ',' or {close!r}, got {tok!r}", pos)

    def sequence(self) -> list[HfSet]:
        self.take("[")
        return self.items("]")


def parse_hf(text: str) -> HfSet:
    """Parse ``0``/numerals (von Neumann ordinals), ``{a,b,...}`` and ``<a,b>``."""
    p = _HfParser(text)
    x = p.value()
    tok, pos = p.peek()
    if tok:
        raise HfSyntaxError(f"unexpected {tok!r}", pos)
    return x


def parse_hf_list(text: str) -> list[HfSet]:
    """Parse a bracketed list ``[a, b, ...]`` of HF literals (an environment)."""
    p = _HfParser(text)
    xs = p.sequence()
    tok, pos = p.peek()
    if tok:
        raise HfSyntaxError(f"unexpected {tok!r}", pos)
    return xs


@functools.lru_cache(maxsize=65536)
def format_hf(x: HfSet) -> str:
    """Canonical text: ordinals as numerals, pairs as ``<a,b>``, else braces."""
    n = ordinal_value(x)
    if n is not None:
        return str(n)
    ab = unpair(x)
    if ab is not None:
        return f"<{format_hf(ab[0])},{format_hf(ab[1])}>"
    return "{" + ",".join(format_hf(c) for c in x._children) + "}"


def format_hf_list(xs: Sequence[HfSet]) -> str:
    return "[" + ", ".join(format_hf(x) for x in xs) + "]"
