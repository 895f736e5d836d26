import pytest
from hypothesis import given, settings, strategies as st

from hfforcing.hfset import EMPTY, is_transitive, make_set, opair, ordinal, rank, vset
from hfforcing.names import (
    ContextError, ForcingContext, Valuation, check, closure_diagnostics, ed, gdot,
    generic_extension, name_closure, opair_name, upair_name, val,
)
from hfforcing.posets import trivial_poset, v_poset

E = EMPTY
ONE, A, B = EMPTY, ordinal(1), make_set([ordinal(1)])


def hf_sets():
    return st.recursive(st.just(E), lambda kids: st.lists(kids, max_size=3).map(make_set),
                        max_leaves=8)


def test_ed():
    assert ed(E, make_set([opair(E, ONE)]))
    assert not ed(E, E)
    assert not ed(make_set([E]), make_set([opair(E, ONE)]))


def test_val_basics():
    G = frozenset({ONE, A})
    assert val(G, E) is E
    assert val(G, make_set([opair(E, A)])) is make_set([E])
    assert val(G, make_set([opair(E, B)])) is E
    tau = make_set([opair(make_set([opair(E, B)]), ONE)])
    assert val(G, tau) is make_set([E])


def test_val_ignores_non_pairs():
    assert val(frozenset({ONE}), make_set([E, opair(E, ONE)])) is make_set([E])


def test_check():
    assert check(E) is E
    assert check(make_set([E]), ONE) is make_set([opair(E, ONE)])
    for x in vset(3).children:
        assert val(frozenset({ONE}), check(x)) is x


@settings(max_examples=100, deadline=None)
@given(hf_sets())
def test_check_roundtrip_and_rank(x):
    G = frozenset({ONE, A})
    assert val(G, check(x)) is x
    assert rank(val(G, x)) <= rank(x)


def test_gdot():
    assert val(frozenset({ONE}), gdot(trivial_poset())) is make_set([ONE])
    G = frozenset({ONE, A})
    assert val(G, gdot(v_poset())) is make_set(G)


def test_pair_names():
    G = frozenset({ONE})
    assert val(G, opair_name(check(E), check(make_set([E])))) is opair(E, make_set([E]))
    assert val(G, upair_name(check(E), check(E))) is make_set([E])


def test_valuation_memo_is_per_filter():
    tau = make_set([opair(E, A)])
    va, vb = Valuation(frozenset({ONE, A})), Valuation(frozenset({ONE, B}))
    assert va(tau) is make_set([E]) and vb(tau) is E


def test_context_validation():
    with pytest.raises(ContextError):
        ForcingContext([make_set([E])], trivial_poset())
    with pytest.raises(ContextError):
        ForcingContext([E], v_poset())


def test_name_closure_and_diagnostics():
    ctx = name_closure(vset(2).children, v_poset(), 9, name="small")
    assert is_transitive(ctx.M_set)
    d = closure_diagnostics(ctx)
    assert d["transitive"] and d["gdot_in_M"] and d["seed_checks_in_M"] and d["subsets_of_P_in_M"]
    assert d["check_closed"] is False
    assert all(rank(x) <= 9 or x in ctx.seed for x in ctx.M)


def test_generic_extension_contains_seed_and_filter(vposet):
    for G in vposet.generic_filters():
        MG = set(generic_extension(vposet, G))
        assert set(vposet.seed) <= MG
        assert make_set(G) in MG
        assert is_transitive(make_set(MG))
