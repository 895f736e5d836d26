import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hfforcing.forces import (
    FTuple, MUTANTS, AtomicForcing, atom_tables, call_graph, forces_eq, forces_holds,
    forces_holds_batch, forces_mem, forces_transform, frecR, leq_fm, predecessors, sats_x,
)
from hfforcing.formula import (
    Equal, ForcesEq, ForcesMem, Forall, Member, Nand, Satisfier, SatsError, free_indices, neg,
    rename,
)
from hfforcing.harness import mt_forces, pure_formulas
from hfforcing.hfset import EMPTY, make_set, opair, ordinal
from hfforcing.names import check
from hfforcing.posets import PosetError

E = EMPTY
ONE, A, B = EMPTY, ordinal(1), make_set([ordinal(1)])
TAU1 = make_set([opair(E, ONE)])       # {<0, 1>} with 1 = 0
TAU_A = make_set([opair(E, A)])


def test_transform_atoms():
    assert forces_transform(Member(0, 1)) == ForcesMem(0, 4, 5)
    assert forces_transform(Equal(1, 0)) == ForcesEq(0, 5, 4)


def test_transform_forall_moves_bound_variable_to_head():
    # the bound variable is read at index 0, the old env[0] sits after the prefix
    assert forces_transform(Forall(Member(0, 1))) == Forall(ForcesMem(1, 0, 5))
    assert forces_transform(Forall(Equal(1, 0))) == Forall(ForcesEq(1, 5, 0))


def test_transform_nand_shape():
    phi = forces_transform(Nand(Member(0, 1), Member(1, 0)))
    assert isinstance(phi, Forall) and isinstance(phi.body, Nand)
    assert phi.body.lhs == Member(0, 2)
    assert free_indices(phi) == {0, 1, 2, 4, 5}


def test_transform_rejects_forcing_atoms():
    with pytest.raises(TypeError):
        forces_transform(ForcesMem(0, 1, 2))


def test_leq_fm(chain3):
    S = Satisfier(chain3.M)
    P = chain3.poset
    for q, p in itertools.product(P.carrier, repeat=2):
        assert S([q, p, chain3.leq], leq_fm(0, 1, 2)) == P.leq(q, p)


def test_forces_eq_examples(trivial, vposet):
    for ctx in (trivial, vposet):
        for p in ctx.poset.carrier:
            for tau in ctx.names(3):
                assert forces_eq(ctx, p, tau, tau)
            assert forces_eq(ctx, p, E, E)
    assert not forces_eq(trivial, ONE, E, TAU1)


def test_forces_mem_examples(trivial, vposet):
    for ctx in (trivial, vposet):
        for p in ctx.poset.carrier:
            for tau in ctx.names(2):
                assert not forces_mem(ctx, p, tau, E)
    assert forces_mem(trivial, ONE, E, TAU1)
    assert not forces_mem(vposet, ONE, E, TAU_A)
    assert forces_mem(vposet, A, E, TAU_A)
    assert not forces_mem(vposet, B, E, TAU_A)


def test_condition_outside_carrier(vposet):
    with pytest.raises(PosetError):
        forces_eq(vposet, ordinal(2), E, E)
    with pytest.raises(PosetError):
        forces_holds(vposet, ordinal(2), Equal(0, 0), [E])
    # inside a formula a non-condition in the p slot makes the atom false
    assert not sats_x(vposet, [ordinal(2), E, E], ForcesEq(0, 1, 2))


def test_forces_holds_examples(trivial, vposet):
    assert forces_holds(trivial, ONE, Equal(0, 0), [E])
    assert forces_holds(trivial, ONE, Member(0, 1), [E, TAU1])
    assert forces_holds(vposet, A, Member(0, 1), [E, TAU_A])
    assert not forces_holds(vposet, ONE, Member(0, 1), [E, TAU_A])
    assert forces_holds(vposet, ONE, neg(neg(Equal(0, 0))), [TAU_A])
    with pytest.raises(SatsError):
        forces_holds(vposet, ONE, Member(0, 1), [E])


def test_mt_forces_examples(trivial, vposet):
    assert mt_forces(trivial, ONE, Equal(0, 0), [TAU1])
    assert mt_forces(trivial, ONE, Member(0, 1), [check(E), check(make_set([E]))])
    assert mt_forces(vposet, A, Member(0, 1), [E, TAU_A])
    assert not mt_forces(vposet, ONE, Member(0, 1), [E, TAU_A])


def test_frecR():
    tau = make_set([opair(E, ONE), opair(A, ONE)])
    theta = make_set([opair(A, A)])
    a = FTuple("mem", E, tau, ONE)
    b = FTuple("eq", tau, theta, A)
    assert frecR(a, b)
    assert not frecR(b, b)
    assert frecR(FTuple("eq", E, A, ONE), FTuple("mem", E, theta, ONE))
    assert not frecR(FTuple("eq", E, E, ONE), FTuple("mem", E, theta, ONE))
    for c in predecessors(b, [ONE, A]):
        assert frecR(c, b)


def test_call_graph(vposet):
    roots = [FTuple(f, s, t, p) for f in ("eq", "mem") for s in vposet.names(3)
             for t in vposet.names(3) for p in vposet.poset.carrier]
    g = call_graph(roots, vposet.poset.carrier)
    assert g["acyclic"]
    assert all(d >= 0 for d in g["depth"].values())
    assert g["depth"][FTuple("eq", E, E, ONE)] == 0


def test_atom_tables_match_engine(vposet):
    t = atom_tables(vposet)
    code = {x: k for k, x in enumerate(vposet.M)}
    names = vposet.names(3)
    for p in vposet.M:
        for s, u in itertools.product(names, repeat=2):
            inP = p in vposet.poset
            assert t[ForcesEq][code[p], code[s], code[u]] == (inP and forces_eq(vposet, p, s, u))
            assert t[ForcesMem][code[p], code[s], code[u]] == (inP and forces_mem(vposet, p, s, u))


@pytest.mark.parametrize("phi", pure_formulas(2, 2)[::7])
def test_batch_matches_scalar(vposet, phi):
    envs = list(itertools.product(vposet.names(3), repeat=2))
    got = forces_holds_batch(vposet, phi, envs)
    want = np.array([[forces_holds(vposet, p, phi, e) for p in vposet.poset.carrier] for e in envs])
    assert (got == want).all()


def test_mutants_are_registered():
    assert len(MUTANTS) >= 3
    with pytest.raises(ValueError):
        AtomicForcing(None, "no_such_mutant")


@pytest.mark.parametrize("mutant", sorted(MUTANTS))
def test_each_mutant_changes_some_atom(vposet, chain3, mutant):
    def differs(ctx):
        real, bad = AtomicForcing(ctx), AtomicForcing(ctx, mutant)
        names = ctx.names(4)
        return any(real.eq(p, s, t) != bad.eq(p, s, t) or real.mem(p, s, t) != bad.mem(p, s, t)
                   for p in ctx.poset.carrier for s in names for t in names)
    assert differs(vposet) or differs(chain3)
