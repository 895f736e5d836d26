import json

import pytest

from hfforcing.formula import (Equal, Forall, Member, arity, depth, exists, is_pure, parse,
                               zf_axiom)
from hfforcing.harness import (
    CURATED, Battery, EventuallyPeriodic, Report, check_atomic_symmetry, check_axioms_mg,
    check_characterizations, check_definition_of_forcing, check_density, check_extension,
    check_frecR, check_IV240a, check_mutants, check_ordinals_and_rank, check_strengthening,
    check_truth, context_from_spec, make_battery, proper_extension_demo, pure_formulas,
    reports_to_json, run_suites, shape_formulas,
)
from hfforcing.hfset import EMPTY, format_hf, make_set, opair, ordinal
from hfforcing.names import check
from hfforcing.posets import DensityBoundExceeded

ONE, A = EMPTY, ordinal(1)


def small(ctx, **kw):
    opts = dict(depth=2, arity=2, exhaustive=((2, 2),), name_rank=3, variants=1, curated=False)
    opts.update(kw)
    return make_battery(ctx, **opts)


# -- batteries ------------------------------------------------------------------

def test_pure_formulas_counts():
    # atoms over n indices: 2 n^2; the depth-2 layer adds Forall and all Nand pairs
    assert len(pure_formulas(1, 2)) == 8
    assert len(pure_formulas(2, 1)) == 2 + 8 + 4
    assert all(arity(f) <= 2 and depth(f) <= 2 for f in pure_formulas(2, 2))


def test_shape_formulas_respect_caps():
    fs = shape_formulas(4, 3, variants=2)
    assert fs and all(arity(f) <= 3 and depth(f) <= 4 for f in fs)
    assert any(depth(f) == 4 for f in fs)


def test_default_battery(vposet):
    b = make_battery(vposet)
    d = b.describe()
    assert d["depth"] == 4 and d["arity"] == 3 and d["name_rank"] == 4
    assert all(is_pure(f) and arity(f) <= 3 and depth(f) <= 4 for f in b.formulas
               if f not in CURATED)
    assert set(pure_formulas(3, 2)) <= set(b.formulas)
    assert set(pure_formulas(2, 3)) <= set(b.formulas)
    assert b.conditions == vposet.poset.carrier
    for phi in b.formulas[:50]:
        assert all(len(env) == arity(phi) for env in b.envs(phi))


# -- reports --------------------------------------------------------------------

def test_report_json_is_stable():
    r = Report("demo", "ctx", checked=3)
    r.fail({"p": "0"}, True, False)
    r.elapsed = 1.5
    a = json.dumps(reports_to_json([r])["reports"], sort_keys=True)
    r.elapsed = 9.0
    assert json.dumps(reports_to_json([r])["reports"], sort_keys=True) == a
    assert not r.passed and "FAIL demo [ctx]" in r.to_text()


def test_report_caps_stored_failures():
    r = Report("demo", "ctx", max_failures=2)
    for k in range(5):
        r.fail({"k": k}, 0, 1)
    assert len(r.failures) == 2 and r.to_json()["failure_count"] == 5


# -- suites on small batteries --------------------------------------------------

@pytest.mark.parametrize("check", [check_definition_of_forcing, check_density,
                                   check_strengthening, check_truth, check_characterizations])
def test_battery_suites_pass(shipped, check):
    r = check(shipped, small(shipped))
    assert r.passed, r.to_text()
    assert r.checked > 0


def test_mutant_yields_replayable_counterexample(vposet):
    from hfforcing.forces import forces_holds
    from hfforcing.harness import mt_forces
    from hfforcing.hfset import parse_hf, parse_hf_list
    r = check_definition_of_forcing(vposet, small(vposet, name_rank=4), mutant="drop_q_leq_r")
    assert not r.passed
    f = r.failures[0]
    phi, env, p = parse(f["inputs"]["formula"]), parse_hf_list(f["inputs"]["env"]), parse_hf(f["inputs"]["p"])
    assert forces_holds(vposet, p, phi, env, "drop_q_leq_r") == f["got"]
    assert mt_forces(vposet, p, phi, env) == f["expected"] == forces_holds(vposet, p, phi, env)


def test_truth_lemma_example(vposet):
    from hfforcing.forces import forces_holds
    from hfforcing.formula import sats
    tau = make_set([opair(EMPTY, A)])
    env = [check(EMPTY), tau]
    for G, want in ((frozenset({ONE, A}), True), (frozenset({ONE, make_set([A])}), False)):
        v = vposet.valuation(G)
        lhs = any(forces_holds(vposet, p, Member(0, 1), env) for p in G)
        rhs = sats(vposet.extension(G), [v(x) for x in env], Member(0, 1))
        assert lhs == rhs == want


@pytest.mark.parametrize("check", [check_atomic_symmetry, check_IV240a, check_ordinals_and_rank,
                                   check_extension, check_axioms_mg, check_frecR])
def test_structural_suites_pass(shipped, check):
    r = check(shipped)
    assert r.passed, r.to_text()


def test_extension_info(vposet):
    r = check_extension(vposet)
    assert r.info["gdot_in_M"] is True
    assert r.info["check_closed"] is False
    assert r.info["M_subset_MG"] is False


def test_axioms_reported_not_failed(trivial):
    r = check_axioms_mg(trivial)
    assert r.passed
    assert r.info["verdicts"]["pairing"] == [False]
    assert r.info["verdicts"]["extensionality"] == [True]


def test_axioms_accept_closed_formulas(trivial):
    r = check_axioms_mg(trivial, [exists(Equal(0, 0))])
    assert r.passed
    with pytest.raises(ValueError):
        check_axioms_mg(trivial, [Member(0, 0)])


def test_frecR_records_depth(chain3):
    r = check_frecR(chain3)
    assert r.passed and r.info["max_depth"] >= 1


def test_mutants_caught_somewhere(vposet, chain3):
    caught = {}
    for ctx in (vposet, chain3):
        r = check_mutants(ctx, small(ctx, name_rank=4))
        for m, hit in r.info["caught"].items():
            caught[m] = caught.get(m, False) or hit
    assert all(caught.values()), caught


def test_run_suites_all(trivial):
    rs = run_suites(trivial, ["all"], small(trivial))
    assert [r.suite for r in rs][:5] == ["definition_of_forcing", "density", "strengthening",
                                        "truth", "characterizations"]
    assert all(r.passed for r in rs)
    with pytest.raises(KeyError):
        run_suites(trivial, ["nope"], small(trivial))


# -- proper extension -------------------------------------------------------------

def test_eventually_periodic():
    h = EventuallyPeriodic.parse("01(10)")
    assert [h(k) for k in range(6)] == [0, 1, 1, 0, 1, 0]
    assert str(h) == "01(10)"
    for bad in ("01", "0()", "2(0)"):
        with pytest.raises(ValueError):
            EventuallyPeriodic.parse(bad)


def test_proper_extension_plain():
    r = proper_extension_demo(50)
    assert r.passed and r.info["decided_prefix"] >= 50


def test_proper_extension_avoids_ground_reals():
    zeros, alt = EventuallyPeriodic.parse("(0)"), EventuallyPeriodic.parse("(01)")
    r = proper_extension_demo(10, [zeros, alt])
    assert r.passed
    prefix = r.info["generic_prefix"]
    assert "1" in prefix
    for h in (zeros, alt):
        c = r.info["conflicts"][str(h)]
        assert int(prefix[c["position"]]) != h(c["position"])
        assert any(int(b) != h(k) for k, b in enumerate(c["condition"]))


def test_proper_extension_bound():
    with pytest.raises(DensityBoundExceeded):
        proper_extension_demo(5, [EventuallyPeriodic.parse("(0)")], bound=2)


# -- context specs ------------------------------------------------------------------

def test_context_from_spec():
    ctx = context_from_spec({"seed": "vset:2", "poset": "chain:2", "rank_cap": 6, "name": "c2"})
    assert ctx.name == "c2" and len(ctx.poset) == 2
    assert context_from_spec("trivial") is context_from_spec("trivial")
    with pytest.raises(ValueError):
        context_from_spec({"poset": "cohen"})
    with pytest.raises(ValueError):
        context_from_spec({"regime": "countable", "poset": "cohen"})
    with pytest.raises(KeyError):
        context_from_spec("nope")
