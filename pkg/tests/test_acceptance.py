"""Acceptance criteria, each run at its stated scale and tolerance.

Every criterion records one PASS/FAIL line; the lines are printed at the end
of the pytest run (see ``conftest.py``) and immediately with ``-s``.
"""

import itertools
import time

import pytest

from hfforcing.formula import Forall, exists, upair_fm, zf_axiom
from hfforcing.forces import MUTANTS
from hfforcing.harness import (
    BATTERY_SUITES, EventuallyPeriodic, check_atomic_symmetry, check_axioms_mg,
    check_extension, check_frecR, check_IV240a, check_mutants, check_ordinals_and_rank,
    make_battery, proper_extension_demo, run_battery, shipped_context,
)
from hfforcing.posets import cohen_poset, incompat, seq_to_hf, seq_upd

CONTEXTS = ("trivial", "vposet", "chain3")
RESULTS: list = []


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)


def summary(reports):
    return ", ".join(f"{r.suite}@{r.context} {len(r.failures) + r.dropped}/{r.checked}"
                     for r in reports)


@pytest.fixture(scope="module")
def sweep():
    """The full default battery on the three shipped contexts, one shared sweep."""
    t0 = time.perf_counter()
    out = {}
    for name in CONTEXTS:
        ctx = shipped_context(name)
        battery = make_battery(ctx)
        out[name] = (ctx, battery, {r.suite: r for r in run_battery(ctx, battery, BATTERY_SUITES)})
    return out, time.perf_counter() - t0


def test_criterion_1_oracle_equivalence(sweep):
    runs, elapsed = sweep
    reports = [runs[n][2]["definition_of_forcing"] for n in CONTEXTS]
    points = sum(r.checked for r in reports)
    ok = all(r.passed for r in reports) and elapsed <= 600
    record(1, ok, f"{points} points, mismatches: {summary(reports)}; {elapsed:.0f} s (limit 600 s)")
    for r in reports:
        assert r.passed, r.to_text()
    assert elapsed <= 600


def test_criterion_2_fundamental_theorems(sweep):
    runs, _ = sweep
    reports = [runs[n][2][s] for n in CONTEXTS for s in ("density", "strengthening", "truth")]
    reports += [check_IV240a(shipped_context(n)) for n in CONTEXTS]
    ok = all(r.passed for r in reports)
    record(2, ok, f"failures: {summary(reports)}")
    for r in reports:
        assert r.passed, r.to_text()


def test_criterion_3_characterizations(sweep):
    runs, _ = sweep
    reports = [runs[n][2]["characterizations"] for n in CONTEXTS]
    reports += [check_atomic_symmetry(shipped_context(n)) for n in CONTEXTS]
    ok = all(r.passed for r in reports)
    record(3, ok, f"failures: {summary(reports)}")
    for r in reports:
        assert r.passed, r.to_text()


def test_criterion_4_frecR_well_founded():
    reports = [check_frecR(shipped_context(n), max_rank=5) for n in CONTEXTS]
    ok = all(r.passed and r.info["acyclic"] for r in reports)
    depths = ", ".join(f"{r.context} roots={r.info['roots']} max_depth={r.info['max_depth']}"
                       for r in reports)
    record(4, ok, f"acyclic; {depths}")
    for r in reports:
        assert r.passed and r.info["acyclic"], r.to_text()


def test_criterion_5_names_and_extension():
    reports = []
    for n in CONTEXTS:
        ctx = shipped_context(n)
        reports += [check_extension(ctx, pair_rank=3), check_ordinals_and_rank(ctx)]
    clauses_ok = all(r.passed for r in reports)
    literal = [(r.context, r.info["M_minus_MG_sizes"]) for r in reports if r.suite == "extension"]
    subset_ok = all(r.info["M_subset_MG"] for r in reports if r.suite == "extension")
    record(5, clauses_ok and subset_ok,
           f"check, rank, ordinal, opair_name and G in M[G] clauses: {summary(reports)}; "
           f"M subset of M[G]: {'holds' if subset_ok else 'does not hold'} "
           f"(elements of M missing from each M[G]: {literal}; "
           "a finite M cannot contain a name for its own top-rank elements)")
    for r in reports:
        assert r.passed, r.to_text()


@pytest.mark.xfail(strict=True, reason="M is finite, so its top-rank elements have no name in M")
def test_criterion_5_literal_ground_model_inclusion():
    for n in CONTEXTS:
        ctx = shipped_context(n)
        for G in ctx.generic_filters():
            MG = set(ctx.extension(G))
            assert set(ctx.M) <= MG, f"{n}: {len(set(ctx.M) - MG)} elements of M not in M[G]"


def test_criterion_6_literal_artifacts():
    pairing = zf_axiom("pairing") == Forall(Forall(exists(upair_fm(2, 1, 0))))
    C = cohen_poset()
    fs = [seq_to_hf(w) for n in range(9) for w in itertools.product((0, 1), repeat=n)]
    separated = all(incompat(C, seq_upd(f, 0), seq_upd(f, 1)) is True for f in fs)
    record(6, pairing and separated,
           f"pairing axiom structure {'matches' if pairing else 'differs'}; "
           f"seq_upd(f,0) incompatible with seq_upd(f,1) for {len(fs)} sequences of length <= 8")
    assert pairing
    assert separated


def test_criterion_7_proper_extension():
    reals = [EventuallyPeriodic.parse(t) for t in ("(0)", "(1)", "(01)", "1(0)", "0011(011)")]
    t0 = time.perf_counter()
    r = proper_extension_demo(50, reals)
    elapsed = time.perf_counter() - t0
    conflicts = r.info["conflicts"]
    ok = (r.passed and r.info["decided_prefix"] >= 50 and len(conflicts) == len(reals)
          and elapsed <= 10)
    record(7, ok, f"decided prefix {r.info['decided_prefix']}, conflicts recorded for "
                  f"{len(conflicts)}/{len(reals)} ground reals, {elapsed:.2f} s (limit 10 s)")
    assert r.passed, r.to_text()
    assert r.info["decided_prefix"] >= 50
    assert set(conflicts) == {str(h) for h in reals}
    assert elapsed <= 10


def test_criterion_8_mutation_sensitivity(sweep):
    runs, _ = sweep
    caught: dict = {m: [] for m in MUTANTS}
    for n in CONTEXTS:
        ctx, battery, _ = runs[n]
        pending = [m for m in MUTANTS if not caught[m]]
        if not pending:
            break
        r = check_mutants(ctx, battery, pending)
        for m, hit in r.info["caught"].items():
            if hit:
                caught[m].append(n)
    missed = [m for m, where in caught.items() if not where]
    record(8, len(MUTANTS) >= 3 and not missed,
           f"{len(MUTANTS)} mutants; first caught on: "
           + ", ".join(f"{m}@{where[0] if where else 'none'}" for m, where in caught.items()))
    assert len(MUTANTS) >= 3
    assert not missed


def test_criterion_9_axioms_in_extensions():
    reports = [check_axioms_mg(shipped_context(n)) for n in CONTEXTS]
    ok = all(r.passed for r in reports)
    verdicts = "; ".join(f"{r.context} {r.info['verdicts']}" for r in reports)
    record(9, ok, f"extensionality and foundation hold, brute-force agreement; {verdicts}")
    for r in reports:
        assert r.passed, r.to_text()
