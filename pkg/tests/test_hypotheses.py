from dataclasses import replace

import pytest

from kolycheck.curves import LocalReductionData, ReductionClass
from kolycheck.galois import Irreducibility
from kolycheck.hypotheses import (
    ClauseVerdict,
    ExternalInputs,
    HypothesisError,
    Status,
    Verdict,
    all_gates,
    check_heart,
    check_spade,
    gate_bsd,
    gate_parity,
    gate_rank,
    gate_thm_EQ,
    gate_thm_main,
    kappa_order,
    tamagawa_valuation,
)

from synthetic import MUTATIONS, base_bundle, synthetic_tate


def statuses(verdicts):
    return [v.status for v in verdicts]


def spade_bundle(ram):
    return replace(base_bundle(), routing=(35, 13), conductor=5 * 7 * 13, ram_set=frozenset(ram))


def test_spade_worked_example():
    s1, s2, s3 = check_spade(spade_bundle({7}))
    assert statuses([s1, s2, s3]) == [Status.HOLDS] * 3
    assert s3.evidence["exact_n_plus_primes_counted"] == [5, 7]
    assert s3.evidence["count_includes_p"]


def test_spade_empty_ram():
    assert check_spade(spade_bundle(set()))[2].status is Status.FAILS


def test_spade_two_unramified_minus_prime():
    b = replace(base_bundle(), routing=(35, 11 * 13))
    s2 = check_spade(b)[1]
    assert s2.status is Status.FAILS
    assert {"ell": 11, "where": "N-", "ell_mod_p": 1} in s2.evidence["offenders"]


def test_heart_agrees_with_spade():
    for mutate in [lambda b: b] + [m for _, _, m in MUTATIONS.values()]:
        b = mutate(base_bundle())
        if b.p >= 5:
            assert statuses(check_heart(b))[:3] == statuses(check_spade(b))
            assert check_heart(b)[3].status is Status.HOLDS


def test_main_applies_on_base():
    report = gate_thm_main(base_bundle())
    assert report.verdict is Verdict.APPLIES
    assert [c.id for c in report.conclusions] == ["kappa_nonzero", "kappa_inf_nonzero", "M_inf_zero"]


@pytest.mark.parametrize("name", sorted(MUTATIONS))
def test_clause_isolation(name):
    clause, expected, mutate = MUTATIONS[name]
    base = {c.clause_id: c.status for c in gate_thm_main(base_bundle()).clauses}
    report = gate_thm_main(mutate(base_bundle()))
    got = {c.clause_id: c.status for c in report.clauses}
    assert {k for k in got if got[k] != base[k]} == {clause}
    assert got[clause] is expected
    assert report.conclusions == ()


def test_hyp_L_violation_evidence():
    report = gate_thm_main(replace(base_bundle(), tate=synthetic_tate(unit=26)))
    c = next(c for c in report.clauses if c.clause_id == "thm_main.c")
    assert c.evidence["ord_log_q"] == 2
    assert report.verdict is Verdict.DOES_NOT_APPLY


def test_disc_not_coprime():
    with pytest.raises(HypothesisError) as info:
        gate_thm_main(replace(base_bundle(), D=7))
    assert info.value.code == "DISC_NOT_COPRIME"


def test_inconclusive_needs_blocking_reason():
    with pytest.raises(ValueError):
        ClauseVerdict("x", Status.INCONCLUSIVE, {"a": 1})
    with pytest.raises(ValueError):
        ClauseVerdict("x", Status.HOLDS, {})


def test_eq_without_selmer_input():
    report = gate_thm_EQ(base_bundle())
    f = report.clauses[-1]
    assert f.status is Status.INCONCLUSIVE and f.evidence["blocking"] == "selmer_corank not supplied"
    assert report.verdict is Verdict.INCONCLUSIVE


def test_eq_applies_with_selmer_input():
    report = gate_thm_EQ(replace(base_bundle(), external=ExternalInputs(selmer_corank=1)))
    assert report.verdict is Verdict.APPLIES
    assert [c.text for c in report.conclusions] == ["rank(E/Q) = 1", "analytic rank = 1", "Sha(E/Q) finite"]


def test_eq_clause_d_offender():
    b = base_bundle()
    local = dict(b.local)
    local[19] = LocalReductionData(19, "I5", ReductionClass.SPLIT, 5, 5, 1)
    report = gate_thm_EQ(replace(b, local=local))
    d = next(c for c in report.clauses if c.clause_id == "thm_EQ.d")
    assert d.status is Status.FAILS
    assert d.evidence["offenders"] == [{"ell": 19, "ell_mod_p": 4, "ord_delta": 5}]


def test_tamagawa_valuation_example():
    local = {ell: LocalReductionData(ell, "I1", ReductionClass.SPLIT, c, c, 1) for ell, c in [(5, 1), (7, 5), (11, 2)]}
    assert tamagawa_valuation(local, 5) == 1


def test_bsd_consistency():
    # base Tamagawa numbers 1, 1, 5, 10 give ord_5 = 2
    b = replace(base_bundle(), external=ExternalInputs(analytic_rank=1, lhs_valuation=4, sha_valuation=2))
    report = gate_bsd(b)
    assert report.verdict is Verdict.APPLIES
    assert "+ 2" in report.conclusions[0].text
    identity = next(c for c in report.checks if c.clause_id == "thm_EBSD.identity")
    assert identity.status is Status.HOLDS
    bad = gate_bsd(replace(b, external=ExternalInputs(analytic_rank=1, lhs_valuation=3, sha_valuation=2)))
    assert next(c for c in bad.checks if c.clause_id == "thm_EBSD.identity").status is Status.FAILS


def test_bsd_analytic_rank_zero():
    assert gate_bsd(replace(base_bundle(), external=ExternalInputs(analytic_rank=0))).verdict is Verdict.DOES_NOT_APPLY


@pytest.mark.parametrize("rp,rm,order", [(2, 1, 0), (3, 2, 1), (1, 0, -1)])
def test_kappa_order(rp, rm, order):
    assert kappa_order(rp, rm) == order


def test_kappa_order_negative_flagged():
    b = replace(base_bundle(), external=ExternalInputs(r_plus=1, r_minus=0))
    report = gate_rank(b, gate_thm_main(b))
    check = next(c for c in report.checks if c.clause_id == "thm_ERank.nonnegative_order")
    assert check.status is Status.FAILS


def test_negative_corank_raises():
    with pytest.raises(HypothesisError):
        kappa_order(-1, 2)


def test_rank_and_parity_inherit():
    b = replace(base_bundle(), external=ExternalInputs(r_plus=2, r_minus=1))
    main = gate_thm_main(b)
    assert gate_rank(b, main).verdict is Verdict.APPLIES
    parity = gate_parity(b, main)
    assert parity.verdict is Verdict.APPLIES
    assert parity.checks[0].status is Status.HOLDS
    blocked = replace(b, irreducibility=Irreducibility.INCONCLUSIVE)
    assert gate_parity(blocked, gate_thm_main(blocked)).verdict is Verdict.INCONCLUSIVE


def test_more_inputs_only_resolve_inconclusive():
    bare = {r.theorem_id: r for r in all_gates(base_bundle())}
    full = {r.theorem_id: r for r in all_gates(replace(base_bundle(), external=ExternalInputs(
        selmer_corank=1, analytic_rank=1, r_plus=2, r_minus=1)))}
    for tid, r in bare.items():
        for before, after in zip(r.clauses, full[tid].clauses):
            if before.status is not Status.INCONCLUSIVE:
                assert after.status is before.status
