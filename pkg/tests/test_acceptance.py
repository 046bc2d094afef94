"""Acceptance gate: nine criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

import itertools
import json
import math
import random
import time

import pytest

from kolycheck.cohomology import (
    DEFAULT_SEED,
    h0_length,
    h1_length,
    random_modules,
    verify_restriction_additivity,
)
from kolycheck.curves import CurveError, WeierstrassCurve, conductor_and_global_data, tate_algorithm, trace_of_frobenius
from kolycheck.hypotheses import Status, Verdict, gate_thm_main
from kolycheck.padic import PadicNumber, padic_from_rational, padic_log_iwasawa, teichmuller
from kolycheck.quadfield import QuadraticField, is_fundamental_discriminant
from kolycheck.report import dumps, parse_batch, run_batch
from kolycheck.sieves import sieve_admissible, sieve_kolyvagin
from kolycheck.tate_period import compute_tate_period

import oracles
from synthetic import MUTATIONS, base_bundle

RESULTS = []


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# 1 ---------------------------------------------------------------------------


def test_criterion_1_herbrand():
    start = time.perf_counter()
    modules = random_modules(200, DEFAULT_SEED)
    bad = [M for M in modules if h0_length(M) != h1_length(M)]
    elapsed = time.perf_counter() - start
    assert all(M.order <= 5**6 for M in modules)
    record(1, not bad and elapsed < 10,
           f"h0 = h1 on {len(modules) - len(bad)}/200 modules, {elapsed:.2f}s")


# 2 ---------------------------------------------------------------------------


def test_criterion_2_additivity():
    start = time.perf_counter()
    modules = random_modules(200, DEFAULT_SEED + 1)
    bad = [M for M in modules if not verify_restriction_additivity(M).holds]
    elapsed = time.perf_counter() - start
    record(2, not bad and elapsed < 10,
           f"additivity on {len(modules) - len(bad)}/200 modules, {elapsed:.2f}s")


# 3 ---------------------------------------------------------------------------


def _local_signature(d):
    return (d.kodaira_type, d.reduction_class, d.tamagawa, d.ord_delta_min, d.conductor_exponent)


def test_criterion_3_tate_algorithm():
    start = time.perf_counter()
    rng = random.Random(3)
    curves = []
    for a in itertools.product(range(-2, 3), repeat=5):
        try:
            curves.append(WeierstrassCurve.from_list(a))
        except CurveError:
            continue
    closed_form_failures = invariance_failures = checked = 0
    for E in curves:
        moves = [(rng.choice((1, -1)), *(rng.randint(-9, 9) for _ in range(3))) for _ in range(20)]
        twins = [E.change_coordinates(*m) for m in moves]
        for ell in (2, 3, 5, 7):
            d = tate_algorithm(E, ell)
            checked += 1
            n = d.ord_delta_min
            if d.reduction_class.multiplicative:
                expected = n if d.reduction_class.value == "SplitMultiplicative" else math.gcd(2, n)
                if d.tamagawa != expected or d.kodaira_type != f"I{n}" or d.conductor_exponent != 1:
                    closed_form_failures += 1
            sig = _local_signature(d)
            invariance_failures += sum(_local_signature(tate_algorithm(T, ell)) != sig for T in twins)
    elapsed = time.perf_counter() - start
    ok = closed_form_failures == 0 and invariance_failures == 0 and elapsed < 60
    record(3, ok, f"{len(curves)} curves x 4 primes ({checked} reductions, 20 coordinate changes each): "
                  f"{closed_form_failures} closed-form and {invariance_failures} invariance failures, "
                  f"{elapsed:.1f}s")


# 4 ---------------------------------------------------------------------------


def test_criterion_4_point_counts():
    rng = random.Random(4)
    primes = [ell for ell in range(2, 101) if oracles.is_prime_naive(ell)]
    mismatches = hasse = compared = 0
    curves = 0
    while curves < 50:
        a = [rng.randint(-50, 50) for _ in range(5)]
        delta = oracles.discriminant(*a)
        if delta == 0:
            continue
        curves += 1
        E = WeierstrassCurve.from_list(a)
        for ell in primes:
            if delta % ell == 0:
                continue
            got = trace_of_frobenius(E, ell)
            compared += 1
            mismatches += got != ell + 1 - oracles.count_points_xy(a, ell)
            hasse += got * got > 4 * ell
    record(4, mismatches == 0 and hasse == 0,
           f"{compared} traces on 50 curves: {mismatches} mismatches, {hasse} Hasse violations")


# 5 ---------------------------------------------------------------------------


def _multiplicative_instances():
    found = {5: [], 7: []}
    for a in itertools.product((0, 1), (-1, 0, 1), (0, 1), range(-30, 31), range(-30, 31)):
        if all(len(v) >= 10 for v in found.values()):
            break
        delta = oracles.discriminant(*a)
        if delta == 0:
            continue
        for p in (5, 7):
            if len(found[p]) < 10 and delta % p == 0 and oracles.c4_of(*a) % p:
                found[p].append((a, p))
    return found[5] + found[7]


def test_criterion_5_tate_period_round_trip():
    instances = _multiplicative_instances()
    assert len(instances) == 20
    failures = []
    lowest = math.inf
    for a, p in instances:
        E = WeierstrassCurve.from_list(a)
        data = compute_tate_period(E, p, 20)
        q_prec = data.q.abs_precision
        v = oracles.j_residual_valuation(data.q.unit * p**data.q.valuation, p, data.ord_q, a, q_prec)
        lowest = min(lowest, v)
        ord_delta_min = tate_algorithm(E, p).ord_delta_min
        if v < 20 or data.q.valuation != ord_delta_min:
            failures.append((a, p, v))
    record(5, not failures, f"20 instances: minimum residual valuation {lowest}, ord q = ord Delta_min "
                            f"({len(failures)} failures)")


# 6 ---------------------------------------------------------------------------


def _random_unit(rng, p):
    while True:
        u = rng.randrange(1, p**20)
        if u % p:
            return u


def test_criterion_6_padic_log():
    problems = []
    oracle = oracles.fraction_mod(oracles.log_series(6, 5, 12), 5**4)
    got = padic_log_iwasawa(padic_from_rational(6, 1, 5, 4))
    if oracle != 555 or got.unit * 5**got.valuation % 5**4 != 555:
        problems.append(f"log_5(6) = {got}, oracle {oracle}")
    for p in (5, 7, 11):
        if not padic_log_iwasawa(padic_from_rational(p, 1, p, 20)).is_zero:
            problems.append(f"log_{p}({p}) != 0")
        for u in range(1, p):
            w = PadicNumber.from_parts(p, 0, teichmuller(u, p, 20), 20)
            if not padic_log_iwasawa(w).is_zero:
                problems.append(f"log of Teichmuller lift of {u} mod {p} != 0")
    rng = random.Random(6)
    for _ in range(100):
        p = rng.choice((5, 7, 11))
        x, y = (PadicNumber.from_parts(p, 0, _random_unit(rng, p), 20) for _ in range(2))
        lhs = padic_log_iwasawa(x * y)
        rhs = padic_log_iwasawa(x) + padic_log_iwasawa(y)
        if not (lhs - rhs).is_zero:
            problems.append(f"homomorphism fails at p={p}")
    record(6, not problems, "log_5(6) = 555 mod 5^4; log p = 0 and log(Teichmuller) = 0 for p in 5, 7, 11; "
                            f"100 homomorphism pairs ({len(problems)} problems)")


# 7 ---------------------------------------------------------------------------


def _sieve_triples():
    rng = random.Random(7)
    triples = []
    while len(triples) < 10:
        a = [rng.randint(-6, 6) for _ in range(5)]
        try:
            data = conductor_and_global_data(WeierstrassCurve.from_list(a))
        except CurveError:
            continue
        if any(d.scaling_valuation for d in data.local.values()):
            continue
        p = rng.choice((5, 7))
        D = rng.choice([d for d in range(3, 60) if is_fundamental_discriminant(-d)
                        and math.gcd(d, data.conductor) == 1])
        triples.append((a, data, p, D))
    return triples


def _oracle_sieves(a, N, p, D, bound):
    koly, adm = [], []
    for ell in range(2, bound + 1):
        if not oracles.is_prime_naive(ell):
            continue
        if N % ell == 0 or D % ell == 0 or ell == p:
            continue
        if not oracles.is_inert(ell, D):
            continue
        a_ell = oracles.ap_oracle(a, ell)
        m = min(oracles.vp(ell + 1, p), oracles.vp(a_ell, p))
        if m >= 1:
            koly.append((ell, m))
        if (ell * ell - 1) % p != 0 and ((ell + 1) ** 2 - a_ell * a_ell) % p == 0:
            adm.append(ell)
    return koly, adm


def test_criterion_7_sieves():
    mismatched = []
    sizes = 0
    for a, data, p, D in _sieve_triples():
        K = QuadraticField.from_D(D)
        koly = [(k.ell, k.index) for k in sieve_kolyvagin(data, p, K, 2000)]
        adm = [q.q for q in sieve_admissible(data, p, K, 2000)]
        want_koly, want_adm = _oracle_sieves(a, data.conductor, p, D, 2000)
        sizes += len(koly) + len(adm)
        if set(koly) != set(want_koly) or set(adm) != set(want_adm):
            mismatched.append((a, p, D))
    record(7, not mismatched, f"10 triples, {sizes} primes found, {len(mismatched)} mismatching triples")


# 8 ---------------------------------------------------------------------------


def test_criterion_8_clause_isolation():
    base = gate_thm_main(base_bundle())
    problems = []
    if base.verdict is not Verdict.APPLIES:
        problems.append("base bundle does not apply")
    if {c.id for c in base.conclusions} != {"kappa_nonzero", "kappa_inf_nonzero", "M_inf_zero"}:
        problems.append("wrong conclusions")
    base_status = {c.clause_id: c.status for c in base.clauses}
    covered = set()
    for name, (clause, expected, mutate) in MUTATIONS.items():
        report = gate_thm_main(mutate(base_bundle()))
        status = {c.clause_id: c.status for c in report.clauses}
        changed = {k for k in status if status[k] != base_status[k]}
        want_verdict = Verdict.DOES_NOT_APPLY if expected is Status.FAILS else Verdict.INCONCLUSIVE
        if changed != {clause} or status[clause] is not expected or report.verdict is not want_verdict:
            problems.append(f"{name}: changed {sorted(changed)}, verdict {report.verdict.value}")
        covered.add(clause)
    missing = set(base_status) - covered
    if missing:
        problems.append(f"clauses without a mutation: {sorted(missing)}")
    record(8, not problems, f"{len(MUTATIONS)} single-clause mutations over {len(base_status)} clauses "
                            f"({'; '.join(problems) or 'all isolated'})")


# 9 ---------------------------------------------------------------------------


def _fifty_jobs():
    rng = random.Random(9)
    jobs = []
    while len(jobs) < 50:
        a = [rng.randint(-4, 4) for _ in range(5)]
        if oracles.discriminant(*a) == 0:
            continue
        D = rng.choice((3, 4, 7, 8, 11, 19, 23, 31, 39, 43))
        job = {"curve": a, "p": rng.choice((5, 7, 11)), "D": D, "options": {"sieve_bound": 1000}}
        if len(jobs) % 5 == 0:
            job["external"] = {"selmer_corank": 1, "analytic_rank": 1, "r_plus": 1, "r_minus": 2}
        jobs.append(job)
    return json.dumps(jobs, indent=1)


def test_criterion_9_determinism(tmp_path):
    text = _fifty_jobs()
    path = tmp_path / "jobs.json"
    path.write_text(text)
    rows = parse_batch(path.read_text())
    first = dumps(run_batch(rows, jobs=1))
    second = dumps(run_batch(parse_batch(path.read_text()), jobs=1))
    threaded = dumps(run_batch(parse_batch(path.read_text()), jobs=8))
    ok = first == second == threaded and len(rows) == 50
    record(9, ok, f"50 jobs: rerun identical={first == second}, 1 vs 8 threads identical={first == threaded}, "
                  f"{len(first)} bytes")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
