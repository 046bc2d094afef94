"""Three-valued evaluation of the hypotheses and theorem gates.

Every gate is a pure function of an :class:`InvariantBundle`, so the
same logic runs on curve-derived data and on hand-built synthetic
bundles.  Each clause reads only its own fields of the bundle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import gcd
from typing import Mapping

from .curves import LocalReductionData, factor
from .galois import Irreducibility, derive_clubs
from .padic import valuation
from .quadfield import Splitting
from .tate_period import TatePeriodData


class HypothesisError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class Status(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


class Verdict(str, Enum):
    APPLIES = "Applies"
    DOES_NOT_APPLY = "DoesNotApply"
    INCONCLUSIVE = "Inconclusive"


class TheoremId(str, Enum):
    THM_EQ = "ThmEQ"
    THM_EBSD = "ThmEBSD"
    THM_EMAIN = "ThmEMain"
    THM_ERANK = "ThmERank"
    PARITY = "Parity"


@dataclass(frozen=True)
class ClauseVerdict:
    clause_id: str
    status: Status
    evidence: Mapping

    def __post_init__(self):
        if not self.evidence:
            raise ValueError(f"clause {self.clause_id} has no evidence")
        if self.status is Status.INCONCLUSIVE and "blocking" not in self.evidence:
            raise ValueError(f"inconclusive clause {self.clause_id} must name what blocks it")


@dataclass(frozen=True)
class Conclusion:
    id: str
    text: str


@dataclass(frozen=True)
class TheoremReport:
    theorem_id: TheoremId
    clauses: tuple[ClauseVerdict, ...]
    verdict: Verdict
    conclusions: tuple[Conclusion, ...]
    external_inputs_used: Mapping
    checks: tuple[ClauseVerdict, ...] = ()


@dataclass(frozen=True)
class ExternalInputs:
    """Analytic and Selmer data: assumed, never computed."""

    selmer_corank: int | None = None
    analytic_rank: int | None = None
    r_plus: int | None = None
    r_minus: int | None = None
    lhs_valuation: int | None = None
    sha_valuation: int | None = None

    def supplied(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class InvariantBundle:
    p: int
    D: int
    conductor: int
    local: Mapping[int, LocalReductionData]
    p_splitting: Splitting
    routing: tuple[int, int]
    ram_set: frozenset[int]
    tate: TatePeriodData | None
    irreducibility: Irreducibility
    witness: int | None = None
    external: ExternalInputs = field(default_factory=ExternalInputs)
    spade3_exclude_p: bool = False


def combine(clauses) -> Verdict:
    statuses = [c.status for c in clauses]
    if any(s is Status.FAILS for s in statuses):
        return Verdict.DOES_NOT_APPLY
    if all(s is Status.HOLDS for s in statuses):
        return Verdict.APPLIES
    return Verdict.INCONCLUSIVE


def _primes(n: int) -> dict[int, int]:
    return factor(n) if n > 1 else {}


def _verdict(clause_id, ok, evidence, blocking=None) -> ClauseVerdict:
    if ok is None:
        return ClauseVerdict(clause_id, Status.INCONCLUSIVE, {**evidence, "blocking": blocking})
    return ClauseVerdict(clause_id, Status.HOLDS if ok else Status.FAILS, evidence)


def _require_coprime(b: InvariantBundle) -> None:
    if gcd(b.D, b.conductor) != 1:
        raise HypothesisError("DISC_NOT_COPRIME", f"gcd(D, N) = {gcd(b.D, b.conductor)} != 1")


# -- Hypothesis spade / heart -------------------------------------------------


def check_spade(b: InvariantBundle) -> list[ClauseVerdict]:
    n_plus, n_minus = b.routing
    plus, minus = _primes(n_plus), _primes(n_minus)
    ram = b.ram_set

    squares = sorted(ell for ell, e in minus.items() if e > 1)
    s1 = _verdict("spade.1", not squares, {"n_minus": n_minus, "square_factors": squares})

    exact_plus = sorted(ell for ell, e in plus.items() if e == 1)
    offenders = [{"ell": ell, "where": "N+"} for ell in exact_plus if ell != b.p and ell not in ram]
    offenders += [
        {"ell": ell, "where": "N-", "ell_mod_p": ell % b.p}
        for ell in sorted(minus)
        if ell % b.p in (1, b.p - 1) and ell not in ram
    ]
    s2 = _verdict("spade.2", not offenders,
                  {"ram": sorted(ram), "offenders": offenders, "n_plus": n_plus, "n_minus": n_minus})

    counted = [ell for ell in exact_plus if not (b.spade3_exclude_p and ell == b.p)]
    ram_minus = sorted(ram & set(minus))
    ok3 = bool(ram) and (bool(ram_minus) or len(counted) >= 2)
    s3 = _verdict("spade.3", ok3, {
        "ram": sorted(ram),
        "ram_dividing_n_minus": ram_minus,
        "exact_n_plus_primes_counted": counted,
        "count_includes_p": not b.spade3_exclude_p,
        "note": "whether p counts among primes exactly dividing N+ is ambiguous; "
                "set spade3_exclude_p for the stricter reading",
    })
    return [s1, s2, s3]


def check_heart(b: InvariantBundle) -> list[ClauseVerdict]:
    """Hypothesis heart for an elliptic curve: spade plus the automatic part (4)."""
    s1, s2, s3 = check_spade(b)
    h1 = ClauseVerdict("heart.1", s1.status, {**s1.evidence, "as": "permissible factorization exists"})
    h2 = ClauseVerdict("heart.2", s2.status, s2.evidence)
    h3 = ClauseVerdict("heart.3", s3.status, s3.evidence)
    h4 = _verdict("heart.4", True if b.p >= 5 else None,
                  {"reason": "automatic for elliptic curves when p >= 5"}, blocking="p < 5")
    return [h1, h2, h3, h4]


# -- individual clauses -------------------------------------------------------


def _p_exact(b: InvariantBundle, clause_id: str) -> ClauseVerdict:
    d = b.local.get(b.p)
    f = d.conductor_exponent if d else 0
    return _verdict(clause_id, f == 1, {"p": b.p, "conductor_exponent_at_p": f,
                                       "reduction_at_p": d.reduction_class.value if d else "Good"})


def _irreducible(b: InvariantBundle, clause_id: str) -> ClauseVerdict:
    status = b.irreducibility
    if status is Irreducibility.IRREDUCIBLE:
        return _verdict(clause_id, True, {"certificate": status.value, "witness_prime": b.witness})
    if status is Irreducibility.REDUCIBLE:
        return _verdict(clause_id, False, {"certificate": status.value})
    return _verdict(clause_id, None, {"certificate": status.value},
                    blocking="no Frobenius witness found; raise witness_bound")


def _tate_clause(b: InvariantBundle, clause_id: str, need_not_finite: bool) -> ClauseVerdict:
    t = b.tate
    if t is None:
        return _verdict(clause_id, None, {"p": b.p},
                        blocking="no Tate period: reduction at p is not multiplicative")
    ev = {"ord_q": t.ord_q, "not_finite_at_p": t.not_finite_at_p, "split": t.split,
          "ord_log_q": t.log_q.valuation, "hyp_L_holds": t.hyp_L_holds}
    ok = (t.not_finite_at_p or not need_not_finite) and (t.hyp_L_holds or not t.split)
    return _verdict(clause_id, ok, ev)


def _exact_primes(b: InvariantBundle):
    return sorted(ell for ell, d in b.local.items() if d.conductor_exponent == 1)


# -- gates --------------------------------------------------------------------


def gate_thm_main(b: InvariantBundle, sieve_summary: Mapping | None = None) -> TheoremReport:
    """Nonvanishing of the Kolyvagin system (p || N, p split in K)."""
    _require_coprime(b)
    clauses = [
        _p_exact(b, "thm_main.p_exact"),
        _verdict("thm_main.a", b.p >= 5 and b.p_splitting is Splitting.SPLIT,
                 {"p": b.p, "splitting_of_p": b.p_splitting.value}),
        _irreducible(b, "thm_main.b"),
        _tate_clause(b, "thm_main.c", need_not_finite=True),
        *check_spade(b),
    ]
    nu = len(_primes(b.routing[1]))
    clauses.append(_verdict("thm_main.d_parity", nu % 2 == 0, {"nu_minus": nu, "n_minus": b.routing[1]}))

    heart = check_heart(b)
    spade_status = [c.status for c in clauses if c.clause_id.startswith("spade.")]
    assert spade_status == [h.status for h in heart[:3]], "spade and heart disagree"
    clubs, note = derive_clubs(b.irreducibility, b.ram_set, b.p)
    checks = [*heart, _verdict("clubs.derived", True if clubs.value == "Certified" else None,
                               {"derivation": note}, blocking=note)]
    if sieve_summary:
        checks.append(_verdict("sieve.nonempty", None if not sieve_summary.get("kolyvagin_count") else True,
                               dict(sieve_summary), blocking="no Kolyvagin primes below the sieve bound"))

    verdict = combine(clauses)
    conclusions = ()
    if verdict is Verdict.APPLIES:
        conclusions = (
            Conclusion("kappa_nonzero", "kappa = {c(n,1) in H^1(K, E[p]) : n in Lambda} != {0}"),
            Conclusion("kappa_inf_nonzero", "kappa^infinity != {0}"),
            Conclusion("M_inf_zero", "M_infinity(g) = 0"),
        )
    return TheoremReport(TheoremId.THM_EMAIN, tuple(clauses), verdict, conclusions, {}, tuple(checks))


def _thm_eq_clauses(b: InvariantBundle, prefix: str) -> list[ClauseVerdict]:
    d = b.local.get(b.p)
    ord_p_delta = d.ord_delta_min if d else 0
    clauses = [_p_exact(b, f"{prefix}.a")]

    split = d is not None and d.reduction_class.value == "SplitMultiplicative"
    ev = {"ord_p_delta": ord_p_delta, "split": split}
    if ord_p_delta % b.p == 0:
        clauses.append(_verdict(f"{prefix}.b", False, ev))
    elif split:
        t = b.tate
        if t is None:
            clauses.append(_verdict(f"{prefix}.b", None, ev, blocking="Tate period unavailable"))
        else:
            clauses.append(_verdict(f"{prefix}.b", t.hyp_L_holds, {**ev, "ord_log_q": t.log_q.valuation}))
    else:
        clauses.append(_verdict(f"{prefix}.b", True, ev))

    clauses.append(_irreducible(b, f"{prefix}.c"))

    exact = _exact_primes(b)
    bad_d = [
        {"ell": ell, "ell_mod_p": ell % b.p, "ord_delta": b.local[ell].ord_delta_min}
        for ell in exact
        if ell % b.p in (1, b.p - 1) and b.local[ell].ord_delta_min % b.p == 0
    ]
    clauses.append(_verdict(f"{prefix}.d", not bad_d, {"exact_primes": exact, "offenders": bad_d}))

    good_e = [ell for ell in exact if b.local[ell].ord_delta_min % b.p != 0]
    clauses.append(_verdict(f"{prefix}.e", len(good_e) >= 2, {"primes_with_p_not_dividing_ord_delta": good_e}))
    return clauses


def gate_thm_EQ(b: InvariantBundle) -> TheoremReport:
    """Rank and analytic rank one, finite Sha, given Selmer corank one."""
    clauses = _thm_eq_clauses(b, "thm_EQ")
    s = b.external.selmer_corank
    clauses.append(_verdict("thm_EQ.f", None if s is None else s == 1, {"selmer_corank": s},
                            blocking="selmer_corank not supplied"))
    verdict = combine(clauses)
    conclusions = ()
    if verdict is Verdict.APPLIES:
        conclusions = (
            Conclusion("rank_one", "rank(E/Q) = 1"),
            Conclusion("analytic_rank_one", "analytic rank = 1"),
            Conclusion("sha_finite", "Sha(E/Q) finite"),
        )
    used = {"selmer_corank": s} if s is not None else {}
    return TheoremReport(TheoremId.THM_EQ, tuple(clauses), verdict, conclusions, used)


def tamagawa_valuation(local: Mapping[int, LocalReductionData], p: int) -> int:
    return sum(valuation(d.tamagawa, p) for d in local.values() if d.conductor_exponent > 0)


def gate_bsd(b: InvariantBundle) -> TheoremReport:
    """p-part of the BSD formula in analytic rank one."""
    clauses = _thm_eq_clauses(b, "thm_EBSD")
    r = b.external.analytic_rank
    clauses.append(_verdict("thm_EBSD.analytic_rank", None if r is None else r == 1,
                            {"analytic_rank": r}, blocking="analytic_rank not supplied"))
    verdict = combine(clauses)
    tam = tamagawa_valuation(b.local, b.p)
    conclusions = ()
    checks = []
    lhs, sha = b.external.lhs_valuation, b.external.sha_valuation
    if verdict is Verdict.APPLIES:
        conclusions = (
            Conclusion("bsd_p_part",
                       f"ord_p(L'(E,1) / (Omega_E * Reg(E/Q))) = ord_p(#Sha(E/Q)) + {tam}"),
        )
        if lhs is not None and sha is not None:
            checks.append(_verdict("thm_EBSD.identity", lhs == sha + tam,
                                   {"lhs_valuation": lhs, "sha_valuation": sha, "tamagawa_valuation": tam}))
    used = {k: v for k, v in {"analytic_rank": r, "lhs_valuation": lhs, "sha_valuation": sha}.items()
            if v is not None}
    checks.append(_verdict("thm_EBSD.tamagawa", True, {
        "tamagawa_valuation": tam,
        "c_ell": {str(ell): d.tamagawa for ell, d in sorted(b.local.items()) if d.conductor_exponent > 0},
    }))
    return TheoremReport(TheoremId.THM_EBSD, tuple(clauses), verdict, conclusions, used, tuple(checks))


def _inherit(main: TheoremReport, clause_id: str) -> ClauseVerdict:
    status = {Verdict.APPLIES: True, Verdict.DOES_NOT_APPLY: False, Verdict.INCONCLUSIVE: None}[main.verdict]
    return _verdict(clause_id, status, {"ThmEMain": main.verdict.value},
                    blocking="hypotheses of the main theorem not settled")


def kappa_order(r_plus: int, r_minus: int) -> int:
    """ord(kappa^infinity) = min(r+, r-) - 1."""
    if r_plus < 0 or r_minus < 0:
        raise HypothesisError("NEGATIVE_CORANK", "Selmer coranks must be non-negative")
    return min(r_plus, r_minus) - 1


def gate_rank(b: InvariantBundle, main: TheoremReport) -> TheoremReport:
    rp, rm = b.external.r_plus, b.external.r_minus
    given = rp is not None and rm is not None
    clauses = [
        _inherit(main, "thm_ERank.main"),
        _verdict("thm_ERank.coranks", True if given else None, {"r_plus": rp, "r_minus": rm},
                 blocking="r_plus / r_minus not supplied"),
    ]
    verdict = combine(clauses)
    conclusions, checks = (), []
    if given:
        order = kappa_order(rp, rm)
    if verdict is Verdict.APPLIES:
        conclusions = (Conclusion("ord_kappa_inf", f"ord(kappa^infinity) = min(r+, r-) - 1 = {order}"),)
        checks.append(_verdict("thm_ERank.nonnegative_order", order >= 0, {"ord_kappa_inf": order}))
        checks.append(_verdict("thm_ERank.odd_total", (rp + rm) % 2 == 1, {"r_plus + r_minus": rp + rm}))
    used = {"r_plus": rp, "r_minus": rm} if given else {}
    return TheoremReport(TheoremId.THM_ERANK, tuple(clauses), verdict, conclusions, used, tuple(checks))


def gate_parity(b: InvariantBundle, main: TheoremReport) -> TheoremReport:
    clauses = [_inherit(main, "parity.main")]
    verdict = combine(clauses)
    conclusions, checks = (), []
    rp, rm = b.external.r_plus, b.external.r_minus
    if verdict is Verdict.APPLIES:
        conclusions = (
            Conclusion("sel_p_dim_odd", "dim_{F_p} Sel_p(E/K) is odd"),
            Conclusion("sel_p_inf_corank_odd", "Z_p-corank of Sel_{p^infinity}(E/K) is odd"),
        )
        if rp is not None and rm is not None:
            checks.append(_verdict("parity.supplied_coranks", (rp + rm) % 2 == 1, {"r_plus + r_minus": rp + rm}))
    used = {"r_plus": rp, "r_minus": rm} if rp is not None and rm is not None else {}
    return TheoremReport(TheoremId.PARITY, tuple(clauses), verdict, conclusions, used, tuple(checks))


def gate_rank_and_parity(b: InvariantBundle, main: TheoremReport) -> tuple[TheoremReport, TheoremReport]:
    return gate_rank(b, main), gate_parity(b, main)


def all_gates(b: InvariantBundle, sieve_summary: Mapping | None = None) -> list[TheoremReport]:
    main = gate_thm_main(b, sieve_summary)
    rank, parity = gate_rank_and_parity(b, main)
    return [gate_thm_EQ(b), gate_bsd(b), main, rank, parity]
