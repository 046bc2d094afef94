"""Job orchestration and canonical report serialization.

A job runs the whole pipeline for one (curve, p, D) triple and always
returns a report dict.  Failures become entries under ``errors`` with a
machine-readable code rather than exceptions.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from math import gcd

from . import __version__
from .cohomology import tam_p_zero_check
from .curves import BudgetError, CurveError, conductor_and_global_data, WeierstrassCurve
from .galois import DEFAULT_WITNESS_BOUND, residual_certificate
from .hypotheses import (
    ExternalInputs,
    HypothesisError,
    InvariantBundle,
    TheoremId,
    Verdict,
    all_gates,
)
from .padic import PadicError, PadicNumber, is_prime
from .quadfield import FieldError, QuadraticField, split_inert_routing, splitting_type
from .sieves import DEFAULT_SIEVE_BOUND, sieve_admissible, sieve_kolyvagin
from .tate_period import DEFAULT_PRECISION, compute_tate_period

log = logging.getLogger(__name__)

FACTOR_SEED = 20140601
SIEVE_LISTING = 20
EXTERNAL_KEYS = tuple(ExternalInputs.__dataclass_fields__)
OPTION_DEFAULTS = {
    "sieve_bound": DEFAULT_SIEVE_BOUND,
    "precision": DEFAULT_PRECISION,
    "spade3_exclude_p": False,
    "witness_bound": DEFAULT_WITNESS_BOUND,
}
CSV_HEADER = ["a1", "a2", "a3", "a4", "a6", "p", "D"]


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class JobInput:
    curve: tuple[int, int, int, int, int]
    p: int
    D: int
    external: ExternalInputs = field(default_factory=ExternalInputs)
    options: dict = field(default_factory=lambda: dict(OPTION_DEFAULTS))

    @classmethod
    def from_record(cls, record) -> JobInput:
        """Validate a decoded JSON object; raises InputError."""
        if not isinstance(record, dict):
            raise InputError("job must be a JSON object")
        unknown = set(record) - {"curve", "p", "D", "external", "options"}
        if unknown:
            raise InputError(f"unknown keys: {sorted(unknown)}")
        try:
            curve, p, D = record["curve"], record["p"], record["D"]
        except KeyError as exc:
            raise InputError(f"missing key {exc.args[0]!r}") from None
        if not (isinstance(curve, list) and len(curve) == 5 and all(_is_int(a) for a in curve)):
            raise InputError("curve must be a list of five integers")
        external = record.get("external") or {}
        options = record.get("options") or {}
        if not isinstance(external, dict) or not isinstance(options, dict):
            raise InputError("external and options must be objects")
        bad = set(external) - set(EXTERNAL_KEYS)
        if bad:
            raise InputError(f"unknown external inputs: {sorted(bad)}")
        if not all(v is None or _is_int(v) for v in external.values()):
            raise InputError("external inputs must be integers")
        bad = set(options) - set(OPTION_DEFAULTS)
        if bad:
            raise InputError(f"unknown options: {sorted(bad)}")
        job = cls(tuple(curve), p, D, ExternalInputs(**external), {**OPTION_DEFAULTS, **options})
        job.validate()
        return job

    def validate(self) -> None:
        if not (_is_int(self.p) and _is_int(self.D)):
            raise InputError("p and D must be integers")
        if self.p < 5 or not is_prime(self.p):
            raise InputError(f"p = {self.p} must be a prime >= 5")
        if self.D <= 0:
            raise InputError("D must be positive")
        for key in ("sieve_bound", "precision", "witness_bound"):
            if not _is_int(self.options[key]) or self.options[key] < 1:
                raise InputError(f"option {key} must be a positive integer")
        for key in ("selmer_corank", "analytic_rank", "r_plus", "r_minus"):
            value = getattr(self.external, key)
            if value is not None and value < 0:
                raise InputError(f"external input {key} must be non-negative")
        if not isinstance(self.options["spade3_exclude_p"], bool):
            raise InputError("option spade3_exclude_p must be a boolean")

    def echo(self) -> dict:
        return {"curve": list(self.curve), "p": self.p, "D": self.D, "options": dict(self.options)}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


# -- serialization helpers ----------------------------------------------------


def padic_summary(x: PadicNumber) -> dict:
    return {
        "prime": x.prime,
        "valuation": x.valuation,
        "unit": x.unit,
        "abs_precision": x.abs_precision,
    }


def _local_summary(d) -> dict:
    return {
        "kodaira": d.kodaira_type,
        "reduction": d.reduction_class.value,
        "tamagawa": d.tamagawa,
        "ord_delta_min": d.ord_delta_min,
        "conductor_exponent": d.conductor_exponent,
        "reminimalized": d.reminimalized,
    }


def _clause_dict(c) -> dict:
    return {"id": c.clause_id, "status": c.status.value, "evidence": dict(c.evidence)}


def theorem_dict(r) -> dict:
    return {
        "theorem": r.theorem_id.value,
        "verdict": r.verdict.value,
        "clauses": [_clause_dict(c) for c in r.clauses],
        "checks": [_clause_dict(c) for c in r.checks],
        "conclusions": [{"id": c.id, "text": c.text} for c in r.conclusions],
        "external_inputs_used": dict(r.external_inputs_used),
    }


def _canonical(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        raise TypeError("floats are not allowed in reports")
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_canonical(v) for v in obj)
    return obj


def dumps(report) -> str:
    """Canonical JSON: sorted keys, integers in decimal, INF as "inf"."""
    return json.dumps(_canonical(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- the pipeline -------------------------------------------------------------


def _error(code: str, message: str, stage: str) -> dict:
    return {"code": code, "message": message, "stage": stage}


def run_job(job: JobInput) -> dict:
    report = {
        "input": job.echo(),
        "assumed_not_computed": job.external.supplied(),
        "tool_version": __version__,
        "seed": FACTOR_SEED,
        "errors": [],
    }
    errors = report["errors"]
    p, opts = job.p, job.options

    try:
        curve = WeierstrassCurve.from_list(job.curve)
        data = conductor_and_global_data(curve)
    except CurveError as exc:
        errors.append(_error("BAD_CURVE", str(exc), "curve"))
        return report
    except BudgetError as exc:
        errors.append(_error("BUDGET_EXCEEDED", str(exc), "curve"))
        return report
    report["curve"] = {
        "conductor": data.conductor,
        "minimal_discriminant": data.minimal_discriminant,
        "local": {str(ell): _local_summary(d) for ell, d in sorted(data.local.items())},
    }

    try:
        K = QuadraticField.from_D(job.D)
    except FieldError as exc:
        errors.append(_error("BAD_DISC", str(exc), "field"))
        return report
    if gcd(job.D, data.conductor) != 1:
        report["errors"] = [_error("DISC_NOT_COPRIME",
                                   f"gcd(D, N) = {gcd(job.D, data.conductor)} != 1", "field")]
        report["fatal"] = True
        return report
    n_plus, n_minus = split_inert_routing(data.conductor, K)
    report["field"] = {
        "disc": K.disc,
        "p_splitting": splitting_type(p, K).value,
        "n_plus": n_plus,
        "n_minus": n_minus,
    }

    tate = None
    local_p = data.local.get(p)
    if local_p is not None and local_p.reduction_class.multiplicative:
        try:
            tate = compute_tate_period(curve, p, opts["precision"])
            report["tate_period"] = {
                "ord_q": tate.ord_q,
                "q": padic_summary(tate.q),
                "log_q": padic_summary(tate.log_q),
                "l_invariant": padic_summary(tate.l_invariant),
                "not_finite_at_p": tate.not_finite_at_p,
                "hyp_L_holds": tate.hyp_L_holds,
                "split": tate.split,
            }
            tam = tam_p_zero_check(tate)
            report["tate_period"]["tamagawa_at_p"] = _clause_dict(tam)
        except PadicError as exc:
            errors.append(_error("PRECISION_EXHAUSTED", str(exc), "tate_period"))

    try:
        cert = residual_certificate(data, p, tate, opts["witness_bound"])
        sieve = _sieve_summary(data, p, K, opts["sieve_bound"])
    except BudgetError as exc:
        errors.append(_error("BUDGET_EXCEEDED", str(exc), "sieves"))
        return report
    report["certificates"] = {
        "irreducibility": cert.status.value,
        "witness": cert.witness,
        "ram_set": sorted(cert.ram_set),
        "finite_at_p": cert.finite_at_p,
        "clubs": cert.clubs_holds.value,
        "clubs_note": cert.clubs_note,
        "notes": list(cert.notes),
    }
    report["sieves"] = sieve

    bundle = InvariantBundle(
        p=p, D=job.D, conductor=data.conductor, local=data.local,
        p_splitting=splitting_type(p, K), routing=(n_plus, n_minus),
        ram_set=cert.ram_set, tate=tate, irreducibility=cert.status, witness=cert.witness,
        external=job.external, spade3_exclude_p=opts["spade3_exclude_p"],
    )
    try:
        report["theorems"] = [theorem_dict(r) for r in all_gates(bundle, sieve)]
    except HypothesisError as exc:
        errors.append(_error(exc.code, str(exc), "gates"))
    return report


def _sieve_summary(data, p, K, bound) -> dict:
    koly = sieve_kolyvagin(data, p, K, bound)
    adm = sieve_admissible(data, p, K, bound)
    return {
        "bound": bound,
        "kolyvagin_count": len(koly),
        "kolyvagin_first": [{"ell": k.ell, "index": k.index} for k in koly[:SIEVE_LISTING]],
        "admissible_count": len(adm),
        "admissible_first": [a.q for a in adm[:SIEVE_LISTING]],
    }


# -- batches ------------------------------------------------------------------


def parse_batch(text: str, fmt: str | None = None) -> list[tuple[int, JobInput | InputError]]:
    """Decode a JSON array or a CSV file into (line, job-or-error) rows.

    Raises InputError when the file as a whole cannot be read.
    """
    stripped = text.lstrip()
    if fmt == "json" or (fmt is None and stripped.startswith("[")):
        return _parse_json(text)
    return _parse_csv(text)


def _parse_json(text: str):
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(records, list):
        raise InputError("batch JSON must be an array")
    lines = _item_lines(text, len(records))
    rows = []
    for line, record in zip(lines, records):
        try:
            rows.append((line, JobInput.from_record(record)))
        except InputError as exc:
            rows.append((line, exc))
    return rows


def _item_lines(text: str, count: int) -> list[int]:
    """1-based line on which each top-level array element starts."""
    decoder = json.JSONDecoder()
    pos = text.index("[") + 1
    lines = []
    for _ in range(count):
        while text[pos] in " \t\r\n,":
            pos += 1
        lines.append(text.count("\n", 0, pos) + 1)
        _, pos = decoder.raw_decode(text, pos)
    return lines


def _parse_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    if [h.strip() for h in header] != CSV_HEADER:
        raise InputError(f"CSV header must be {','.join(CSV_HEADER)}")
    rows = []
    for fields in reader:
        line = reader.line_num
        if not fields or all(not f.strip() for f in fields):
            continue
        try:
            if len(fields) != len(CSV_HEADER):
                raise InputError(f"expected {len(CSV_HEADER)} fields, got {len(fields)}")
            try:
                values = [int(f.strip()) for f in fields]
            except ValueError:
                raise InputError(f"non-integer field in {fields}") from None
            rows.append((line, JobInput.from_record(
                {"curve": values[:5], "p": values[5], "D": values[6]})))
        except InputError as exc:
            rows.append((line, exc))
    return rows


def _run_row(row, options_override):
    line, job = row
    if isinstance(job, InputError):
        return {"line": line, "error": _error("INVALID_ROW", str(job), "input")}
    if options_override:
        job = JobInput(job.curve, job.p, job.D, job.external, {**job.options, **options_override})
    return {"line": line, "report": run_job(job)}


def run_batch(rows, jobs: int = 1, options_override: dict | None = None) -> dict:
    """Run every row (in input order) and tally verdicts per theorem."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda r: _run_row(r, options_override), rows))
    else:
        results = [_run_row(r, options_override) for r in rows]
    summary = {t.value: {v.value: 0 for v in Verdict} for t in TheoremId}
    for res in results:
        for thm in res.get("report", {}).get("theorems", []):
            summary[thm["theorem"]][thm["verdict"]] += 1
    return {
        "results": results,
        "row_errors": sum(1 for r in results if "error" in r),
        "summary": summary if results else {},
        "tool_version": __version__,
    }


# -- text rendering -----------------------------------------------------------

_LABELS = {
    "ThmEQ": "thm_EQ.", "ThmEBSD": "thm_EBSD.", "ThmEMain": "thm_main.",
    "ThmERank": "thm_ERank.", "Parity": "parity.",
}


def clause_label(theorem: str, clause_id: str) -> str:
    """'ThmEQ(d)' style label; hypothesis clauses keep their own name."""
    prefix = _LABELS[theorem]
    if clause_id.startswith(prefix):
        return f"{theorem}({clause_id[len(prefix):]})"
    return clause_id


def render_text(report: dict) -> str:
    out = []
    inp = report["input"]
    out.append(f"curve {inp['curve']}  p={inp['p']}  D={inp['D']}")
    if "curve" in report:
        out.append(f"conductor {report['curve']['conductor']}")
    for err in report["errors"]:
        out.append(f"ERROR {err['code']}: {err['message']}")
    for key, value in sorted(report["assumed_not_computed"].items()):
        out.append(f"assumed, not computed: {key} = {value}")
    for thm in report.get("theorems", []):
        out.append(f"{thm['theorem']}: {thm['verdict']}")
        for c in thm["clauses"]:
            blocking = c["evidence"].get("blocking")
            tail = f"  ({blocking})" if blocking else ""
            out.append(f"  {clause_label(thm['theorem'], c['id'])}: {c['status']}{tail}")
        for c in thm["checks"]:
            out.append(f"  check {c['id']}: {c['status']}")
        for c in thm["conclusions"]:
            out.append(f"  => {c['text']}")
    return "\n".join(out) + "\n"
