"""The p-adic Tate period of a curve with multiplicative reduction at p.

q is recovered from j(E) by Newton iteration on the q-expansion
j(q) = 1/q + 744 + 196884 q + ..., then fed to the Iwasawa logarithm.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .curves import CurveError, ReductionClass, WeierstrassCurve, tate_algorithm
from .padic import PadicError, PadicNumber, padic_log_iwasawa, valuation

DEFAULT_PRECISION = 20


class PrecisionError(PadicError):
    """The requested predicate cannot be certified at this precision."""


# -- j-invariant q-expansion --------------------------------------------------

_j_lock = threading.Lock()
_j_table: list[int] = []


def _series_mul(f: list[int], g: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, a in enumerate(f[:n]):
        if a:
            for k, b in enumerate(g[: n - i]):
                out[i + k] += a * b
    return out


def _compute_j_coefficients(n: int) -> list[int]:
    """c_{-1}, c_0, c_1, ... (n terms) of q*j(q) = E4^3 / prod (1 - q^m)^24."""
    e4 = [1] + [240 * sum(d**3 for d in range(1, m + 1) if m % d == 0) for m in range(1, n)]
    e4_cubed = _series_mul(_series_mul(e4, e4, n), e4, n)
    # eta-product P = prod (1 - q^m)^24, inverted as a power series with P[0] = 1
    prod = [1] + [0] * (n - 1)
    for m in range(1, n):
        for _ in range(24):
            for k in range(n - 1, m - 1, -1):
                prod[k] -= prod[k - m]
    inv = [0] * n
    inv[0] = 1
    for k in range(1, n):
        inv[k] = -sum(prod[i] * inv[k - i] for i in range(1, k + 1))
    return _series_mul(e4_cubed, inv, n)


def j_coefficients(n: int) -> list[int]:
    """First n coefficients of q*j(q): [1, 744, 196884, 21493760, ...]."""
    global _j_table
    if len(_j_table) < n:
        with _j_lock:
            if len(_j_table) < n:
                _j_table = _compute_j_coefficients(max(n, 2 * len(_j_table), 16))
    return _j_table[:n]


# -- Tate period --------------------------------------------------------------


@dataclass(frozen=True)
class TatePeriodData:
    prime: int
    ord_q: int
    q: PadicNumber
    log_q: PadicNumber
    l_invariant: PadicNumber
    not_finite_at_p: bool
    hyp_L_holds: bool
    split: bool


def _solve_q(s: int, p: int, ord_q: int, precision: int) -> int:
    """Root of G(q) = q - s * (q j(q)) in pZ_p, modulo p**precision."""
    modulus = p**precision
    n_terms = math.ceil(precision / ord_q) + 2
    coeffs = [c % modulus for c in j_coefficients(n_terms)]

    def G_and_dG(q):
        f = df = 0
        for c in reversed(coeffs):
            df = (df * q + f) % modulus
            f = (f * q + c) % modulus
        return (q - s * f) % modulus, (1 - s * df) % modulus

    q = s % modulus
    for _ in range(4 * precision.bit_length() + 8):
        g, dg = G_and_dG(q)
        if g == 0:
            return q
        q = (q - g * pow(dg, -1, modulus)) % modulus
    raise PrecisionError("Newton iteration for the Tate period did not converge")


def tate_parameter(j: Fraction, p: int, abs_precision: int) -> PadicNumber:
    """q with j(q) = j, for ord_p(j) < 0, known modulo p**abs_precision."""
    ord_q = -(valuation(j.numerator, p) - valuation(j.denominator, p))
    if ord_q <= 0:
        raise CurveError("j-invariant is p-integral; no Tate parameter")
    if abs_precision <= ord_q:
        raise PrecisionError("precision must exceed ord_p(q)")
    modulus = p**abs_precision
    s = j.denominator * pow(j.numerator, -1, modulus) % modulus if j.numerator % p else None
    if s is None:  # pragma: no cover - ord_p(j) < 0 forces a p-unit numerator
        raise CurveError("unexpected p-divisible numerator")
    q = _solve_q(s, p, ord_q, abs_precision)
    return PadicNumber.from_parts(p, 0, q, abs_precision)


def compute_tate_period(curve: WeierstrassCurve, p: int,
                        abs_precision: int = DEFAULT_PRECISION) -> TatePeriodData:
    """Tate period, its logarithm and the L-invariant at p.

    q is computed to absolute precision ``abs_precision + 2*ord_q`` so that
    j(q) - j(E) has valuation at least ``abs_precision``.
    """
    local = tate_algorithm(curve, p)
    if not local.reduction_class.multiplicative:
        raise CurveError(f"reduction at {p} is {local.reduction_class.value}, not multiplicative")
    ord_q = local.ord_delta_min
    q = tate_parameter(curve.j_invariant(), p, abs_precision + 2 * ord_q)
    assert q.valuation == ord_q
    return tate_data_from_q(q, ord_q, local.reduction_class is ReductionClass.SPLIT)


def tate_data_from_q(q: PadicNumber, ord_q: int, split: bool) -> TatePeriodData:
    """Populate the predicates from a Tate period (also usable on synthetic q)."""
    p = q.prime
    log_q = padic_log_iwasawa(q)
    if log_q.is_zero:
        raise PrecisionError(
            f"log_p q vanishes modulo {p}^{log_q.abs_precision}; raise the precision")
    linv = l_invariant_of(log_q, ord_q)
    return TatePeriodData(
        prime=p,
        ord_q=ord_q,
        q=q,
        log_q=log_q,
        l_invariant=linv,
        not_finite_at_p=ord_q % p != 0,
        hyp_L_holds=log_q.valuation == 1,
        split=split,
    )


def l_invariant_of(log_q: PadicNumber, ord_q: int) -> PadicNumber:
    if log_q.is_zero:
        raise PrecisionError("L-invariant not certified nonzero at this precision")
    return log_q / PadicNumber.from_integer(ord_q, log_q.prime, log_q.abs_precision + 64)


def l_invariant(data: TatePeriodData) -> PadicNumber:
    """log_p(q) / ord_p(q)."""
    return l_invariant_of(data.log_q, data.ord_q)


def evaluate_j_series(q: PadicNumber, n_terms: int) -> PadicNumber:
    """1/q + 744 + 196884 q + ... truncated after n_terms coefficients."""
    total = PadicNumber.zero(q.prime, q.abs_precision * 2 + 64)
    power = q.inverse()
    for c in j_coefficients(n_terms):
        total = total + power * c
        power = power * q
    return total


__all__ = [
    "DEFAULT_PRECISION",
    "PrecisionError",
    "TatePeriodData",
    "compute_tate_period",
    "evaluate_j_series",
    "j_coefficients",
    "l_invariant",
    "tate_data_from_q",
    "tate_parameter",
]
