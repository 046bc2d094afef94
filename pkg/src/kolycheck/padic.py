"""Capped-precision p-adic numbers and the Iwasawa logarithm.

A :class:`PadicNumber` stores ``p**valuation * unit`` where ``unit`` is a
p-adic unit known modulo ``p**(abs_precision - valuation)``.  Zero at a
given precision is represented with ``valuation = INF``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

INF = math.inf


class PadicError(ValueError):
    """Raised on invalid p-adic input or exhausted precision."""


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24 and probable above."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def valuation(n: int, p: int):
    """ord_p(n) for an integer n; ord_p(0) is INF."""
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_valuation(n: int, p: int) -> tuple[int, int]:
    """Return (v, u) with n = p**v * u and p not dividing u (n != 0)."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def rational_valuation(x: Fraction, p: int):
    if x == 0:
        return INF
    return valuation(x.numerator, p) - valuation(x.denominator, p)


@dataclass(frozen=True)
class PadicNumber:
    prime: int
    valuation: int | float
    unit: int
    abs_precision: int

    def __post_init__(self):
        p = self.prime
        if self.valuation == INF:
            if self.unit != 0:
                raise PadicError("zero must carry unit 0")
            return
        rel = self.abs_precision - self.valuation
        if rel <= 0:
            raise PadicError("abs_precision must exceed valuation")
        if not 0 < self.unit < p**rel or self.unit % p == 0:
            raise PadicError(f"unit {self.unit} is not a reduced p-adic unit")

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, p: int, abs_precision: int) -> PadicNumber:
        return cls(p, INF, 0, abs_precision)

    @classmethod
    def from_parts(cls, p: int, v: int, unit: int, abs_precision: int) -> PadicNumber:
        """Normalise ``p**v * unit`` (unit may contain factors of p or be 0)."""
        if unit == 0:
            return cls.zero(p, abs_precision)
        extra, unit = split_valuation(unit, p)
        v += extra
        if v >= abs_precision:
            return cls.zero(p, abs_precision)
        return cls(p, v, unit % p ** (abs_precision - v), abs_precision)

    @classmethod
    def from_integer(cls, n: int, p: int, abs_precision: int) -> PadicNumber:
        return cls.from_parts(p, 0, n, abs_precision)

    # -- views ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.valuation == INF

    @property
    def rel_precision(self) -> int:
        if self.is_zero:
            return 0
        return self.abs_precision - self.valuation

    @property
    def unit_digits(self) -> tuple[int, ...]:
        """Little-endian base-p digits of the unit part."""
        digits = []
        u = self.unit
        for _ in range(self.rel_precision):
            u, d = divmod(u, self.prime)
            digits.append(d)
        return tuple(digits)

    def residue(self) -> int:
        """Representative in [0, p**abs_precision) of an integral value."""
        if self.is_zero:
            return 0
        if self.valuation < 0:
            raise PadicError("value is not p-integral")
        return self.unit * self.prime**self.valuation % self.prime**self.abs_precision

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def __repr__(self) -> str:
        if self.is_zero:
            return f"O({self.prime}^{self.abs_precision})"
        return f"{self.prime}^{self.valuation}*{self.unit} + O({self.prime}^{self.abs_precision})"

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: PadicNumber) -> None:
        if self.prime != other.prime:
            raise PadicError("mixed primes")

    def _coerce(self, other) -> PadicNumber:
        if isinstance(other, PadicNumber):
            self._check(other)
            return other
        if isinstance(other, int):
            return PadicNumber.from_integer(other, self.prime, max(self.abs_precision, 1) + 64)
        if isinstance(other, Fraction):
            return padic_from_rational(other.numerator, other.denominator, self.prime,
                                       max(self.abs_precision, 1) + 64)
        return NotImplemented

    def __neg__(self) -> PadicNumber:
        if self.is_zero:
            return self
        return PadicNumber.from_parts(self.prime, self.valuation, -self.unit, self.abs_precision)

    def __add__(self, other) -> PadicNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.prime
        prec = min(self.abs_precision, other.abs_precision)
        if self.is_zero:
            return other.with_precision(prec)
        if other.is_zero:
            return self.with_precision(prec)
        v = min(self.valuation, other.valuation)
        total = self.unit * p ** (self.valuation - v) + other.unit * p ** (other.valuation - v)
        return PadicNumber.from_parts(p, v, total, prec)

    __radd__ = __add__

    def __sub__(self, other) -> PadicNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> PadicNumber:
        return (-self) + other

    def __mul__(self, other) -> PadicNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.prime
        prec = min(self.abs_precision + other._lower_valuation(),
                   other.abs_precision + self._lower_valuation())
        if self.is_zero or other.is_zero:
            return PadicNumber.zero(p, prec)
        v = self.valuation + other.valuation
        return PadicNumber(p, v, self.unit * other.unit % p ** (prec - v), prec)

    __rmul__ = __mul__

    def _lower_valuation(self) -> int:
        return self.abs_precision if self.is_zero else self.valuation

    def inverse(self) -> PadicNumber:
        if self.is_zero:
            raise PadicError("division by p-adic zero")
        rel = self.rel_precision
        p = self.prime
        return PadicNumber(p, -self.valuation, pow(self.unit, -1, p**rel), rel - self.valuation)

    def __truediv__(self, other) -> PadicNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> PadicNumber:
        return self.inverse() * other

    def __pow__(self, n: int) -> PadicNumber:
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return PadicNumber.from_integer(1, self.prime, self.rel_precision or self.abs_precision)
        if self.is_zero:
            return PadicNumber.zero(self.prime, self.abs_precision * n)
        rel = self.rel_precision
        p = self.prime
        return PadicNumber(p, self.valuation * n, pow(self.unit, n, p**rel), self.valuation * n + rel)

    def with_precision(self, abs_precision: int) -> PadicNumber:
        """Reduce to a lower absolute precision (never raises it)."""
        abs_precision = min(abs_precision, self.abs_precision)
        if self.is_zero:
            return PadicNumber.zero(self.prime, abs_precision)
        return PadicNumber.from_parts(self.prime, self.valuation, self.unit, abs_precision)

    def agrees_with(self, other: PadicNumber) -> bool:
        """True when the two values agree at the smaller of their precisions."""
        self._check(other)
        return (self - other).is_zero


def padic_from_rational(num: int, den: int, p: int, abs_precision: int) -> PadicNumber:
    """Expand num/den as a p-adic number known modulo p**abs_precision."""
    if den == 0:
        raise PadicError("zero denominator")
    if not is_prime(p):
        raise PadicError(f"{p} is not prime")
    if abs_precision < 1:
        raise PadicError("abs_precision must be at least 1")
    if num == 0:
        return PadicNumber.zero(p, abs_precision)
    vn, un = split_valuation(num, p)
    vd, ud = split_valuation(den, p)
    v = vn - vd
    if v >= abs_precision:
        return PadicNumber.zero(p, abs_precision)
    modulus = p ** (abs_precision - v)
    return PadicNumber(p, v, un * pow(ud, -1, modulus) % modulus, abs_precision)


def teichmuller(unit: int, p: int, precision: int) -> int:
    """Teichmuller representative of ``unit`` modulo p**precision."""
    modulus = p**precision
    x = unit % modulus
    if x % p == 0:
        raise PadicError("Teichmuller lift needs a unit")
    while True:
        y = pow(x, p, modulus)
        if y == x:
            return x
        x = y


def log_truncation_index(precision: int, p: int) -> int:
    """Smallest K with K - floor(log_p K) >= precision."""
    k = 1
    while k - (len(_digits(k, p)) - 1) < precision:
        k += 1
    return k


def _digits(n: int, p: int) -> list[int]:
    out = []
    while n:
        n, d = divmod(n, p)
        out.append(d)
    return out


def _log_one_plus(t: int, p: int, precision: int) -> int:
    """log(1 + t) mod p**precision for an integer t divisible by p."""
    modulus = p**precision
    total = 0
    power = 1
    for k in range(1, log_truncation_index(precision, p) + 1):
        power *= t
        vk, uk = split_valuation(k, p)
        term = (power // p**vk) * pow(uk, -1, modulus)
        total += term if k % 2 else -term
    return total % modulus


def padic_log_iwasawa(x: PadicNumber) -> PadicNumber:
    """Iwasawa-branch logarithm (log p = 0, log of roots of unity = 0).

    The result is known to absolute precision equal to the relative
    precision of ``x``.
    """
    if x.is_zero:
        raise PadicError("log of p-adic zero")
    p = x.prime
    if p == 2:
        raise PadicError("p = 2 is not supported by the logarithm")
    prec = x.rel_precision
    modulus = p**prec
    omega = teichmuller(x.unit, p, prec)
    one_unit = x.unit * pow(omega, -1, modulus) % modulus
    value = _log_one_plus(one_unit - 1, p, prec)
    return PadicNumber.from_parts(p, 0, value, prec)


def padic_valuation_of_integer(n: int, p: int):
    return valuation(n, p)
