"""Integral Weierstrass models over Q and their local arithmetic.

Tate's algorithm follows the classical presentation (Silverman, Advanced
Topics IV.9; Cremona's formulation for p = 2, 3), including the rescaling
step that produces a locally minimal model.
"""

from __future__ import annotations

import logging
import math
import random
import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .padic import INF, is_prime, split_valuation, valuation

log = logging.getLogger(__name__)

POINT_COUNT_BUDGET = 10**6
TRIAL_DIVISION_BOUND = 10**5
RHO_SEED = 20140601
RHO_ITERATIONS = 2 * 10**6


class CurveError(ValueError):
    """Invalid curve data (singular model, impossible conductor, ...)."""


class BudgetError(RuntimeError):
    """A configured computation budget was exceeded."""


class ReductionClass(str, Enum):
    GOOD = "Good"
    SPLIT = "SplitMultiplicative"
    NONSPLIT = "NonsplitMultiplicative"
    ADDITIVE = "Additive"

    @property
    def multiplicative(self) -> bool:
        return self in (ReductionClass.SPLIT, ReductionClass.NONSPLIT)


@dataclass(frozen=True)
class WeierstrassCurve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise CurveError(f"singular Weierstrass model {self.ainvs}")

    @classmethod
    def from_list(cls, ainvs) -> WeierstrassCurve:
        if len(ainvs) != 5:
            raise CurveError("expected five a-invariants")
        return cls(*(int(a) for a in ainvs))

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self) -> int:
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self) -> int:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> int:
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self) -> int:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self) -> int:
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self) -> int:
        b2 = self.b2
        return -b2 * b2 * b2 + 36 * b2 * self.b4 - 216 * self.b6

    @cached_property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def j_invariant(self):
        from fractions import Fraction

        return Fraction(self.c4**3, self.discriminant)

    def rst(self, r: int, s: int, t: int) -> WeierstrassCurve:
        """Model obtained from x = x' + r, y = y' + s x' + t."""
        a1, a2, a3, a4, a6 = self.ainvs
        return WeierstrassCurve(
            a1 + 2 * s,
            a2 - s * a1 + 3 * r - s * s,
            a3 + r * a1 + 2 * t,
            a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
        )

    def change_coordinates(self, u, r: int, s: int, t: int) -> WeierstrassCurve:
        """General admissible change; ``u`` must make the result integral."""
        c = self.rst(r, s, t)
        out = []
        for a, k in zip(c.ainvs, (1, 2, 3, 4, 6)):
            q, rem = divmod(a, u**k)
            if rem:
                raise CurveError(f"u = {u} does not give an integral model")
            out.append(q)
        return WeierstrassCurve(*out)

    def scale(self, u: int) -> WeierstrassCurve:
        """The model with a_i multiplied by u**i (discriminant times u**12)."""
        return WeierstrassCurve(*(a * u**k for a, k in zip(self.ainvs, (1, 2, 3, 4, 6))))


@dataclass(frozen=True)
class LocalReductionData:
    prime: int
    kodaira_type: str
    reduction_class: ReductionClass
    tamagawa: int
    ord_delta_min: int
    conductor_exponent: int
    scaling_valuation: int = 0
    reminimalized: bool = False


# -- residue field helpers ----------------------------------------------------


def _is_square_mod(a: int, p: int) -> bool:
    a %= p
    if a == 0 or p == 2:
        return True
    return pow(a, (p - 1) // 2, p) == 1


def _quad_has_root(a: int, b: int, c: int, p: int) -> bool:
    """Does a x^2 + b x + c have a root in F_p?"""
    a, b, c = a % p, b % p, c % p
    if p == 2:
        return any((a * x * x + b * x + c) % 2 == 0 for x in (0, 1))
    if a == 0:
        return b != 0 or c == 0
    return _is_square_mod(b * b - 4 * a * c, p)


def _poly_mulmod(f, g, m, p):
    """Product of f, g modulo monic m over F_p (lists, low degree first)."""
    prod = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x:
            for j, y in enumerate(g):
                prod[i + j] = (prod[i + j] + x * y) % p
    dm = len(m) - 1
    for k in range(len(prod) - 1, dm - 1, -1):
        coeff = prod[k]
        if coeff:
            for i in range(dm + 1):
                prod[k - dm + i] = (prod[k - dm + i] - coeff * m[i]) % p
    out = prod[:dm] if len(prod) > dm else prod
    return out + [0] * (dm - len(out))


def _poly_gcd_degree(f, g, p):
    def trim(h):
        h = [x % p for x in h]
        while h and h[-1] == 0:
            h.pop()
        return h

    f, g = trim(f), trim(g)
    while g:
        while len(f) >= len(g) and f:
            coeff = f[-1] * pow(g[-1], -1, p) % p
            shift = len(f) - len(g)
            for i, y in enumerate(g):
                f[i + shift] = (f[i + shift] - coeff * y) % p
            f = trim(f)
        f, g = g, f
    return len(f) - 1


def _cubic_root_count(b: int, c: int, d: int, p: int) -> int:
    """Number of distinct roots of T^3 + b T^2 + c T + d in F_p."""
    if p < 1000:
        return sum(1 for x in range(p) if (x * x * x + b * x * x + c * x + d) % p == 0)
    m = [d % p, c % p, b % p, 1]
    result, base, e = [1, 0, 0], [0, 1, 0], p
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        e >>= 1
    result[1] = (result[1] - 1) % p
    return _poly_gcd_degree(m, result, p)


# -- Tate's algorithm ---------------------------------------------------------


def _tate(curve: WeierstrassCurve, p: int):
    """Run Tate's algorithm; return (model, LocalReductionData, scalings).

    The returned model is p-minimal and is the model on which the
    classification was read off.
    """
    if not is_prime(p):
        raise CurveError(f"{p} is not prime")
    C = curve
    scalings = 0
    inv2 = pow(2, -1, p) if p != 2 else None

    def pval(x):
        return valuation(x, p)

    def pdiv(x):
        return x % p == 0

    def red(x):
        return x % p

    def inv(x):
        return pow(x % p, -1, p)

    while True:
        a1, a2, a3, a4, a6 = C.ainvs
        delta = C.discriminant
        n = pval(delta)
        if n == 0:
            return C, LocalReductionData(p, "I0", ReductionClass.GOOD, 1, 0, 0, scalings), scalings

        # move the singular point to (0, 0) modulo p
        if p == 2:
            if pdiv(C.b2):
                r = red(a4)
                t = red(((r + a2) * r + a4) * r + a6)
            else:
                r = red(a3)
                t = red(a4 + r * r)
        elif p == 3:
            if pdiv(C.b2):
                r = red(-C.b6)
            else:
                r = red(-inv(C.b2) * C.b4)
            t = red(a1 * r + a3)
        else:
            if pdiv(C.c4):
                r = red(-inv(12) * C.b2)
            else:
                r = red(-inv(12 * C.c4) * (C.c6 + C.b2 * C.c4))
            t = red(-inv2 * (a1 * r + a3))
        C = C.rst(r, 0, t)
        a1, a2, a3, a4, a6 = C.ainvs
        assert pdiv(a3) and pdiv(a4) and pdiv(a6)

        if not pdiv(C.b2):
            # multiplicative; tangent cone at (0,0) is y^2 + a1 x y - a2 x^2
            split = _quad_has_root(1, a1, -a2, p)
            if split:
                cls, cp = ReductionClass.SPLIT, n
            else:
                cls, cp = ReductionClass.NONSPLIT, (2 if n % 2 == 0 else 1)
            return C, LocalReductionData(p, f"I{n}", cls, cp, n, 1, scalings), scalings

        # additive
        if pval(a6) < 2:
            return C, LocalReductionData(p, "II", ReductionClass.ADDITIVE, 1, n, n, scalings), scalings
        if pval(C.b8) < 3:
            return C, LocalReductionData(p, "III", ReductionClass.ADDITIVE, 2, n, n - 1, scalings), scalings
        if pval(C.b6) < 3:
            cp = 3 if _quad_has_root(1, a3 // p, -(a6 // (p * p)), p) else 1
            return C, LocalReductionData(p, "IV", ReductionClass.ADDITIVE, cp, n, n - 2, scalings), scalings

        # arrange p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = red(a2)
            t = 2 * red(a6 // 4)
        elif p == 3:
            s, t = a1, a3
        else:
            s = red(-a1 * inv2)
            t = red(-a3 * inv2)
        C = C.rst(0, s, t)
        a1, a2, a3, a4, a6 = C.ainvs

        b = red(a2 // p)
        c = red(a4 // p**2)
        d = red(a6 // p**3)
        w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
        x = 3 * c - b * b
        if not pdiv(w):
            cp = 1 + _cubic_root_count(b, c, d, p)
            return C, LocalReductionData(p, "I0*", ReductionClass.ADDITIVE, cp, n, n - 4, scalings), scalings

        if not pdiv(x):
            # double root: move it to T = 0
            if p == 2:
                r = c
            elif p == 3:
                r = c * inv(b)
            else:
                r = (b * c - 9 * d) * inv(2 * x)
            C = C.rst(p * red(r), 0, 0)
            ix = iy = 3
            mx = my = p * p
            while True:
                a1, a2, a3, a4, a6 = C.ainvs
                a2t = red(a2 // p)
                a3t = red(a3 // my)
                a4t = red(a4 // (p * mx))
                a6t = red(a6 // (mx * my))
                if pdiv(a3t * a3t + 4 * a6t):
                    t = my * (a6t if p == 2 else red(-a3t * inv2))
                    C = C.rst(0, 0, t)
                    my *= p
                    iy += 1
                    a1, a2, a3, a4, a6 = C.ainvs
                    a2t = red(a2 // p)
                    a3t = red(a3 // my)
                    a4t = red(a4 // (p * mx))
                    a6t = red(a6 // (mx * my))
                    if pdiv(a4t * a4t - 4 * a6t * a2t):
                        if p == 2:
                            r = mx * red(a6t * inv(a2t))
                        else:
                            r = mx * red(-a4t * inv(2 * a2t))
                        C = C.rst(r, 0, 0)
                        mx *= p
                        ix += 1
                        continue
                    cp = 4 if _quad_has_root(a2t, a4t, a6t, p) else 2
                    break
                cp = 4 if _quad_has_root(1, a3t, -a6t, p) else 2
                break
            m = ix + iy - 5
            return C, LocalReductionData(p, f"I{m}*", ReductionClass.ADDITIVE, cp, n, n - m - 4, scalings), scalings

        # triple root: move it to T = 0
        if p == 2:
            r = b
        elif p == 3:
            r = red(-d)
        else:
            r = red(-b * inv(3))
        C = C.rst(p * red(r), 0, 0)
        a1, a2, a3, a4, a6 = C.ainvs
        x3t = red(a3 // p**2)
        x6t = red(a6 // p**4)
        if not pdiv(x3t * x3t + 4 * x6t):
            cp = 3 if _quad_has_root(1, x3t, -x6t, p) else 1
            return C, LocalReductionData(p, "IV*", ReductionClass.ADDITIVE, cp, n, n - 6, scalings), scalings
        t = x6t if p == 2 else red(x3t * inv2)
        C = C.rst(0, 0, -p * p * t)
        a1, a2, a3, a4, a6 = C.ainvs
        if pval(a4) < 4:
            return C, LocalReductionData(p, "III*", ReductionClass.ADDITIVE, 2, n, n - 7, scalings), scalings
        if pval(a6) < 6:
            return C, LocalReductionData(p, "II*", ReductionClass.ADDITIVE, 1, n, n - 8, scalings), scalings
        # not minimal: divide by p
        C = C.change_coordinates(p, 0, 0, 0)
        scalings += 1


def local_minimal_model(curve: WeierstrassCurve, ell: int) -> tuple[WeierstrassCurve, int]:
    """An ell-minimal model isomorphic to ``curve`` and the scaling valuation.

    The input is returned unchanged when it is already minimal at ell.
    """
    model, _, scalings = _tate(curve, ell)
    if scalings == 0:
        return curve, 0
    return model, scalings


def tate_algorithm(curve: WeierstrassCurve, ell: int) -> LocalReductionData:
    """Kodaira symbol, reduction type, Tamagawa number and f_ell at ell.

    A non-minimal input is minimalised first; the result then carries
    ``reminimalized=True``.
    """
    _, data, scalings = _tate(curve, ell)
    if scalings:
        log.warning("model %s not minimal at %d; rescaled by %d^%d",
                    curve.ainvs, ell, ell, scalings)
        data = LocalReductionData(**{**data.__dict__, "reminimalized": True})
    return data


# -- point counting -----------------------------------------------------------


def count_points(curve: WeierstrassCurve, ell: int, budget: int = POINT_COUNT_BUDGET) -> int:
    """#E(F_ell) (including infinity) for a model with good reduction at ell."""
    if ell > budget:
        raise BudgetError(f"point count at {ell} exceeds budget {budget}")
    if ell == 2:
        a1, a2, a3, a4, a6 = (a % 2 for a in curve.ainvs)
        affine = sum(
            1
            for x in (0, 1)
            for y in (0, 1)
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0
        )
        return affine + 1
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    x = np.arange(ell, dtype=np.int64)
    coeffs = [4 % ell, curve.b2 % ell, (2 * curve.b4) % ell, curve.b6 % ell]
    f = np.full(ell, coeffs[0], dtype=np.int64)
    for c in coeffs[1:]:
        f = (f * x + c) % ell
    is_sq = np.zeros(ell, dtype=bool)
    is_sq[(x * x) % ell] = True
    zeros = int(np.count_nonzero(f == 0))
    squares = int(np.count_nonzero(is_sq[f])) - zeros
    return 1 + zeros + 2 * squares


def trace_of_frobenius(curve: WeierstrassCurve, ell: int, budget: int = POINT_COUNT_BUDGET) -> int:
    """a(ell): ell + 1 - #E(F_ell) when good, +1 / -1 / 0 when bad."""
    if curve.discriminant % ell == 0:
        model, data, _ = _tate(curve, ell)
        if data.reduction_class is ReductionClass.SPLIT:
            return 1
        if data.reduction_class is ReductionClass.NONSPLIT:
            return -1
        if data.reduction_class is ReductionClass.ADDITIVE:
            return 0
        curve = model
    return ell + 1 - count_points(curve, ell, budget)


# -- factorisation ------------------------------------------------------------


def _pollard_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    for _ in range(64):
        c = rng.randrange(1, n)
        y = rng.randrange(0, n)
        m, g, r, q = 128, 1, 1, 1
        steps = 0
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            steps += r
            if steps > RHO_ITERATIONS:
                raise BudgetError(f"Pollard rho budget exhausted on {n}")
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise BudgetError(f"Pollard rho failed on {n}")


def factor(n: int) -> dict[int, int]:
    """Prime factorisation of |n| by trial division then Pollard rho."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for q in (2, 3):
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
    q = 5
    while q <= TRIAL_DIVISION_BOUND and q * q <= n:
        for d in (q, q + 2):
            while n % d == 0:
                out[d] = out.get(d, 0) + 1
                n //= d
        q += 6
    if n > 1:
        rng = random.Random(RHO_SEED)
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if is_prime(m):
                out[m] = out.get(m, 0) + 1
                continue
            try:
                d = _pollard_rho(m, rng)
            except BudgetError as exc:
                raise BudgetError(f"could not factor cofactor {m}") from exc
            stack.extend((d, m // d))
    return dict(sorted(out.items()))


# -- global data --------------------------------------------------------------


@dataclass
class CurveData:
    """A curve with its conductor, local table and an a(ell) cache."""

    curve: WeierstrassCurve
    conductor: int
    local: dict[int, LocalReductionData]
    minimal_discriminant: int
    budget: int = POINT_COUNT_BUDGET
    _ap_cache: dict[int, int] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def ap(self, ell: int) -> int:
        cached = self._ap_cache.get(ell)
        if cached is not None:
            return cached
        if ell in self.local:
            data = self.local[ell]
            value = {ReductionClass.SPLIT: 1, ReductionClass.NONSPLIT: -1,
                     ReductionClass.ADDITIVE: 0}.get(data.reduction_class)
            if value is None:
                value = trace_of_frobenius(self.curve, ell, self.budget)
        else:
            value = trace_of_frobenius(self.curve, ell, self.budget)
        with self._lock:
            self._ap_cache[ell] = value
        return value

    def bad_primes(self) -> list[int]:
        return sorted(ell for ell, d in self.local.items() if d.conductor_exponent > 0)


def conductor_and_global_data(curve: WeierstrassCurve, budget: int = POINT_COUNT_BUDGET) -> CurveData:
    """Conductor N = prod ell^f_ell and the table of local data at each ell | Delta."""
    delta = curve.discriminant
    local: dict[int, LocalReductionData] = {}
    delta_min = delta
    conductor = 1
    for ell in factor(delta):
        data = tate_algorithm(curve, ell)
        local[ell] = data
        delta_min //= ell ** (12 * data.scaling_valuation)
        conductor *= ell**data.conductor_exponent
    if conductor == 1:
        raise CurveError("conductor 1: no elliptic curve over Q has good reduction everywhere")
    return CurveData(curve, conductor, local, delta_min, budget)


def hasse_bound_ok(a: int, ell: int) -> bool:
    return a * a <= 4 * ell


__all__ = [
    "INF",
    "BudgetError",
    "CurveData",
    "CurveError",
    "LocalReductionData",
    "ReductionClass",
    "WeierstrassCurve",
    "conductor_and_global_data",
    "count_points",
    "factor",
    "local_minimal_model",
    "split_valuation",
    "tate_algorithm",
    "trace_of_frobenius",
]
