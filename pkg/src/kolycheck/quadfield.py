"""Imaginary quadratic fields: prime splitting and permissible factorizations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import gcd

from .curves import factor
from .padic import is_prime


class FieldError(ValueError):
    pass


class Splitting(str, Enum):
    SPLIT = "Split"
    INERT = "Inert"
    RAMIFIED = "Ramified"


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factor(n).values()) if n > 1 else n == 1


def is_fundamental_discriminant(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


@dataclass(frozen=True)
class QuadraticField:
    """K = Q(sqrt(-D)) given by its (negative, fundamental) discriminant."""

    disc: int

    def __post_init__(self):
        if self.disc >= 0:
            raise FieldError("discriminant of an imaginary quadratic field must be negative")
        if not is_fundamental_discriminant(self.disc):
            raise FieldError(f"{self.disc} is not a fundamental discriminant")

    @classmethod
    def from_D(cls, D: int) -> QuadraticField:
        return cls(-D)

    @property
    def D(self) -> int:
        return -self.disc


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n > 0."""
    if n <= 0:
        raise ValueError("kronecker symbol needs n > 0")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n), n odd
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def splitting_type(ell: int, K: QuadraticField) -> Splitting:
    if not is_prime(ell):
        raise FieldError(f"{ell} is not prime")
    k = kronecker(K.disc, ell)
    if k == 0:
        return Splitting.RAMIFIED
    return Splitting.SPLIT if k == 1 else Splitting.INERT


@dataclass(frozen=True)
class PermissibleFactorization:
    n_plus: int
    n_minus: int

    @property
    def nu_minus(self) -> int:
        return len(factor(self.n_minus)) if self.n_minus > 1 else 0


def split_inert_routing(N: int, K: QuadraticField) -> tuple[int, int]:
    """N = N+ * N- with split primes in N+ and inert primes in N-.

    No squarefreeness is imposed on N-; requires gcd(D, N) = 1.
    """
    if N < 1:
        raise FieldError("N must be positive")
    if gcd(K.D, N) != 1:
        raise FieldError(f"gcd(D, N) = {gcd(K.D, N)} != 1")
    n_plus = n_minus = 1
    for ell, e in factor(N).items() if N > 1 else ():
        kind = splitting_type(ell, K)
        if kind is Splitting.SPLIT:
            n_plus *= ell**e
        elif kind is Splitting.INERT:
            n_minus *= ell**e
        else:  # pragma: no cover - excluded by the gcd check
            raise FieldError(f"{ell} ramifies in K")
    return n_plus, n_minus


def permissible_factorization(N: int, K: QuadraticField) -> PermissibleFactorization | None:
    """The unique permissible factorization of N, or None if none exists."""
    n_plus, n_minus = split_inert_routing(N, K)
    if not _squarefree(n_minus):
        return None
    return PermissibleFactorization(n_plus, n_minus)
