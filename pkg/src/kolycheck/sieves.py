"""Kolyvagin primes, admissible primes, and the sets built from them."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

from .curves import CurveData
from .padic import INF, valuation
from .quadfield import QuadraticField, Splitting, splitting_type

DEFAULT_SIEVE_BOUND = 10**4
DEFAULT_PRODUCT_CAP = 10**5


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(bound**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


@dataclass(frozen=True)
class KolyvaginPrime:
    ell: int
    index: int | float


@dataclass(frozen=True)
class AdmissiblePrime:
    q: int


def kolyvagin_index(ell: int, a_ell: int, p: int):
    """M(ell) = min(ord_p(ell + 1), ord_p(a(ell))); ord_p(0) = INF."""
    return min(valuation(ell + 1, p), valuation(a_ell, p))


def index_of_product(primes: list[KolyvaginPrime]):
    """M(n) for n the product of the given distinct Kolyvagin primes."""
    ells = [k.ell for k in primes]
    if len(set(ells)) != len(ells):
        raise ValueError("repeated prime: n must be squarefree")
    return min((k.index for k in primes), default=INF)


def _candidates(data: CurveData, p: int, K: QuadraticField, bound: int) -> Iterator[int]:
    excluded = data.conductor * K.D * p
    for ell in primes_up_to(bound):
        if excluded % ell == 0:
            continue
        if splitting_type(ell, K) is not Splitting.INERT:
            continue
        yield ell


def sieve_kolyvagin(data: CurveData, p: int, K: QuadraticField, bound: int) -> list[KolyvaginPrime]:
    out = []
    for ell in _candidates(data, p, K, bound):
        # M(ell) >= 1 needs p | ell + 1; skip the point count otherwise
        if (ell + 1) % p:
            continue
        index = kolyvagin_index(ell, data.ap(ell), p)
        if index >= 1:
            out.append(KolyvaginPrime(ell, index))
    return out


def is_admissible(q: int, a_q: int, p: int) -> bool:
    return (q * q - 1) % p != 0 and ((q + 1) ** 2 - a_q * a_q) % p == 0


def sieve_admissible(data: CurveData, p: int, K: QuadraticField, bound: int) -> list[AdmissiblePrime]:
    out = []
    for q in _candidates(data, p, K, bound):
        if (q * q - 1) % p == 0:
            continue
        if is_admissible(q, data.ap(q), p):
            out.append(AdmissiblePrime(q))
    return out


def squarefree_products(primes: list[int], cap: int = DEFAULT_PRODUCT_CAP) -> Iterator[tuple[int, ...]]:
    """Lazily enumerate squarefree products (as sorted prime tuples), n = 1 first."""
    emitted = 0
    for size in range(len(primes) + 1):
        for combo in combinations(primes, size):
            if emitted >= cap:
                return
            emitted += 1
            yield combo


def parity_class(m_primes: tuple[int, ...]) -> str:
    """'+' or '-' according to (-1)^nu(m)."""
    return "+" if len(m_primes) % 2 == 0 else "-"


def lambda_prime_split(primes: list[int], cap: int = DEFAULT_PRODUCT_CAP) -> dict[str, int]:
    """Counts of Lambda'+ and Lambda'- among the enumerated products (m = 1 included)."""
    counts = {"+": 0, "-": 0}
    for combo in squarefree_products(primes, cap):
        counts[parity_class(combo)] += 1
    return counts
