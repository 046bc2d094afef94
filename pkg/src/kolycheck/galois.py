"""Predicates on the mod-p Galois representation of E.

Irreducibility is certified by a single Frobenius whose characteristic
polynomial x^2 - a(ell) x + ell is irreducible over F_p: a reducible
representation would give it a root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .curves import CurveData
from .sieves import primes_up_to
from .tate_period import TatePeriodData

DEFAULT_WITNESS_BOUND = 200


class Irreducibility(str, Enum):
    IRREDUCIBLE = "CertifiedIrreducible"
    REDUCIBLE = "CertifiedReducible"
    INCONCLUSIVE = "Inconclusive"


class Clubs(str, Enum):
    CERTIFIED = "Certified"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ResidualCertificate:
    status: Irreducibility
    witness: int | None
    ram_set: frozenset[int]
    finite_at_p: bool | None
    clubs_holds: Clubs
    clubs_note: str = ""
    notes: tuple[str, ...] = field(default=())


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def frobenius_discriminant_is_nonresidue(a_ell: int, ell: int, p: int) -> bool:
    return _legendre(a_ell * a_ell - 4 * ell, p) == -1


def irreducibility_witness(data: CurveData, p: int, search_bound: int = DEFAULT_WITNESS_BOUND,
                           isogeny_kernel=None) -> tuple[Irreducibility, int | None]:
    """Search good primes ell <= search_bound for an irreducibility witness.

    ``isogeny_kernel`` is an externally supplied rational p-isogeny kernel;
    it is the only route to a CertifiedReducible verdict.
    """
    if isogeny_kernel is not None:
        return Irreducibility.REDUCIBLE, None
    bad = set(data.bad_primes())
    for ell in primes_up_to(search_bound):
        if ell == p or ell in bad:
            continue
        if frobenius_discriminant_is_nonresidue(data.ap(ell), ell, p):
            return Irreducibility.IRREDUCIBLE, ell
    return Irreducibility.INCONCLUSIVE, None


def ramification_set(local_table, p: int) -> frozenset[int]:
    """Primes ell != p with ell || N and p not dividing ord_ell(Delta_min)."""
    return frozenset(
        ell
        for ell, d in local_table.items()
        if ell != p and d.conductor_exponent == 1 and d.ord_delta_min % p != 0
    )


def finite_at_p(tate_data: TatePeriodData | None) -> bool:
    if tate_data is None:
        raise ValueError("finiteness at p is only decided here for multiplicative reduction")
    return not tate_data.not_finite_at_p


def derive_clubs(status: Irreducibility, ram_set, p: int) -> tuple[Clubs, str]:
    if status is not Irreducibility.IRREDUCIBLE:
        return Clubs.INCONCLUSIVE, "irreducibility not certified"
    if not ram_set:
        return Clubs.INCONCLUSIVE, "Ram(rho-bar) is empty: no unipotent inertia element available"
    if p < 5:
        return Clubs.INCONCLUSIVE, "p < 5"
    ell = min(ram_set)
    return Clubs.CERTIFIED, (
        f"inertia at {ell} (multiplicative, ramified) gives an element of order p; "
        "irreducible image containing it contains SL2(F_p), hence is GL2(F_p); "
        "p >= 5 supplies the required diagonal elements")


def residual_certificate(data: CurveData, p: int, tate_data: TatePeriodData | None,
                         search_bound: int = DEFAULT_WITNESS_BOUND,
                         isogeny_kernel=None) -> ResidualCertificate:
    status, witness = irreducibility_witness(data, p, search_bound, isogeny_kernel)
    ram = ramification_set(data.local, p)
    clubs, note = derive_clubs(status, ram, p)
    return ResidualCertificate(
        status=status,
        witness=witness,
        ram_set=ram,
        finite_at_p=None if tate_data is None else finite_at_p(tate_data),
        clubs_holds=clubs,
        clubs_note=note,
        notes=("heart.4 holds automatically for elliptic curves with p >= 5",),
    )
