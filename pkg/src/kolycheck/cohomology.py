"""Finite Z_p-modules with a Frobenius automorphism.

M = Z/p^e_1 + ... + Z/p^e_r with Frobenius given by an integer matrix F
acting on column vectors.  H^0 and H^1 of the procyclic group generated
by F are ker(F - 1) and coker(F - 1); lengths are exponents of p.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .padic import valuation

ENUMERATION_CAP = 5**6
DEFAULT_SEED = 8101


class ModuleError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteFrobeniusModule:
    p: int
    cyclic_orders: tuple[int, ...]
    frobenius: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        e = self.cyclic_orders
        F = self.frobenius
        r = len(e)
        if any(x < 1 for x in e) or list(e) != sorted(e, reverse=True):
            raise ModuleError("cyclic orders must be positive and non-increasing")
        if len(F) != r or any(len(row) != r for row in F):
            raise ModuleError("Frobenius matrix has the wrong shape")
        for i, j in itertools.product(range(r), repeat=2):
            if e[j] < e[i] and F[i][j] % self.p ** (e[i] - e[j]):
                raise ModuleError(f"F[{i}][{j}] does not respect the module relations")
        if _det_mod_p(F, self.p) == 0:
            raise ModuleError("Frobenius is not invertible on M")

    @property
    def length(self) -> int:
        return sum(self.cyclic_orders)

    @property
    def order(self) -> int:
        return self.p**self.length

    def shifted(self, scalar: int = 1, power: int = 1, sign: int = 1):
        """Matrix of sign * F**power - scalar."""
        F = [list(row) for row in self.frobenius]
        M = _identity(len(F))
        for _ in range(power):
            M = _matmul(M, F)
        return [[sign * M[i][j] - (scalar if i == j else 0) for j in range(len(F))] for i in range(len(F))]


def _identity(r):
    return [[int(i == j) for j in range(r)] for i in range(r)]


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def _det_mod_p(F, p) -> int:
    A = [[x % p for x in row] for row in F]
    n = len(A)
    det = 1
    for c in range(n):
        pivot = next((r for r in range(c, n) if A[r][c]), None)
        if pivot is None:
            return 0
        if pivot != c:
            A[c], A[pivot] = A[pivot], A[c]
            det = -det
        det = det * A[c][c] % p
        inv = pow(A[c][c], -1, p)
        for r in range(c + 1, n):
            f = A[r][c] * inv % p
            A[r] = [(x - f * y) % p for x, y in zip(A[r], A[c])]
    return det % p


# -- Smith normal form over Z/p^E ---------------------------------------------


def local_smith_valuations(A, p: int, E: int) -> list[int]:
    """p-valuations of the invariant factors of A over Z_(p) that are nonzero mod p**E."""
    mod = p**E
    A = [[x % mod for x in row] for row in A]
    rows, cols = len(A), len(A[0]) if A else 0
    out = []
    for k in range(min(rows, cols)):
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                if A[i][j]:
                    v = valuation(A[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        A[k], A[i] = A[i], A[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        unit = A[k][k] // p**v
        uinv = pow(unit, -1, mod)
        for i in range(k + 1, rows):
            if A[i][k]:
                f = (A[i][k] // p**v) * uinv % mod
                A[i] = [(x - f * y) % mod for x, y in zip(A[i], A[k])]
        for j in range(k + 1, cols):
            if A[k][j]:
                f = (A[k][j] // p**v) * uinv % mod
                for row in A:
                    row[j] = (row[j] - f * row[k]) % mod
        out.append(v)
    return out


def _coker_length_snf(M: FiniteFrobeniusModule, phi) -> int:
    e = M.cyclic_orders
    r = len(e)
    relations = [list(phi[i]) + [M.p ** e[i] if i == j else 0 for j in range(r)] for i in range(r)]
    return sum(local_smith_valuations(relations, M.p, max(e) + 1))


def _dual_matrix(M: FiniteFrobeniusModule, phi):
    """Matrix of the Pontryagin dual endomorphism on the dual module."""
    e, p, r = M.cyclic_orders, M.p, len(M.cyclic_orders)
    G = [[0] * r for _ in range(r)]
    for i, j in itertools.product(range(r), repeat=2):
        num = phi[i][j] * p ** e[j]
        G[j][i] = num // p ** e[i] if num % p ** e[i] == 0 else None
        if G[j][i] is None:
            raise ModuleError("endomorphism does not respect module relations")
    return G


# -- enumeration --------------------------------------------------------------


def _all_elements(M: FiniteFrobeniusModule) -> np.ndarray:
    grids = np.meshgrid(*(np.arange(M.p**k, dtype=np.int64) for k in M.cyclic_orders), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _image_codes(M: FiniteFrobeniusModule, phi) -> np.ndarray:
    """phi applied to every element of M, each image encoded as one integer."""
    X = _all_elements(M)
    moduli = np.array([M.p**k for k in M.cyclic_orders], dtype=np.int64)
    A = np.array(phi, dtype=np.int64) % moduli[:, None]
    Y = (X @ A.T) % moduli
    radix = np.concatenate(([1], np.cumprod(moduli[:-1])))
    return Y @ radix


def _kernel_length_enum(M: FiniteFrobeniusModule, phi) -> int:
    count = int(np.count_nonzero(_image_codes(M, phi) == 0))
    return valuation(count, M.p)


def _coker_length_enum(M: FiniteFrobeniusModule, phi) -> int:
    image_size = len(np.unique(_image_codes(M, phi)))
    return M.length - valuation(image_size, M.p)


def _within_cap(M, cap):
    return M.order <= cap


def h0_length(M: FiniteFrobeniusModule, cap: int = ENUMERATION_CAP, method: str = "auto") -> int:
    """Length of ker(F - 1)."""
    phi = M.shifted()
    if method == "enum" or (method == "auto" and _within_cap(M, cap)):
        return _kernel_length_enum(M, phi)
    return _coker_length_snf(M, _dual_matrix(M, phi))


def h1_length(M: FiniteFrobeniusModule, cap: int = ENUMERATION_CAP, method: str = "auto") -> int:
    """Length of coker(F - 1)."""
    phi = M.shifted()
    if method == "enum" or (method == "auto" and _within_cap(M, cap)):
        return _coker_length_enum(M, phi)
    return _coker_length_snf(M, phi)


def coker_length(M: FiniteFrobeniusModule, phi, cap: int = ENUMERATION_CAP) -> int:
    if _within_cap(M, cap):
        return _coker_length_enum(M, phi)
    return _coker_length_snf(M, phi)


@dataclass(frozen=True)
class AdditivityResult:
    holds: bool
    lhs: int
    rhs_untwisted: int
    rhs_twisted: int


def verify_restriction_additivity(M: FiniteFrobeniusModule, cap: int = ENUMERATION_CAP) -> AdditivityResult:
    """lg coker(F^2 - 1) == lg coker(F - 1) + lg coker(-F - 1)."""
    if M.p == 2:
        raise ModuleError("the restriction model needs odd p")
    lhs = coker_length(M, M.shifted(power=2), cap)
    a = coker_length(M, M.shifted(), cap)
    b = coker_length(M, M.shifted(sign=-1), cap)
    return AdditivityResult(lhs == a + b, lhs, a, b)


# -- random modules -----------------------------------------------------------


def random_module(rng: random.Random, p: int, max_length: int) -> FiniteFrobeniusModule:
    """A random module of length <= max_length with a random automorphism."""
    total = rng.randint(1, max_length)
    parts = []
    remaining = total
    while remaining:
        k = rng.randint(1, remaining)
        parts.append(k)
        remaining -= k
    e = tuple(sorted(parts, reverse=True))
    r = len(e)
    mode = rng.choice(("generic", "generic", "unipotent", "twisted"))
    while True:
        F = []
        for i in range(r):
            row = []
            for j in range(r):
                x = rng.randrange(p ** e[i])
                if e[j] < e[i]:
                    x = x * p ** (e[i] - e[j])
                if mode != "generic":
                    # F = +-1 + p*R has large fixed or anti-fixed submodules
                    x = p * x + (0 if i != j else (1 if mode == "unipotent" else -1))
                row.append(x % p ** e[i])
            F.append(tuple(row))
        try:
            return FiniteFrobeniusModule(p, e, tuple(F))
        except ModuleError:
            continue


def random_modules(count: int, seed: int = DEFAULT_SEED, order_cap: int = ENUMERATION_CAP,
                   primes=(3, 5, 7)) -> list[FiniteFrobeniusModule]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        p = rng.choice(primes)
        max_length = 0
        while p ** (max_length + 1) <= order_cap:
            max_length += 1
        out.append(random_module(rng, p, max_length))
    return out


# -- Tamagawa factor at p -----------------------------------------------------


def tam_p_zero_check(tate_data):
    """Tamagawa contribution at p vanishes when E[p] is not finite at p.

    The converse is not claimed, so a finite E[p] yields Inconclusive.
    """
    from .hypotheses import ClauseVerdict, Status

    if tate_data is None:
        raise ModuleError("the Tamagawa-at-p criterion needs multiplicative reduction at p")
    evidence = {"ord_q": tate_data.ord_q, "not_finite_at_p": tate_data.not_finite_at_p}
    if tate_data.not_finite_at_p:
        return ClauseVerdict("tam_p.zero", Status.HOLDS, evidence)
    return ClauseVerdict("tam_p.zero", Status.INCONCLUSIVE,
                         {**evidence, "blocking": "E[p] finite at p; the criterion is silent"})
