import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kolycheck.cohomology import (
    FiniteFrobeniusModule,
    ModuleError,
    h0_length,
    h1_length,
    local_smith_valuations,
    random_module,
    tam_p_zero_check,
    verify_restriction_additivity,
)
from kolycheck.hypotheses import Status
from kolycheck.padic import PadicNumber
from kolycheck.tate_period import tate_data_from_q


def module(p, orders, F):
    return FiniteFrobeniusModule(p, tuple(orders), tuple(tuple(r) for r in F))


@pytest.mark.parametrize("M,length", [
    (module(5, [2], [[7]]), 0),
    (module(5, [1], [[1]]), 1),
    (module(5, [1, 1], [[1, 1], [0, 1]]), 1),
])
def test_lengths(M, length):
    for method in ("enum", "snf"):
        assert h0_length(M, method=method) == length
        assert h1_length(M, method=method) == length


@pytest.mark.parametrize("a,lhs,untwisted,twisted", [(2, 0, 0, 0), (1, 1, 1, 0), (-1, 1, 0, 1)])
def test_additivity_examples(a, lhs, untwisted, twisted):
    result = verify_restriction_additivity(module(5, [1], [[a % 5]]))
    assert result.holds
    assert (result.lhs, result.rhs_untwisted, result.rhs_twisted) == (lhs, untwisted, twisted)


def test_validation():
    with pytest.raises(ModuleError):
        module(5, [1], [[5]])  # not invertible
    with pytest.raises(ModuleError):
        module(5, [1, 2], [[1, 0], [0, 1]])  # orders must be non-increasing
    with pytest.raises(ModuleError):
        module(5, [2, 1], [[1, 1], [0, 1]])  # Z/5 -> Z/25 must land in 5Z/25
    with pytest.raises(ModuleError):
        verify_restriction_additivity(module(2, [1], [[1]]))


def test_smith_valuations():
    assert local_smith_valuations([[5, 0], [0, 25]], 5, 4) == [1, 2]
    assert local_smith_valuations([[2, 5], [4, 10]], 5, 3) == [0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([3, 5, 7]))
def test_snf_agrees_with_enumeration(seed, p):
    M = random_module(random.Random(seed), p, 4 if p == 3 else 3)
    assert h0_length(M, method="enum") == h0_length(M, method="snf")
    assert h1_length(M, method="enum") == h1_length(M, method="snf")
    assert h0_length(M) == h1_length(M)
    assert verify_restriction_additivity(M).holds


def _tate(ord_q):
    return tate_data_from_q(PadicNumber.from_parts(5, ord_q, 6, 30), ord_q, True)


def test_tamagawa_at_p():
    assert tam_p_zero_check(_tate(1)).status is Status.HOLDS
    assert tam_p_zero_check(_tate(5)).status is Status.INCONCLUSIVE
    with pytest.raises(ModuleError):
        tam_p_zero_check(None)
