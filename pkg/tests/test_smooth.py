from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilfactor.nilgroup import GroupError, preset
from nilfactor.polyseq import PolySequence
from nilfactor.scalars import parse_scalar
from nilfactor.smooth import SmoothBase, enumerate_smooth, is_smooth, largest_prime_factor, sequence_period

F = Fraction


def test_largest_prime_factor():
    assert largest_prime_factor(12) == 3
    assert largest_prime_factor(1) == 1
    assert largest_prime_factor(97) == 97


def test_is_smooth():
    k3 = SmoothBase.fixed(3)
    assert is_smooth(12, k3)
    assert not is_smooth(14, k3)
    assert is_smooth(1, SmoothBase.fixed(2))
    assert is_smooth(1, SmoothBase.prime_set([7]))
    assert not is_smooth(2, SmoothBase.prime_set([7]))


def test_enumerate_smooth():
    assert enumerate_smooth(20, SmoothBase.fixed(2)) == [1, 2, 4, 8, 16]
    assert enumerate_smooth(10, SmoothBase.fixed(3)) == [1, 2, 3, 4, 6, 8, 9]
    for base in [SmoothBase.fixed(2), SmoothBase.fixed(5), SmoothBase.prime_set([3, 7]), SmoothBase.fixed(97)]:
        assert enumerate_smooth(10 ** 4, base) == [n for n in range(1, 10 ** 4) if is_smooth(n, base)]


@given(st.integers(1, 5000), st.sampled_from([2, 3, 5, 7, 11]))
def test_largest_prime_factor_matches_smoothness(n, k):
    assert is_smooth(n, SmoothBase.fixed(k)) == (largest_prime_factor(n) <= k)


def test_base_presets():
    b = SmoothBase.loglog()
    assert b.bound(2 ** 20) == 4
    assert b.bound(10) == 2
    with pytest.raises(ValueError):
        SmoothBase.prime_set([4])
    with pytest.raises(ValueError):
        SmoothBase.fixed(1)
    for base in [SmoothBase.fixed(3), SmoothBase.prime_set([2, 5]), SmoothBase.loglog()]:
        assert SmoothBase.from_json(base.to_json()) == base


def test_sequence_period():
    T = preset("torus:1")
    assert sequence_period(PolySequence(T, ((F(0),), (F(1, 3),))), 10) == 3
    assert sequence_period(PolySequence(T, ((F(2, 7),),)), 10) == 1
    H = preset("heisenberg")
    # Taylor coefficient g_1 = (1/2, 1/2, 0): gamma(n) = g_1^n
    g = PolySequence(H, ((F(0),) * 3, (F(1, 2), F(1, 2), F(0)), (F(0),) * 3))
    assert sequence_period(g, 16) == 8
    # coordinates (n/2, n/2, 0)
    c = PolySequence.from_coordinates(H, [(F(0),) * 3, (F(1, 2), F(1, 2), F(0))])
    assert sequence_period(c, 16) == 4
    with pytest.raises(GroupError):
        sequence_period(PolySequence(T, ((F(0),), (parse_scalar("phi"),))), 5)


def test_period_divides_other_periods():
    H = preset("heisenberg")
    g = PolySequence(H, ((F(0),) * 3, (F(1, 2), F(1, 3), F(1, 5)), (F(0), F(0), F(1, 4))))
    p = sequence_period(g, 500)
    assert p is not None
    for mult in range(1, 6):
        P = p * mult
        for n in range(2 * P * 2):
            from nilfactor.polyseq import evaluate
            a = H.multiply(H.invert(evaluate(g, n)), evaluate(g, n + P))
            assert H.is_lattice_point(a)
    for q in range(1, p):
        assert p % q == 0 or sequence_period(g, q) is None
