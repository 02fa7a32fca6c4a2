import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nilfactor.nilgroup import preset
from nilfactor.polyseq import (HorizontalCharacter, PolyPhase, PolySequence, SequenceError, c_infty_norm,
                               compose_horizontal, evaluate, inverse_sequence, pointwise_product, reindex)
from nilfactor.scalars import dist_to_int, parse_scalar, upper
from conftest import rand_q

F = Fraction


def rand_seq(G, rng):
    rows = []
    for j in range(G.d + 1):
        lvl = G.level(j)
        rows.append(tuple(rand_q(rng) if (j < 2 or i in lvl) else F(0) for i in range(G.m)))
    return PolySequence(G, tuple(rows))


def test_evaluate_examples():
    T = preset("torus:1")
    g = PolySequence(T, ((F(0),), (F(1, 2),)))
    assert evaluate(g, 5) == (F(5, 2),)
    assert dist_to_int(evaluate(g, 5)[0]) == F(1, 2)
    H = preset("heisenberg")
    h = PolySequence(H, ((F(1), F(2), F(3)), (F(1), F(1), F(0)), (F(0),) * 3))
    assert evaluate(h, 0) == (F(1), F(2), F(3))
    h1 = PolySequence(H, ((F(0),) * 3, (F(1), F(1), F(0)), (F(0),) * 3))
    assert evaluate(h1, 2) == (F(2), F(2), F(1))


def test_taylor_coefficients_respect_filtration():
    H = preset("heisenberg")
    with pytest.raises(SequenceError):
        PolySequence(H, ((F(0),) * 3, (F(0),) * 3, (F(1), F(0), F(0))))


def test_reindex_example():
    T = preset("torus:1:2")
    g = PolySequence(T, ((F(0),), (F(0),), (F(1),)))
    h = reindex(g, 3, 2)
    assert h.coeffs == ((F(1),), (F(9),), (F(9),))
    assert [evaluate(h, n)[0] for n in range(4)] == [1, 10, 28, 55]
    assert reindex(g, 1, 0) is g


@pytest.mark.parametrize("gid", ["torus:2", "heisenberg", "torus:1:3"])
def test_reindex_defining_property(gid):
    rng = random.Random(3)
    G = preset(gid)
    for _ in range(1000 // 3):
        g = rand_seq(G, rng)
        q, r, n = rng.randint(1, 9), rng.randint(0, 9), rng.randint(-5, 30)
        assert evaluate(reindex(g, q, r), n) == evaluate(g, q * n + r)


def test_reindex_associativity(rng):
    H = preset("heisenberg")
    for _ in range(30):
        g = rand_seq(H, rng)
        q1, r1, q2, r2 = rng.randint(1, 5), rng.randint(0, 5), rng.randint(1, 5), rng.randint(0, 5)
        a = reindex(reindex(g, q1, r1), q2, r2)
        b = reindex(g, q1 * q2, q1 * r2 + r1)
        assert a.coeffs == b.coeffs


def test_pointwise_products(rng):
    T = preset("torus:1")
    a, b = F(1, 7), F(2, 9)
    ga = PolySequence(T, ((F(0),), (a,)))
    gb = PolySequence(T, ((F(0),), (b,)))
    assert pointwise_product(ga, gb).coeffs == ((F(0),), (a + b,))
    H = preset("heisenberg")
    for _ in range(10):
        g1 = PolySequence(H, (tuple(rand_q(rng) for _ in range(3)), tuple(rand_q(rng) for _ in range(3)), (F(0),) * 3))
        g2 = PolySequence(H, (tuple(rand_q(rng) for _ in range(3)), tuple(rand_q(rng) for _ in range(3)), (F(0),) * 3))
        p = pointwise_product(g1, g2)
        assert p.coeffs[2][:2] == (0, 0)
        for n in range(21):
            assert evaluate(p, n) == H.multiply(evaluate(g1, n), evaluate(g2, n))
        assert pointwise_product(g1, PolySequence.identity(H)).coeffs[:2] == g1.coeffs[:2]
    with pytest.raises(SequenceError):
        pointwise_product(ga, g1)


def test_inverse_sequence(rng):
    H = preset("heisenberg")
    g = rand_seq(H, rng)
    gi = inverse_sequence(g)
    for n in range(10):
        assert H.multiply(evaluate(g, n), evaluate(gi, n)) == H.identity()


def test_compose_horizontal_examples():
    T = preset("torus:1")
    alpha = F(3, 11)
    g = PolySequence(T, ((F(0),), (alpha,)))
    assert compose_horizontal(HorizontalCharacter((2,)), g).coeffs == (0, 2 * alpha)
    assert all(c == 0 for c in compose_horizontal(HorizontalCharacter((0,)), g).coeffs)
    H = preset("heisenberg")
    phi = parse_scalar("phi")
    h = PolySequence.from_coordinates(H, [(F(0),) * 3, (phi, phi * phi, F(0))])
    P = compose_horizontal(HorizontalCharacter((-1, 1)), h)
    assert dist_to_int(P.coeffs[1]).contains(0)
    assert upper(c_infty_norm(P, 4096)) < F(1, 10 ** 60)


def test_compose_additive(rng):
    H = preset("heisenberg")
    eta = HorizontalCharacter((3, -2))
    for _ in range(20):
        g1, g2 = rand_seq(H, rng), rand_seq(H, rng)
        a = compose_horizontal(eta, pointwise_product(g1, g2)).coeffs
        b = compose_horizontal(eta, g1).coeffs
        c = compose_horizontal(eta, g2).coeffs
        assert all((x - y - z).denominator == 1 for x, y, z in zip(a, b, c))


def test_c_infty_norm_examples():
    assert c_infty_norm(PolyPhase((F(0), F(1, 4))), 8) == 2
    assert c_infty_norm(PolyPhase((F(0), F(0), F(1, 64))), 8) == 1
    assert c_infty_norm(PolyPhase((F(0), F(3, 4))), 4) == 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=50), min_size=2, max_size=4),
       st.integers(1, 200))
def test_c_infty_norm_scaling(betas, N):
    P = PolyPhase(tuple(betas))
    assert c_infty_norm(P, 2 * N) >= c_infty_norm(P, N)
    terms = [dist_to_int(b) * N ** j for j, b in enumerate(betas) if j]
    terms2 = [dist_to_int(b) * (2 * N) ** j for j, b in enumerate(betas) if j]
    assert all(t2 == t * 2 ** (j + 1) for j, (t, t2) in enumerate(zip(terms, terms2)))
