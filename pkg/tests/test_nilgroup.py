import random
from fractions import Fraction

import pytest

from nilfactor.nilgroup import (GroupError, HeightOverflowError, SubgroupClosureError, custom_group,
                                induced_subgroup_basis, kernel_subgroup, full_subgroup, preset, trivial_group,
                                validate_group)
from conftest import rand_q

PRESETS = ["torus:1", "torus:2", "heisenberg", "product:heisenberg,torus:1", "torus:3:2"]


def test_heisenberg_law():
    H = preset("heisenberg")
    assert H.multiply((1, 0, 0), (0, 1, 0)) == (1, 1, 1)
    assert H.multiply((0, 1, 0), (1, 0, 0)) == (1, 1, 0)
    assert H.invert((1, 1, 1)) == (-1, -1, 0)
    assert H.multiply((1, 1, 1), (-1, -1, 0)) == H.identity()


def test_identity_and_inverse(rng):
    H = preset("heisenberg")
    for _ in range(20):
        x = tuple(rand_q(rng) for _ in range(3))
        assert H.multiply(H.identity(), x) == x
    T = preset("torus:1")
    assert T.invert((Fraction(1, 4),)) == (Fraction(-1, 4),)
    assert T.invert(T.identity()) == T.identity()


def _unipotent(x):
    a, b, c = x
    return [[1, a, c], [0, 1, b], [0, 0, 1]]


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def test_heisenberg_matches_matrices(rng):
    H = preset("heisenberg")
    for _ in range(1000):
        x = tuple(rand_q(rng) for _ in range(3))
        y = tuple(rand_q(rng) for _ in range(3))
        assert _unipotent(H.multiply(x, y)) == _matmul(_unipotent(x), _unipotent(y))


@pytest.mark.parametrize("gid", PRESETS)
def test_group_axioms(gid):
    G = preset(gid)
    validate_group(G, trials=1000, rng=random.Random(7))


@pytest.mark.parametrize("gid", PRESETS)
def test_lattice_closure(gid, rng):
    G = preset(gid)
    for _ in range(200):
        p = tuple(Fraction(rng.randint(-20, 20)) for _ in range(G.m))
        q = tuple(Fraction(rng.randint(-20, 20)) for _ in range(G.m))
        assert G.is_lattice_point(G.multiply(p, q))
        assert G.is_lattice_point(G.invert(p))


def test_quasi_metric(rng):
    H = preset("heisenberg")
    assert H.quasi_metric((1, 0, 0), H.identity()) == 1
    for _ in range(200):
        x, y, g = (tuple(rand_q(rng) for _ in range(3)) for _ in range(3))
        assert H.quasi_metric(x, x) == 0
        assert H.quasi_metric(H.multiply(x, g), H.multiply(y, g)) == H.quasi_metric(x, y)
        if x != y:
            assert H.quasi_metric(x, y) > 0


def test_rationality_height():
    T = preset("torus:1")
    H = preset("heisenberg")
    assert T.rationality_height((Fraction(1, 3),), 10) == 3
    assert T.rationality_height((Fraction(4),), 1) == 1
    assert H.rationality_height((Fraction(1, 2), Fraction(1, 2), Fraction(0)), 16) == 8
    assert H.rationality_height((Fraction(1, 2), Fraction(1, 2), Fraction(0)), 7) is None
    assert H.rationality_height((Fraction(1, 3), Fraction(0), Fraction(1, 5)), 100) == 15


def test_rationality_height_brute_force(rng):
    H = preset("heisenberg")
    for _ in range(100):
        a = tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(3))
        p, r = a, 1
        while not H.is_lattice_point(p):
            p, r = H.multiply(p, a), r + 1
        assert H.rationality_height(a, 200) == r


def test_rationality_height_needs_exact():
    from nilfactor.scalars import parse_scalar
    with pytest.raises(GroupError):
        preset("torus:1").rationality_height((parse_scalar("phi"),), 10)


def test_induced_subgroups():
    H = preset("heisenberg")
    S = induced_subgroup_basis(H, [(1, 1, 0), (0, 0, 1)], 4)
    assert S.dimension == 2
    assert S.contains((Fraction(3, 2), Fraction(3, 2), Fraction(7)))
    assert not S.contains((1, 0, 0))
    assert induced_subgroup_basis(H, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], 4).dimension == 3
    assert induced_subgroup_basis(H, [], 4).dimension == 0
    with pytest.raises(SubgroupClosureError):
        induced_subgroup_basis(H, [(1, 0, 0), (0, 1, 0)], 4)
    with pytest.raises(HeightOverflowError):
        induced_subgroup_basis(H, [(Fraction(1, 5), 0, 0)], 4)


def test_kernel_subgroup_of_character():
    H = preset("heisenberg")
    S = kernel_subgroup(full_subgroup(H), (-1, 1))
    assert S.dimension == 2
    x = S.embed((Fraction(2, 3), Fraction(5)))
    assert x[0] == x[1]
    assert S.coords(x) == (Fraction(2, 3), Fraction(5))


def test_trivial_group():
    G = trivial_group()
    assert G.m == 0
    assert G.multiply((), ()) == ()
    assert G.rationality_height((), 1) == 1


def test_custom_group_validation():
    # Heisenberg written by hand
    law = [[], [], [[[1, 0, 0, 0, 1, 0], "1"]]]
    G = custom_group("h", 3, 2, law, [[2]])
    assert G.multiply((1, 0, 0), (0, 1, 0)) == (1, 1, 1)
    bad = [[], [], [[[1, 0, 0, 0, 1, 0], "1/2"]]]
    with pytest.raises(GroupError):
        custom_group("bad", 3, 2, bad, [[2]])


def test_preset_errors():
    with pytest.raises(GroupError):
        preset("klein:2")
    with pytest.raises(GroupError):
        preset("heisenberg:1")
