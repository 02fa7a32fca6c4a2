"""Polynomial sequences g(n) = g_0 g_1^{C(n,1)} ... g_d^{C(n,d)} in a filtered group."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .nilgroup import Element, FilteredGroup, GroupError, RationalSubgroup
from .scalars import Ball, binom, dist_to_int, is_exact, midpoint, radius, simplify, upper


class SequenceError(ValueError):
    pass


def _same(a, b) -> bool:
    """Exact equality, or overlap for ball values."""
    if is_exact(a) and is_exact(b):
        return Fraction(a) == Fraction(b)
    return abs(midpoint(a) - midpoint(b)) <= radius(a) + radius(b)


def elements_agree(x: Sequence, y: Sequence) -> bool:
    return len(x) == len(y) and all(_same(a, b) for a, b in zip(x, y))


@dataclass(frozen=True, eq=False)
class PolySequence:
    group: FilteredGroup
    coeffs: Tuple[Element, ...]

    def __post_init__(self):
        G = self.group
        cs = [G.check(c) for c in self.coeffs]
        if len(cs) > G.d + 1:
            extra = cs[G.d + 1:]
            if any(any(x != 0 for x in c) for c in extra):
                raise SequenceError("more Taylor coefficients than the filtration degree allows")
            cs = cs[: G.d + 1]
        while len(cs) < G.d + 1:
            cs.append(G.identity())
        for i, c in enumerate(cs):
            if i >= 2 and not G.in_level(c, i):
                raise SequenceError(f"Taylor coefficient g_{i} is not in G_{i}")
        object.__setattr__(self, "coeffs", tuple(tuple(simplify(x) for x in c) for c in cs))

    @property
    def d(self) -> int:
        return self.group.d

    @classmethod
    def constant(cls, G: FilteredGroup, x: Sequence) -> "PolySequence":
        return cls(G, (G.check(x),))

    @classmethod
    def identity(cls, G: FilteredGroup) -> "PolySequence":
        return cls(G, (G.identity(),))

    @classmethod
    def from_values(cls, G: FilteredGroup, values: Sequence[Sequence]) -> "PolySequence":
        """Taylor coefficients from h(0), ..., h(D) by the unitriangular solve
        g_j = (g_0 g_1^{C(j,1)} ... g_{j-1}^{C(j,j-1)})^{-1} h(j)."""
        coeffs: List[Element] = []
        for j, hj in enumerate(values):
            prefix = G.identity()
            for i, gi in enumerate(coeffs):
                prefix = G.multiply(prefix, G.power(gi, binom(j, i)))
            gj = list(G.multiply(G.invert(prefix), G.check(hj)))
            if j >= 2:
                # coordinates outside G_j vanish identically; balls that
                # contain 0 there are snapped to the exact value
                lvl = G.level(j)
                for i in range(G.m):
                    if i not in lvl and not is_exact(gj[i]) and _same(gj[i], Fraction(0)):
                        gj[i] = Fraction(0)
            coeffs.append(tuple(gj))
        return cls(G, tuple(coeffs))

    @classmethod
    def from_coordinates(cls, G: FilteredGroup, coord_polys: Sequence[Sequence]) -> "PolySequence":
        """Sequence whose i-th coordinate is sum_j coord_polys[j][i] C(n, j)."""
        D = len(coord_polys) - 1

        def at(n):
            return tuple(sum((coord_polys[j][i] * binom(n, j) for j in range(D + 1)), Fraction(0))
                         for i in range(G.m))

        D_eval = max(D, G.d)
        g = cls.from_values(G, [at(n) for n in range(D_eval + 1)])
        for n in range(D_eval + 1, D_eval + 3):
            if not elements_agree(evaluate(g, n), at(n)):
                raise SequenceError("coordinates do not define a polynomial sequence adapted to the filtration")
        return g

    def to_json(self):
        from .scalars import format_scalar

        return [[format_scalar(x) for x in c] for c in self.coeffs]


def evaluate(g: PolySequence, n: int) -> Element:
    G = g.group
    out = G.identity()
    for j, c in enumerate(g.coeffs):
        if j and all(x == 0 for x in c):
            continue
        out = G.multiply(out, c if j == 0 else G.power(c, binom(n, j)))
    return tuple(simplify(x) for x in out)


def _verify(g: PolySequence, f, points: Sequence[int]) -> None:
    for n in points:
        if not elements_agree(evaluate(g, n), f(n)):
            raise SequenceError("interpolated sequence disagrees with its definition")


def reindex(g: PolySequence, q: int, r: int) -> PolySequence:
    """n -> g(q n + r)."""
    if q < 1:
        raise SequenceError("q must be positive")
    if q == 1 and r == 0:
        return g
    d = g.d
    f = lambda n: evaluate(g, q * n + r)  # noqa: E731
    out = PolySequence.from_values(g.group, [f(n) for n in range(d + 1)])
    _verify(out, f, [d + 1])
    return out


def pointwise_product(g1: PolySequence, g2: PolySequence) -> PolySequence:
    if g1.group is not g2.group:
        raise SequenceError("sequences live in different groups")
    G = g1.group
    f = lambda n: G.multiply(evaluate(g1, n), evaluate(g2, n))  # noqa: E731
    out = PolySequence.from_values(G, [f(n) for n in range(G.d + 1)])
    _verify(out, f, [G.d + 1, G.d + 2])
    return out


def product_of(G: FilteredGroup, seqs: Sequence[PolySequence]) -> PolySequence:
    out = PolySequence.identity(G)
    for s in seqs:
        out = pointwise_product(out, s)
    return out


def inverse_sequence(g: PolySequence) -> PolySequence:
    G = g.group
    f = lambda n: G.invert(evaluate(g, n))  # noqa: E731
    out = PolySequence.from_values(G, [f(n) for n in range(G.d + 1)])
    _verify(out, f, [G.d + 1])
    return out


def to_subgroup(g: PolySequence, S: RationalSubgroup) -> PolySequence:
    """The same sequence in the Mal'cev coordinates of S (g must take values in S)."""
    if g.group is not S.ambient:
        raise SequenceError("sequence is not in the subgroup's ambient group")
    return PolySequence(S.inner, tuple(S.coords(c) for c in g.coeffs))


def from_subgroup(g: PolySequence, S: RationalSubgroup) -> PolySequence:
    if g.group is not S.inner:
        raise SequenceError("sequence is not in the subgroup's coordinates")
    return PolySequence(S.ambient, tuple(S.embed(c) for c in g.coeffs))


def coordinate_polynomials(g: PolySequence, degree: Optional[int] = None) -> List[List[object]]:
    """For each coordinate i, binomial coefficients c_{i,j} with
    coordinate_i(g(n)) = sum_j c_{i,j} C(n, j)."""
    G = g.group
    D = degree if degree is not None else G.d * max(1, G.step)
    vals = [evaluate(g, n) for n in range(D + 2)]
    out = []
    for i in range(G.m):
        col = [v[i] for v in vals]
        diffs = []
        while len(col) > 1:
            diffs.append(col[0])
            col = [col[k + 1] - col[k] for k in range(len(col) - 1)]
        # col[0] is now the (D+1)-th difference, which must vanish
        if not _same(col[0], Fraction(0)):
            raise SequenceError("coordinate degree exceeds the interpolation bound")
        out.append([simplify(x) for x in diffs[: D + 1]])
    return out


# -- horizontal characters and phases ------------------------------------------


@dataclass(frozen=True)
class HorizontalCharacter:
    k: Tuple[int, ...]

    @property
    def magnitude(self) -> int:
        return max((abs(x) for x in self.k), default=0)

    def canonical(self) -> "HorizontalCharacter":
        for x in reversed(self.k):
            if x:
                return self if x > 0 else HorizontalCharacter(tuple(-y for y in self.k))
        return self


@dataclass(frozen=True, eq=False)
class PolyPhase:
    coeffs: Tuple[object, ...]

    def value(self, n: int):
        return sum((b * binom(n, j) for j, b in enumerate(self.coeffs)), Fraction(0))


def horizontal_taylor(g: PolySequence) -> List[Tuple[object, ...]]:
    """Horizontal coordinates of each Taylor coefficient (these add up in n)."""
    h = g.group.h
    return [tuple(c[:h]) for c in g.coeffs]


def compose_horizontal(eta: HorizontalCharacter, g: PolySequence) -> PolyPhase:
    G = g.group
    if len(eta.k) != G.h:
        raise GroupError(f"character has {len(eta.k)} entries, group has {G.h} horizontal coordinates")
    coeffs = []
    for c in horizontal_taylor(g):
        acc = Fraction(0)
        for ki, x in zip(eta.k, c):
            if ki:
                acc = x * ki + acc
        coeffs.append(simplify(acc))
    return PolyPhase(tuple(coeffs))


def c_infty_norm(P: PolyPhase, N: int):
    """sup_{j>=1} N^j ||beta_j||; exact for exact phases, a ball otherwise."""
    if N < 1:
        raise ValueError("N must be positive")
    best = Fraction(0)
    for j, b in enumerate(P.coeffs):
        if j == 0:
            continue
        v = dist_to_int(b) * (N ** j)
        if upper(v) > upper(best) or (upper(v) == upper(best) and isinstance(best, Ball)):
            best = v
    return simplify(best)
