"""Filtered nilpotent groups in Mal'cev coordinates.

A group is given by per-coordinate multiplication polynomials

    (x·y)_i = x_i + y_i + P_i(x_<i, y_<i)

with exact rational coefficients.  Γ is the set of integer points.  The
presets (tori, the Heisenberg group and direct products of these) have the
special form where the first ``h`` coordinates add and every ``P_i`` is a
bilinear form in those horizontal coordinates; that case has closed-form
powers and is the one in which rational subgroups are built exactly.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import lattice
from .poly import Poly
from .scalars import Ball, binom, height, is_exact, midpoint, radius, simplify, upper

Element = Tuple[object, ...]


class GroupError(ValueError):
    """Malformed group data or an element of the wrong shape."""


class SubgroupClosureError(GroupError):
    pass


class HeightOverflowError(GroupError):
    pass


def _zero(m: int) -> Element:
    return tuple(Fraction(0) for _ in range(m))


@dataclass(frozen=True, eq=False)
class FilteredGroup:
    name: str
    m: int
    d: int
    law: Tuple[Poly, ...]
    # filtration[i] = coordinates spanning G_i, for i = 0..d+1
    filtration: Tuple[FrozenSet[int], ...]
    Q0: int = 1
    h: int = field(init=False)
    bilinear: Optional[Tuple[Tuple[Tuple[Fraction, ...], ...], ...]] = field(init=False)
    step: int = field(init=False)

    def __post_init__(self):
        if len(self.law) != self.m:
            raise GroupError("need one multiplication polynomial per coordinate")
        if len(self.filtration) != self.d + 2:
            raise GroupError("filtration must list G_0 .. G_{d+1}")
        for i, P in enumerate(self.law):
            if P.n != 2 * self.m:
                raise GroupError("multiplication polynomials take 2m variables")
            used = P.variables_used()
            if any((v % self.m) >= i for v in used):
                raise GroupError(f"coordinate {i} depends on coordinates >= {i}")
        h = 0
        while h < self.m and self.law[h].is_zero():
            h += 1
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "bilinear", self._detect_bilinear())
        object.__setattr__(self, "step", self._compute_step())

    # -- structure ---------------------------------------------------------

    def _detect_bilinear(self):
        m, h = self.m, self.h
        B = []
        for i in range(h, m):
            mat = [[Fraction(0)] * h for _ in range(h)]
            for mono, c in self.law[i].terms.items():
                xs = [j for j in range(m) if mono[j]]
                ys = [j for j in range(m) if mono[m + j]]
                if sum(mono) != 2 or len(xs) != 1 or len(ys) != 1:
                    return None
                p, q = xs[0], ys[0]
                if p >= h or q >= h:
                    return None
                mat[p][q] += c
            B.append(tuple(tuple(r) for r in mat))
        return tuple(B)

    def _compute_step(self) -> int:
        if self.m == 0 or all(P.is_zero() for P in self.law):
            return 1
        if self.bilinear is not None:
            return 2
        # iterated commutators [[x1, x2], x3] ... on symbolic points
        n = self.m * (self.m + 1)
        gens = [tuple(Poly.var(b * self.m + i, n) for i in range(self.m)) for b in range(self.m + 1)]
        c = gens[0]
        s = 1
        for b in range(1, self.m + 1):
            c = self.commutator(c, gens[b])
            if all(isinstance(x, Poly) and x.is_zero() or x == 0 for x in c):
                break
            s += 1
        return s

    @property
    def horizontal(self) -> range:
        return range(self.h)

    @property
    def vertical(self) -> range:
        return range(self.h, self.m)

    def level(self, i: int) -> FrozenSet[int]:
        if i <= 0:
            return self.filtration[0]
        if i > self.d:
            return frozenset()
        return self.filtration[i]

    def identity(self) -> Element:
        return _zero(self.m)

    def check(self, a: Sequence) -> Element:
        if len(a) != self.m:
            raise GroupError(f"expected {self.m} coordinates, got {len(a)}")
        return tuple(Fraction(x) if isinstance(x, int) else x for x in a)

    # -- arithmetic --------------------------------------------------------

    def multiply(self, a: Sequence, b: Sequence) -> Element:
        a = self.check(a)
        b = self.check(b)
        m, h = self.m, self.h
        if self.bilinear is not None:
            out = [a[i] + b[i] for i in range(m)]
            for j, mat in enumerate(self.bilinear):
                acc = None
                for p in range(h):
                    row = mat[p]
                    for q in range(h):
                        if row[q]:
                            t = a[p] * b[q] * row[q]
                            acc = t if acc is None else acc + t
                if acc is not None:
                    out[h + j] = out[h + j] + acc
            return tuple(out)
        vals = list(a) + list(b)
        return tuple(a[i] + b[i] + self.law[i].evaluate(vals) for i in range(m))

    def invert(self, a: Sequence) -> Element:
        a = self.check(a)
        m, h = self.m, self.h
        if self.bilinear is not None:
            out = [-a[i] for i in range(m)]
            for j, mat in enumerate(self.bilinear):
                for p in range(h):
                    for q in range(h):
                        if mat[p][q]:
                            out[h + j] = out[h + j] + a[p] * a[q] * mat[p][q]
            return tuple(out)
        y: List[object] = [Fraction(0)] * m
        for i in range(m):
            y[i] = -a[i] - self.law[i].evaluate(list(a) + y)
        return tuple(y)

    def power(self, a: Sequence, t) -> Element:
        """a^t for integer t, or for real / symbolic t via the one-parameter
        subgroup through a (polynomial in t)."""
        a = self.check(a)
        if self.bilinear is not None:
            h = self.h
            c2 = binom(t, 2)
            out = [a[i] * t for i in range(self.m)]
            for j, mat in enumerate(self.bilinear):
                for p in range(h):
                    for q in range(h):
                        if mat[p][q]:
                            out[h + j] = out[h + j] + a[p] * a[q] * mat[p][q] * c2
            return tuple(simplify(x) if not hasattr(x, "terms") else x for x in out)
        if isinstance(t, int):
            if t < 0:
                return self.power(self.invert(a), -t)
            out = self.identity()
            base = a
            while t:
                if t & 1:
                    out = self.multiply(out, base)
                base = self.multiply(base, base)
                t >>= 1
            return out
        if isinstance(t, Fraction) and t.denominator == 1:
            return self.power(a, int(t))
        # interpolate the integer powers a^0 .. a^m (coordinates are
        # polynomials in the exponent of degree <= m)
        pts = [self.power(a, n) for n in range(self.m + 1)]
        out = []
        for i in range(self.m):
            col = [p[i] for p in pts]
            diffs = []
            while col:
                diffs.append(col[0])
                col = [col[k + 1] - col[k] for k in range(len(col) - 1)]
            acc = Fraction(0)
            for j, dj in enumerate(diffs):
                acc = acc + binom(t, j) * dj
            out.append(acc)
        return tuple(out)

    def commutator(self, a, b) -> Element:
        return self.multiply(self.multiply(self.invert(a), self.invert(b)), self.multiply(a, b))

    def is_lattice_point(self, a: Sequence) -> bool:
        for x in self.check(a):
            if not is_exact(x) or Fraction(x).denominator != 1:
                return False
        return True

    def quasi_metric(self, a, b):
        """|psi(a b^{-1})|_inf; exactly right-invariant."""
        c = self.multiply(a, self.invert(b))
        best = Fraction(0)
        for x in c:
            ax = simplify(Ball(abs(midpoint(x)), radius(x))) if isinstance(x, Ball) else abs(Fraction(x))
            if upper(ax) > upper(best):
                best = ax
        return best

    def rationality_height(self, a, bound: int) -> Optional[int]:
        a = self.check(a)
        if not all(is_exact(x) for x in a):
            raise GroupError("rationality height needs exact coordinates")
        if self.bilinear is not None:
            # a^r is in Γ only if r clears the horizontal denominators
            r0 = 1
            for x in a[:self.h]:
                den = Fraction(x).denominator
                r0 = r0 * den // math.gcd(r0, den)
            for r in range(r0, bound + 1, r0):
                if self.is_lattice_point(self.power(a, r)):
                    return r
            return None
        p = a
        for r in range(1, bound + 1):
            if self.is_lattice_point(p):
                return r
            p = self.multiply(p, a)
        return None

    def in_level(self, a: Sequence, i: int) -> bool:
        lvl = self.level(i)
        return all(x == 0 for j, x in enumerate(a) if j not in lvl)

    def describe(self) -> dict:
        return {"name": self.name, "m": self.m, "d": self.d, "h": self.h, "step": self.step}


# -- presets ---------------------------------------------------------------


def _filtration(m: int, d: int, levels: Dict[int, Sequence[int]]) -> Tuple[FrozenSet[int], ...]:
    full = frozenset(range(m))
    out = [full, full]
    for i in range(2, d + 1):
        out.append(frozenset(levels.get(i, ())))
    out.append(frozenset())
    return tuple(out)


def torus(m: int, d: int = 1) -> FilteredGroup:
    law = tuple(Poly(2 * m) for _ in range(m))
    return FilteredGroup(f"torus:{m}", m, d, law, _filtration(m, d, {i: range(m) for i in range(2, d + 1)}))


def heisenberg(d: int = 2) -> FilteredGroup:
    if d < 2:
        raise GroupError("the Heisenberg filtration needs degree >= 2")
    n = 6
    P2 = Poly(n, {(1, 0, 0, 0, 1, 0): Fraction(1)})  # x_0 * y_1
    law = (Poly(n), Poly(n), P2)
    return FilteredGroup("heisenberg" if d == 2 else f"heisenberg:{d}", 3, d, law,
                         _filtration(3, d, {i: [2] for i in range(2, d + 1)}))


def product(*groups: FilteredGroup) -> FilteredGroup:
    """Direct product with all horizontal coordinates listed first."""
    if not groups:
        return torus(0)
    m = sum(g.m for g in groups)
    d = max(g.d for g in groups)
    new_index: List[List[int]] = []
    hcount = sum(g.h for g in groups)
    hpos, vpos = 0, hcount
    for g in groups:
        idx = []
        for i in range(g.m):
            if i < g.h:
                idx.append(hpos)
                hpos += 1
            else:
                idx.append(vpos)
                vpos += 1
        new_index.append(idx)
    law: List[Poly] = [Poly(2 * m) for _ in range(m)]
    for g, idx in zip(groups, new_index):
        for i in range(g.m):
            terms = {}
            for mono, c in g.law[i].terms.items():
                new = [0] * (2 * m)
                for j in range(g.m):
                    new[idx[j]] += mono[j]
                    new[m + idx[j]] += mono[g.m + j]
                terms[tuple(new)] = c
            law[idx[i]] = Poly(2 * m, terms)
    levels = []
    for lv in range(d + 2):
        s = set()
        for g, idx in zip(groups, new_index):
            s.update(idx[j] for j in g.level(lv))
        levels.append(frozenset(s))
    levels[0] = levels[1] = frozenset(range(m))
    levels[-1] = frozenset()
    name = "product:" + ",".join(g.name for g in groups)
    return FilteredGroup(name, m, d, tuple(law), tuple(levels), max(g.Q0 for g in groups))


def trivial_group(d: int = 1) -> FilteredGroup:
    return FilteredGroup("trivial", 0, d, (), tuple(frozenset() for _ in range(d + 2)))


def preset(spec: str, degree: Optional[int] = None) -> FilteredGroup:
    """Groups by id: "torus:m", "torus:m:d", "heisenberg", "heisenberg:d",
    "product:<id>,<id>,..." (each factor without nested products)."""
    spec = spec.strip()
    if spec.startswith("product:"):
        parts = [p for p in spec[len("product:"):].split(",") if p]
        return product(*(preset(p, degree) for p in parts))
    bits = spec.split(":")
    try:
        if bits[0] == "torus":
            m = int(bits[1])
            d = int(bits[2]) if len(bits) > 2 else (degree or 1)
            return torus(m, d)
        if bits[0] == "heisenberg":
            d = int(bits[1]) if len(bits) > 1 else (degree or 2)
            return heisenberg(d)
        if bits[0] == "trivial":
            return trivial_group(degree or 1)
    except (IndexError, ValueError) as exc:
        raise GroupError(f"bad group id {spec!r}") from exc
    raise GroupError(f"unknown group id {spec!r}")


def custom_group(name: str, m: int, d: int, law_terms: Sequence[Sequence], filtration: Sequence[Sequence[int]],
                 Q0: int = 1, validate: bool = True) -> FilteredGroup:
    """Build a group from user polynomials.

    ``law_terms[i]`` is a list of ``[exponents(2m), coefficient]`` pairs for
    P_i; ``filtration`` lists the coordinates of G_2 .. G_d.
    """
    law = tuple(Poly(2 * m, {tuple(e): Fraction(c) for e, c in terms}) for terms in law_terms)
    full = frozenset(range(m))
    levels = [full, full] + [frozenset(x) for x in filtration] + [frozenset()]
    if len(levels) != d + 2:
        raise GroupError("filtration must list G_2 .. G_d")
    G = FilteredGroup(name, m, d, law, tuple(levels), Q0)
    if validate:
        validate_group(G, trials=50, rng=random.Random(0))
    return G


def _random_rational(rng: random.Random, den: int = 12, span: int = 6) -> Fraction:
    return Fraction(rng.randint(-span * den, span * den), rng.randint(1, den))


def validate_group(G: FilteredGroup, trials: int = 200, rng: Optional[random.Random] = None) -> None:
    """Randomised exact checks of the group axioms, Γ-closure and the
    filtration commutator condition.  Raises GroupError on failure."""
    rng = rng or random.Random(0)
    e = G.identity()
    for _ in range(trials):
        a, b, c = (tuple(_random_rational(rng) for _ in range(G.m)) for _ in range(3))
        if G.multiply(G.multiply(a, b), c) != G.multiply(a, G.multiply(b, c)):
            raise GroupError("multiplication is not associative")
        if G.multiply(a, e) != a or G.multiply(e, a) != a:
            raise GroupError("0 is not the identity")
        ai = G.invert(a)
        if G.multiply(a, ai) != e or G.multiply(ai, a) != e:
            raise GroupError("inverse law fails")
        p, q = (tuple(Fraction(rng.randint(-9, 9)) for _ in range(G.m)) for _ in range(2))
        if not (G.is_lattice_point(G.multiply(p, q)) and G.is_lattice_point(G.invert(p))):
            raise GroupError("integer points do not form a subgroup")
    for i in range(1, G.d + 1):
        if not G.level(i + 1) <= G.level(i):
            raise GroupError("filtration is not nested")
    for i in range(1, G.d + 1):
        for j in range(1, G.d + 1):
            for a_idx in G.level(i):
                for b_idx in G.level(j):
                    ea = tuple(Fraction(int(k == a_idx)) for k in range(G.m))
                    eb = tuple(Fraction(int(k == b_idx)) for k in range(G.m))
                    if not G.in_level(G.commutator(ea, eb), i + j):
                        raise GroupError(f"[G_{i}, G_{j}] not inside G_{i + j}")


# -- rational subgroups -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RationalSubgroup:
    """A closed rational subgroup G' of ``ambient`` with its own Mal'cev
    coordinates: ``inner`` is G' as a filtered group in those coordinates and
    ``to_ambient`` / ``from_ambient`` are the polynomial coordinate maps."""

    ambient: FilteredGroup
    inner: FilteredGroup
    basis: Tuple[Element, ...]
    to_ambient: Tuple[Poly, ...]
    from_ambient: Tuple[Poly, ...]
    reduced: bool = False

    @property
    def dimension(self) -> int:
        return self.inner.m

    @property
    def is_full(self) -> bool:
        return self.inner.m == self.ambient.m

    @property
    def height(self) -> int:
        return max((height(Fraction(x)) for b in self.basis for x in b), default=1)

    def embed(self, x: Sequence) -> Element:
        x = self.inner.check(x)
        if self.inner.m == 0:
            return self.ambient.identity()
        return tuple(simplify(p.evaluate(x)) for p in self.to_ambient)

    def coords(self, y: Sequence) -> Element:
        y = self.ambient.check(y)
        return tuple(simplify(p.evaluate(y)) for p in self.from_ambient)

    def contains(self, y: Sequence) -> bool:
        y = self.ambient.check(y)
        if not all(is_exact(v) for v in y):
            raise GroupError("membership test needs exact coordinates")
        return self.embed(self.coords(y)) == tuple(Fraction(v) for v in y)

    def levels(self) -> List[List[int]]:
        return [sorted(self.inner.level(i)) for i in range(self.inner.d + 2)]


def full_subgroup(G: FilteredGroup) -> RationalSubgroup:
    m = G.m
    ident = tuple(Poly.var(i, m) for i in range(m))
    basis = tuple(tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m))
    return RationalSubgroup(G, G, basis, ident, ident)


def _relabel(G: FilteredGroup, name: str) -> FilteredGroup:
    return FilteredGroup(name, G.m, G.d, G.law, G.filtration, G.Q0)


def _compose(parent: RationalSubgroup, inner: FilteredGroup, basis_p: Sequence[Element], psi: Sequence[Poly],
             psi_inv: Sequence[Poly], reduced: bool) -> RationalSubgroup:
    m_new = inner.m
    m_amb = parent.ambient.m
    if m_new == 0:
        to_amb = tuple(Poly.const(0, 0) for _ in range(m_amb))
    else:
        to_amb = tuple(p.substitute(list(psi), m_new) for p in parent.to_ambient)
    from_amb = tuple(q.substitute(list(parent.from_ambient), m_amb) for q in psi_inv)
    basis = tuple(parent.embed(b) for b in basis_p)
    return RationalSubgroup(parent.ambient, inner, basis, to_amb, from_amb, reduced or parent.reduced)


def _unit(n: int, i: int) -> List[Fraction]:
    return [Fraction(int(j == i)) for j in range(n)]


def _bilinear_value(G: FilteredGroup, x: Sequence, y: Sequence) -> List[Fraction]:
    return [sum((mat[p][q] * x[p] * y[q] for p in range(G.h) for q in range(G.h)), Fraction(0))
            for mat in G.bilinear]


def _lie_subgroup(P: FilteredGroup, span: Sequence[Sequence[Fraction]], enum_cap: int = 100000):
    """Mal'cev data for exp(h) where h = span(...) is given in log
    coordinates of the bilinear group P (log(x) = (x_h, x_v - B(x_h,x_h)/2))."""
    h, v, m = P.h, P.m - P.h, P.m
    alg = lattice.row_basis([list(map(Fraction, s)) for s in span], m)
    # bracket closure
    for X, Y in itertools.combinations(alg, 2):
        bxy = _bilinear_value(P, X, Y)
        byx = _bilinear_value(P, Y, X)
        br = [Fraction(0)] * h + [a - b for a, b in zip(bxy, byx)]
        if any(br) and lattice.rank(alg + [br]) > len(alg):
            raise SubgroupClosureError("generators are not closed under commutators")
    # horizontal projection S, vertical part hV and a section sigma
    S = lattice.row_basis([X[:h] for X in alg], h) if h else []
    coeff_null = lattice.nullspace([[X[i] for X in alg] for i in range(h)], len(alg)) if alg else []
    hV = lattice.row_basis([[sum(c[j] * alg[j][h + i] for j in range(len(alg))) for i in range(v)]
                            for c in coeff_null], v) if v else []
    # sigma: for each s in S pick X in alg with X_h = s
    def section(s: Sequence[Fraction]) -> List[Fraction]:
        if not alg:
            return [Fraction(0)] * v
        cols = [X[:h] for X in alg]
        idx, inv = lattice.solve_exact(_independent(cols), h)
        basis_cols = _independent(cols)
        coeffs = [sum(inv[i][j] * s[idx[j]] for j in range(len(idx))) for i in range(len(idx))]
        out = [Fraction(0)] * v
        for c, col in zip(coeffs, basis_cols):
            X = alg[cols.index(col)]
            for i in range(v):
                out[i] += c * X[h + i]
        return out

    # lattices
    S_int = lattice.saturated_basis(S, h) if S else []
    Vfull, l = lattice.adapted_basis(hV, v) if v else ([], 0)
    comp = v - l
    Vinv = _inverse_cols(Vfull, v) if v else []

    def adapted(vec):  # coordinates w.r.t. the adapted basis of Z^v
        return [sum(Vinv[i][j] * vec[j] for j in range(v)) for i in range(v)]

    def admissible_shift(hvec):
        w = [a + b / 2 for a, b in zip(section(hvec), _bilinear_value(P, hvec, hvec))]
        return adapted(w)

    # Λ: horizontal parts of lattice points of the subgroup
    if comp == 0 or not S_int:
        lam = S_int
    else:
        D = 1
        for s in S_int:
            for y in admissible_shift(s)[:comp]:
                D = D * Fraction(y).denominator // math.gcd(D, Fraction(y).denominator)
        for s, t in itertools.product(S_int, repeat=2):
            bst = adapted(_bilinear_value(P, s, t))
            for y in bst[:comp]:
                D = D * Fraction(y).denominator // math.gcd(D, Fraction(y).denominator)
        D *= 2
        if D ** len(S_int) > enum_cap:
            raise GroupError(f"lattice enumeration too large ({D}^{len(S_int)})")
        gens = [[D * x for x in s] for s in S_int]
        for cvec in itertools.product(range(D), repeat=len(S_int)):
            if not any(cvec):
                continue
            hv = [sum(c * s[i] for c, s in zip(cvec, S_int)) for i in range(h)]
            if all(Fraction(y).denominator == 1 for y in admissible_shift(hv)[:comp]):
                gens.append(hv)
        lam = lattice.lattice_basis(gens, h)
    lam = [lattice.canonical(x) for x in lam]
    # adapt the vertical lattice so the commutator span sits last
    L_V = [[Vfull[c][i] for i in range(v)] for c in range(comp, v)] if v else []
    comm = []
    for X, Y in itertools.combinations(alg, 2):
        d_ = [a - b for a, b in zip(_bilinear_value(P, X, Y), _bilinear_value(P, Y, X))]
        if any(d_):
            comm.append(d_)
    if L_V and comm:
        # express commutators in L_V coordinates, then adapt
        idx, inv = lattice.solve_exact(L_V, v)
        comm_c = [[sum(inv[i][j] * c[idx[j]] for j in range(len(idx))) for i in range(len(L_V))] for c in comm]
        U, r = lattice.adapted_basis(comm_c, len(L_V))
        L_V = [[sum(U[c][j] * L_V[j][i] for j in range(len(L_V))) for i in range(v)] for c in range(len(L_V))]
    L_V = [lattice.canonical(x) for x in L_V]
    # lifts of Λ to integer points
    horiz = []
    for lv in lam:
        y = admissible_shift(lv)
        ycomp = y[:comp] + [Fraction(0)] * l
        w = [sum(Vfull[c][i] * ycomp[c] for c in range(v)) for i in range(v)]
        horiz.append(tuple(Fraction(x) for x in lv) + tuple(Fraction(x) for x in w))
    vert = [tuple([Fraction(0)] * h + [Fraction(x) for x in col]) for col in L_V]
    return horiz, vert


def _independent(cols):
    out = []
    for c in cols:
        if lattice.rank(out + [c]) > len(out):
            out.append(c)
    return out


def _inverse_cols(cols: Sequence[Sequence[int]], n: int) -> List[List[Fraction]]:
    idx, inv = lattice.solve_exact([[Fraction(x) for x in c] for c in cols], n)
    # idx is a permutation of range(n) here; reorder to act on natural coordinates
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j, r in enumerate(idx):
            out[i][r] = inv[i][j]
    return out


def _subgroup_from_basis(P: FilteredGroup, horiz: Sequence[Element], vert: Sequence[Element], name: str):
    """Coordinates of the second kind for the given ordered basis of a
    subgroup of the bilinear group P: (psi, psi_inv, inner group)."""
    a, mv = len(horiz), len(vert)
    m2 = a + mv
    basis = list(horiz) + list(vert)
    T = Poly.variables(m2)

    def psi_of(tvars):
        acc = P.identity() if not tvars else tuple(Poly.const(0, tvars[0].n) for _ in range(P.m))
        for b, t in zip(basis, tvars):
            acc = P.multiply(acc, P.power(b, t))
        return acc

    psi = psi_of(T) if m2 else ()
    Y = Poly.variables(P.m)
    # horizontal solve
    hcols = [list(b[:P.h]) for b in horiz]
    if a:
        idx, inv = lattice.solve_exact(hcols, P.h)
        t_h = [sum((Y[idx[j]] * inv[i][j] for j in range(a)), Poly(P.m)) for i in range(a)]
        prod_h = tuple(Poly.const(0, P.m) for _ in range(P.m))
        for b, t in zip(horiz, t_h):
            prod_h = P.multiply(prod_h, P.power(b, t))
        rest = P.multiply(P.invert(prod_h), tuple(Y))
    else:
        t_h = []
        rest = tuple(Y)
    if mv:
        vcols = [list(b[P.h:]) for b in vert]
        idx, inv = lattice.solve_exact(vcols, P.m - P.h)
        r_v = rest[P.h:]
        u = [sum((r_v[idx[j]] * inv[i][j] for j in range(mv)), Poly(P.m)) for i in range(mv)]
    else:
        u = []
    psi_inv = tuple(_as_poly(x, P.m) for x in t_h + u)
    # inner law
    if m2:
        S2 = Poly.variables(2 * m2)
        ps = psi_of(S2[:m2])
        pt = psi_of(S2[m2:])
        prod = P.multiply(ps, pt)
        law = []
        for i, q in enumerate(psi_inv):
            L = q.substitute([_as_poly(x, 2 * m2) for x in prod], 2 * m2)
            law.append(L - S2[i] - S2[m2 + i])
    else:
        law = []
    levels = [frozenset(range(m2)), frozenset(range(m2))]
    for lv in range(2, P.d + 1):
        levels.append(frozenset(i for i, b in enumerate(basis) if P.in_level(b, lv)))
    levels.append(frozenset())
    Q0 = max([height(c) for L in law for c in L.terms.values()] + [1])
    inner = FilteredGroup(name, m2, P.d, tuple(law), tuple(levels), Q0)
    return tuple(_as_poly(x, m2) for x in psi) if m2 else (), psi_inv, inner, basis


def _as_poly(x, n: int) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly.const(x, n)


def subgroup_from_algebra(parent: RationalSubgroup, span: Sequence[Sequence[Fraction]],
                          name: str = "subgroup") -> RationalSubgroup:
    """The connected subgroup exp(span) of ``parent.inner`` (log coordinates)."""
    P = parent.inner
    if P.bilinear is None:
        raise GroupError("exact subgroup construction needs a step <= 2 bilinear group law")
    horiz, vert = _lie_subgroup(P, span)
    psi, psi_inv, inner, basis = _subgroup_from_basis(P, horiz, vert, name)
    if inner.m and inner.bilinear is None:
        raise GroupError("internal: induced law is not bilinear")
    return _compose(parent, inner, basis, psi, psi_inv, reduced=False)


def kernel_subgroup(parent: RationalSubgroup, k: Sequence[int], name: str = "kernel") -> RationalSubgroup:
    """The subgroup of ``parent`` killed by the horizontal character k
    (k indexes the horizontal coordinates of ``parent.inner``)."""
    P = parent.inner
    k = [int(x) for x in k]
    if len(k) != P.h or not any(k):
        raise GroupError("character must be a nonzero vector over the horizontal coordinates")
    g = 0
    for x in k:
        g = math.gcd(g, x)
    k0 = [x // g for x in k]
    _, ker = lattice.bezout_split(k0)
    if P.bilinear is not None:
        span = [[Fraction(x) for x in kv] + [Fraction(0)] * (P.m - P.h) for kv in ker]
        span += [_unit(P.m, i) for i in range(P.h, P.m)]
        return subgroup_from_algebra(parent, span, name)
    # generic law: linear reparametrisation of the horizontal block only
    h, m = P.h, P.m
    a = len(ker)
    m2 = a + (m - h)
    T = Poly.variables(m2)
    psi = [sum((T[j] * ker[j][i] for j in range(a)), Poly(m2)) for i in range(h)] + list(T[a:])
    Y = Poly.variables(m)
    idx, inv = lattice.solve_exact([[Fraction(x) for x in kv] for kv in ker], h) if a else ([], [])
    psi_inv = [sum((Y[idx[j]] * inv[i][j] for j in range(a)), Poly(m)) for i in range(a)] + list(Y[h:])
    S2 = Poly.variables(2 * m2)
    ps = [p.substitute(S2[:m2], 2 * m2) for p in psi]
    pt = [p.substitute(S2[m2:], 2 * m2) for p in psi]
    prod = P.multiply(tuple(ps), tuple(pt))
    law = []
    for i, q in enumerate(psi_inv):
        L = q.substitute(list(prod), 2 * m2)
        law.append(L - S2[i] - S2[m2 + i])
    basis = [tuple(psi_i.evaluate(_unit(m2, j)) for psi_i in psi) for j in range(m2)]
    levels = [frozenset(range(m2)), frozenset(range(m2))]
    for lv in range(2, P.d + 1):
        levels.append(frozenset(i for i, b in enumerate(basis) if P.in_level(b, lv)))
    levels.append(frozenset())
    inner = FilteredGroup(name, m2, P.d, tuple(law), tuple(levels), P.Q0)
    return _compose(parent, inner, basis, psi, psi_inv, reduced=True)


def log_coords(G: FilteredGroup, x: Sequence[Fraction]) -> List[Fraction]:
    if G.bilinear is None:
        raise GroupError("log coordinates are implemented for step <= 2 bilinear laws")
    half = _bilinear_value(G, x[:G.h], x[:G.h])
    return [Fraction(c) for c in x[:G.h]] + [Fraction(x[G.h + i]) - half[i] / 2 for i in range(G.m - G.h)]


def induced_subgroup_basis(G: FilteredGroup, generators: Sequence[Sequence], Q: int) -> RationalSubgroup:
    """Rational subgroup spanned (as a Lie algebra, no completion) by the
    given exact generators, with a Mal'cev basis of Γ ∩ G'."""
    gens = [G.check(tuple(Fraction(x) for x in g)) for g in generators]
    for g in gens:
        if max((height(x) for x in g), default=1) > Q:
            raise HeightOverflowError("generator height exceeds Q")
    if len(gens) == 0:
        span = []
    else:
        span = [log_coords(G, g) for g in gens]
    S = subgroup_from_algebra(full_subgroup(G), span, name="induced")
    if S.height > Q:
        raise HeightOverflowError(f"basis height {S.height} exceeds Q = {Q}")
    return S
