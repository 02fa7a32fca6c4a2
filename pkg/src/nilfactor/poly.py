"""Sparse multivariate polynomials with exact rational coefficients.

Evaluation is generic over any ring-like values (``Fraction``, ``Ball``,
other ``Poly`` objects), which is what lets the same group-law code run on
numbers and on symbols.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Sequence, Tuple

Monomial = Tuple[int, ...]


class Poly:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Monomial, Fraction] | None = None):
        self.n = n
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def var(cls, i: int, n: int) -> "Poly":
        mono = tuple(1 if j == i else 0 for j in range(n))
        return cls(n, {mono: Fraction(1)})

    @classmethod
    def const(cls, c, n: int) -> "Poly":
        return cls(n, {(0,) * n: Fraction(c)})

    @classmethod
    def variables(cls, n: int):
        return [cls.var(i, n) for i in range(n)]

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def variables_used(self) -> set:
        used = set()
        for m in self.terms:
            used.update(i for i, e in enumerate(m) if e)
        return used

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.n, Fraction(0))

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError("polynomial arity mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other, self.n)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in o.terms.items():
            terms[m] = terms.get(m, 0) + c
        return Poly(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.n, {m: c * other for m, c in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                terms[m] = terms.get(m, 0) + c1 * c2
        return Poly(self.n, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        out = Poly.const(1, self.n)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, Poly) else other
        if o is None:
            return NotImplemented
        return self.n == o.n and self.terms == o.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(f"v{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def evaluate(self, values: Sequence):
        if len(values) != self.n:
            raise ValueError("wrong number of values")
        total = Fraction(0)
        powers: Dict[Tuple[int, int], object] = {}
        for m, c in self.terms.items():
            term = c
            for i, e in enumerate(m):
                if e:
                    key = (i, e)
                    if key not in powers:
                        powers[key] = values[i] if e == 1 else values[i] ** e
                    term = powers[key] * term
            total = term + total
        return total

    def substitute(self, polys: Sequence["Poly"], n_target: int) -> "Poly":
        if any(p.n != n_target for p in polys):
            raise ValueError("polynomial arity mismatch")
        out = self.evaluate(polys)
        if isinstance(out, Poly):
            return out
        return Poly.const(out, n_target)

    def linear_part(self) -> Dict[int, Fraction]:
        out = {}
        for m, c in self.terms.items():
            if sum(m) == 1:
                out[m.index(1)] = c
        return out

    def to_json(self):
        return [[list(m), _fs(c)] for m, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, n: int, data) -> "Poly":
        return cls(n, {tuple(m): Fraction(c) for m, c in data})


def _fs(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

