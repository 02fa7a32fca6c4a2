"""Exact and ball-valued scalars.

Exact values are ``fractions.Fraction``.  Irrational inputs (named constants
and anything derived from them) are :class:`Ball` values: an exact rational
midpoint with an exact rational error radius.  Every arithmetic operation
propagates the radius, so a ``Ball`` always contains the true real number.
"""

from __future__ import annotations

import ast
import math
import os
from fractions import Fraction
from functools import lru_cache
from typing import Union

DEFAULT_PRECISION_BITS = 256


def precision_bits() -> int:
    raw = os.environ.get("NILFACTOR_PRECISION_BITS", "")
    if not raw:
        return DEFAULT_PRECISION_BITS
    bits = int(raw)
    if bits < 64:
        raise ValueError("NILFACTOR_PRECISION_BITS must be at least 64")
    return bits


class Ball:
    """Closed interval [mid - rad, mid + rad] with rational endpoints."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=0):
        self.mid = Fraction(mid)
        self.rad = Fraction(rad)
        if self.rad < 0:
            raise ValueError("negative radius")

    def _rounded(self) -> "Ball":
        # Keep midpoints from growing without bound; the rounding error is
        # absorbed into the radius.
        p = precision_bits()
        if self.mid.denominator.bit_length() <= 2 * p:
            return self
        scaled = round(self.mid * (1 << (p + 8)))
        mid = Fraction(scaled, 1 << (p + 8))
        rad = self.rad + abs(self.mid - mid)
        if rad.denominator.bit_length() > 2 * p:
            rad = Fraction(math.ceil(rad * (1 << (p + 8))), 1 << (p + 8))
        return Ball(mid, rad)

    def __add__(self, other):
        if isinstance(other, Ball):
            return Ball(self.mid + other.mid, self.rad + other.rad)._rounded()
        if isinstance(other, (int, Fraction)):
            return Ball(self.mid + other, self.rad)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (Ball, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Ball):
            mid = self.mid * other.mid
            rad = abs(self.mid) * other.rad + abs(other.mid) * self.rad + self.rad * other.rad
            return Ball(mid, rad)._rounded()
        if isinstance(other, (int, Fraction)):
            return Ball(self.mid * other, self.rad * abs(other))._rounded()
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("ball division by zero")
            return Ball(self.mid / other, self.rad / abs(other))._rounded()
        if isinstance(other, Ball):
            return self * other.reciprocal()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self) -> "Ball":
        lo = abs(self.mid) - self.rad
        if lo <= 0:
            raise ZeroDivisionError("ball contains zero")
        return Ball(1 / self.mid, self.rad / (lo * abs(self.mid)))._rounded()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        out: Union[Ball, Fraction] = Fraction(1)
        base = self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out if isinstance(out, Ball) else Ball(out)

    def contains(self, x) -> bool:
        return abs(Fraction(x) - self.mid) <= self.rad

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"Ball({float(self.mid)!r} +/- {float(self.rad):.3g})"

    def __eq__(self, other):
        # Structural equality; use `contains` / `overlaps` for set semantics.
        if isinstance(other, Ball):
            return self.mid == other.mid and self.rad == other.rad
        if isinstance(other, (int, Fraction)):
            return self.rad == 0 and self.mid == other
        return NotImplemented

    def __hash__(self):
        return hash((self.mid, self.rad))


Scalar = Union[Fraction, Ball]


def to_scalar(x) -> Scalar:
    if isinstance(x, Ball):
        return x
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a scalar")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def midpoint(x) -> Fraction:
    return x.mid if isinstance(x, Ball) else Fraction(x)


def radius(x) -> Fraction:
    return x.rad if isinstance(x, Ball) else Fraction(0)


def upper(x) -> Fraction:
    return midpoint(x) + radius(x)


def lower(x) -> Fraction:
    return midpoint(x) - radius(x)


def simplify(x) -> Scalar:
    """Collapse a zero-radius ball to its exact value."""
    if isinstance(x, Ball) and x.rad == 0:
        return x.mid
    if isinstance(x, int):
        return Fraction(x)
    return x


def dist_to_int(x) -> Scalar:
    """||x||_{R/Z}; 1-Lipschitz, so a ball maps to a ball of the same radius."""
    m = midpoint(x)
    d = abs(m - round(m))
    if isinstance(x, Ball):
        return simplify(Ball(d, x.rad))
    return d


def frac_part(x) -> Fraction:
    m = midpoint(x)
    return m - math.floor(m)


def height(q: Fraction) -> int:
    q = Fraction(q)
    return max(abs(q.numerator), q.denominator)


def binom(t, j: int):
    """C(t, j) for integer j >= 0 and t of any ring type (int, Fraction, Ball, Poly)."""
    if isinstance(t, int):
        return math.comb(t, j) if t >= 0 else _binom_generic(Fraction(t), j)
    return _binom_generic(t, j)


def _binom_generic(t, j: int):
    out = Fraction(1)
    for i in range(j):
        out = out * (t - i)
    return out * Fraction(1, math.factorial(j))


# --- named constants -------------------------------------------------------


@lru_cache(maxsize=None)
def _sqrt_ball(n: int, bits: int) -> Ball:
    s = math.isqrt(n << (2 * bits))
    return Ball(Fraction(s, 1 << bits), Fraction(1, 1 << bits))


@lru_cache(maxsize=None)
def _e_ball(bits: int) -> Ball:
    total = Fraction(0)
    term = Fraction(1)
    k = 0
    while term > Fraction(1, 1 << (bits + 4)):
        total += term
        k += 1
        term /= k
    # remaining tail is < 2 * term
    mid = Fraction(round(total * (1 << bits)), 1 << bits)
    return Ball(mid, abs(total - mid) + 2 * term)


def named_constant(name: str) -> Ball:
    bits = precision_bits()
    if name == "phi":
        r5 = _sqrt_ball(5, bits)
        return Ball((1 + r5.mid) / 2, r5.rad / 2)
    if name == "sqrt2":
        return _sqrt_ball(2, bits)
    if name == "e":
        return _e_ball(bits)
    raise KeyError(name)


NAMED_CONSTANTS = ("phi", "sqrt2", "e")


# --- literal parsing ---------------------------------------------------------


class ScalarSyntaxError(ValueError):
    pass


def parse_scalar(text: str) -> Scalar:
    """Parse a coefficient literal such as ``"1/3"``, ``"2^-12+phi*2^-30"``
    or ``"0.75"``.  Decimal literals are read exactly.
    """
    src = text.strip().replace("^", "**")
    if not src:
        raise ScalarSyntaxError("empty literal")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ScalarSyntaxError(f"cannot parse {text!r}") from exc
    return simplify(_eval(tree.body, src, text))


def _eval(node, src: str, text: str):
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ScalarSyntaxError(f"unsupported literal in {text!r}")
        if isinstance(node.value, int):
            return Fraction(node.value)
        return Fraction(ast.get_source_segment(src, node))
    if isinstance(node, ast.Name):
        if node.id not in NAMED_CONSTANTS:
            raise ScalarSyntaxError(f"unknown constant {node.id!r} in {text!r}")
        return named_constant(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        v = _eval(node.operand, src, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a = _eval(node.left, src, text)
        b = _eval(node.right, src, text)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(node.op, ast.Div):
            return a / b
        if isinstance(node.op, ast.Pow):
            if not (isinstance(b, Fraction) and b.denominator == 1):
                raise ScalarSyntaxError(f"non-integer exponent in {text!r}")
            if isinstance(a, Fraction):
                return a ** int(b)
            return a ** int(b)
    raise ScalarSyntaxError(f"unsupported expression in {text!r}")


def format_scalar(x) -> object:
    """JSON form: exact values as "p/q" strings, balls as {"mid", "rad"}."""
    x = simplify(x)
    if isinstance(x, Ball):
        return {"mid": _frac_str(x.mid), "rad": _frac_str(x.rad)}
    return _frac_str(x)


def load_scalar(obj) -> Scalar:
    if isinstance(obj, dict):
        return simplify(Ball(Fraction(obj["mid"]), Fraction(obj["rad"])))
    return parse_scalar(str(obj))


def _frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
