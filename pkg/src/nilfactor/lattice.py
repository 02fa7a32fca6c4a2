"""Integer and rational linear algebra on small matrices.

Matrices are lists of rows.  Rational work goes through sympy; the one thing
sympy does not expose is the unimodular transform of a column Hermite
reduction, which :func:`column_reduce` provides.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence, Tuple

import sympy

IntMatrix = List[List[int]]


def _ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def column_reduce(M: Sequence[Sequence[int]], n: int) -> Tuple[IntMatrix, IntMatrix, int]:
    """Return (H, U, rank) with M·U = H, U unimodular (n×n), and the columns of
    H from index ``rank`` on identically zero."""
    A = [list(map(int, row)) for row in M]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(p: int, j: int, x: int, y: int, u: int, v: int):
        # col_p <- x col_p + y col_j ; col_j <- u col_p + v col_j
        for R in (A, U):
            for row in R:
                cp, cj = row[p], row[j]
                row[p] = x * cp + y * cj
                row[j] = u * cp + v * cj

    p = 0
    for i in range(len(A)):
        if p >= n:
            break
        for j in range(p + 1, n):
            a, b = A[i][p], A[i][j]
            if b == 0:
                continue
            g, x, y = _ext_gcd(a, b)
            colop(p, j, x, y, -b // g, a // g)
        if A[i][p] != 0:
            if A[i][p] < 0:
                for R in (A, U):
                    for row in R:
                        row[p] = -row[p]
            p += 1
    return A, U, p


def columns(U: IntMatrix, idx: Sequence[int]) -> List[List[int]]:
    return [[row[j] for row in U] for j in idx]


def kernel_lattice(M: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """Basis of {x in Z^n : M x = 0}; saturated by construction."""
    if not M:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    _, U, r = column_reduce(M, n)
    return columns(U, range(r, n))


def bezout_split(k: Sequence[int]) -> Tuple[List[int], List[List[int]]]:
    """For primitive k return (u, K) with k·u = 1 and K a basis of ker k ∩ Z^n."""
    n = len(k)
    _, U, r = column_reduce([list(k)], n)
    if r != 1:
        raise ValueError("zero character")
    u = columns(U, [0])[0]
    if sum(a * b for a, b in zip(k, u)) != 1:
        raise ValueError("character is not primitive")
    return u, columns(U, range(1, n))


def lattice_basis(gens: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """Basis of the lattice generated by integer vectors ``gens`` in Z^n."""
    if not gens:
        return []
    M = [[g[i] for g in gens] for i in range(n)]
    H, _, _ = column_reduce(M, len(gens))
    out = []
    for j in range(len(gens)):
        col = [H[i][j] for i in range(n)]
        if any(col):
            out.append(col)
    return out


def canonical(v: Sequence[int]) -> List[int]:
    """Sign-normalise so the first nonzero entry is positive."""
    for x in v:
        if x:
            return list(v) if x > 0 else [-y for y in v]
    return list(v)


def _to_sym(rows):
    return sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in r] for r in rows])


def _from_sym(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    if not vectors:
        return 0
    return _to_sym(vectors).rank()


def row_basis(vectors: Sequence[Sequence[Fraction]], n: int) -> List[List[Fraction]]:
    if not vectors:
        return []
    R, piv = _to_sym(vectors).rref()
    return [[_from_sym(R[i, j]) for j in range(n)] for i in range(len(piv))]


def nullspace(vectors: Sequence[Sequence[Fraction]], n: int) -> List[List[Fraction]]:
    """Basis of {x : v·x = 0 for all v}."""
    if not vectors:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    return [[_from_sym(c) for c in v] for v in _to_sym(vectors).nullspace()]


def integer_scale(v: Sequence[Fraction]) -> List[int]:
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    return [a // g for a in ints] if g > 1 else ints


def adapted_basis(vectors: Sequence[Sequence[Fraction]], n: int) -> Tuple[List[List[int]], int]:
    """Unimodular basis of Z^n (as columns) whose last ``r`` members span
    span(vectors) ∩ Z^n.  Returns (columns, r)."""
    r = rank(vectors)
    perp = [integer_scale(v) for v in nullspace(vectors, n)] if r else [
        [int(i == j) for i in range(n)] for j in range(n)]
    if r == 0:
        return [[int(i == j) for i in range(n)] for j in range(n)], 0
    if r == n:
        return [[int(i == j) for i in range(n)] for j in range(n)], n
    _, U, rk = column_reduce(perp, n)
    assert rk == n - r
    return columns(U, range(n)), r


def saturated_basis(vectors: Sequence[Sequence[Fraction]], n: int) -> List[List[int]]:
    cols, r = adapted_basis(vectors, n)
    return cols[n - r:]


def solve_exact(A_cols: Sequence[Sequence[Fraction]], n: int):
    """Left inverse of the n×a matrix with columns ``A_cols`` (full column rank),
    returned as (row_indices, inverse) so that t = inverse · y[row_indices]."""
    a = len(A_cols)
    if a == 0:
        return [], []
    rows = [[A_cols[j][i] for j in range(a)] for i in range(n)]
    chosen: List[int] = []
    for i in range(n):
        if rank([rows[c] for c in chosen + [i]]) > len(chosen):
            chosen.append(i)
        if len(chosen) == a:
            break
    if len(chosen) < a:
        raise ValueError("columns are not independent")
    inv = _to_sym([rows[c] for c in chosen]).inv()
    return chosen, [[_from_sym(inv[i, j]) for j in range(a)] for i in range(a)]


def lll_reduce(rows: Sequence[Sequence[int]]) -> List[List[int]]:
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix([[ZZ(int(x)) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    red = dm.lll().to_Matrix()
    return [[int(red[i, j]) for j in range(red.cols)] for i in range(red.rows)]
