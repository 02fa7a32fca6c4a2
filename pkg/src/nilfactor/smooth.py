"""Smooth numbers and periods of rational sequences."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import sympy

from .nilgroup import GroupError
from .polyseq import PolySequence, evaluate
from .scalars import is_exact


@dataclass(frozen=True)
class SmoothBase:
    """k(N) presets: "loglog" (floor(log log N) + 2), "fixed" (constant k) or
    "primes" (explicit prime set)."""

    kind: str = "fixed"
    k: int = 2
    primes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("fixed", "primes", "loglog"):
            raise ValueError(f"unknown smooth base kind {self.kind!r}")
        if self.kind == "fixed" and self.k < 2:
            raise ValueError("k must be at least 2")
        if self.kind == "primes":
            if not self.primes:
                raise ValueError("empty prime set")
            for p in self.primes:
                if not sympy.isprime(p):
                    raise ValueError(f"{p} is not prime")

    @classmethod
    def fixed(cls, k: int) -> "SmoothBase":
        return cls("fixed", k)

    @classmethod
    def prime_set(cls, primes) -> "SmoothBase":
        return cls("primes", max(primes), tuple(sorted(set(primes))))

    @classmethod
    def loglog(cls) -> "SmoothBase":
        return cls("loglog", 2)

    def bound(self, N: Optional[int] = None) -> int:
        """k(N)."""
        if self.kind == "fixed":
            return self.k
        if self.kind == "primes":
            return max(self.primes)
        if N is None or N < 16:
            return 2
        return int(math.floor(math.log(math.log(N)))) + 2

    def prime_list(self, N: Optional[int] = None) -> Tuple[int, ...]:
        if self.kind == "primes":
            return self.primes
        return tuple(sympy.primerange(2, self.bound(N) + 1))

    def to_json(self) -> dict:
        if self.kind == "primes":
            return {"kind": "primes", "primes": list(self.primes)}
        if self.kind == "fixed":
            return {"kind": "fixed", "k": self.k}
        return {"kind": "loglog"}

    @classmethod
    def from_json(cls, data: dict) -> "SmoothBase":
        kind = data.get("kind")
        if kind == "fixed":
            return cls.fixed(int(data["k"]))
        if kind == "primes":
            return cls.prime_set([int(p) for p in data["primes"]])
        if kind == "loglog":
            return cls.loglog()
        raise ValueError(f"unknown smooth base kind {kind!r}")

    def label(self) -> str:
        if self.kind == "primes":
            return "primes:{" + ",".join(map(str, self.primes)) + "}"
        return f"fixed:{self.k}" if self.kind == "fixed" else "loglog"


def largest_prime_factor(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 1
    return max(sympy.primefactors(n))


def is_smooth(n: int, base: SmoothBase, N: Optional[int] = None) -> bool:
    if n < 1:
        raise ValueError("n must be positive")
    primes = base.prime_list(N)
    for p in primes:
        while n % p == 0:
            n //= p
    return n == 1


def enumerate_smooth(limit: int, base: SmoothBase, N: Optional[int] = None) -> List[int]:
    """All smooth numbers in [1, limit), ascending."""
    if limit < 1:
        raise ValueError("limit must be positive")
    primes = base.prime_list(N)
    out = []
    heap = [1]
    seen = {1}
    while heap:
        x = heapq.heappop(heap)
        if x >= limit:
            break
        out.append(x)
        for p in primes:
            y = x * p
            if y < limit and y not in seen:
                seen.add(y)
                heapq.heappush(heap, y)
    return out


def sequence_period(gamma: PolySequence, bound: int) -> Optional[int]:
    """Least p <= bound with gamma(n)^{-1} gamma(n+p) in Γ on the window
    0 <= n < max(2 p d, d + 1)."""
    G = gamma.group
    if not all(is_exact(x) for c in gamma.coeffs for x in c):
        raise GroupError("period computation needs exact coefficients")
    if G.m == 0:
        return 1
    d = gamma.d
    cache = {}

    def val(n):
        if n not in cache:
            cache[n] = evaluate(gamma, n)
        return cache[n]

    inv_cache = {}

    def inv(n):
        if n not in inv_cache:
            inv_cache[n] = G.invert(val(n))
        return inv_cache[n]

    for p in range(1, bound + 1):
        window = max(2 * p * d, d + 1)
        if all(G.is_lattice_point(G.multiply(inv(n), val(n + p))) for n in range(window)):
            return p
    return None
