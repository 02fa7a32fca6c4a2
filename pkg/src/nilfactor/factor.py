"""Factorisation g = ε g′ γ and the smooth-progression tree.

factorise_once removes obstructions one horizontal character at a time: the
phase k∘g is split into a rational part (moved into γ), a slowly varying part
(moved into ε) and a remainder in the kernel of k, on which the search
repeats.  build_tree dilates and splits into residue classes whenever some
smooth dilate of the current g′ still carries an obstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import lattice
from .config import ConstantsConfig
from .equidist import (EquidistReport, ObstructionResult, ProgressionSet, default_family, direct_defect,
                       obstruction_search, obstruction_verdict, orbit_points, coordinate_values,
                       reduce_mod_lattice, total_verdict, transfer_right_multiply, FIXED_BITS)
from .nilgroup import FilteredGroup, GroupError, RationalSubgroup, full_subgroup, kernel_subgroup
from .polyseq import (HorizontalCharacter, PolySequence, c_infty_norm, compose_horizontal,
                      coordinate_polynomials, elements_agree, evaluate, from_subgroup, horizontal_taylor,
                      inverse_sequence, pointwise_product, product_of, reindex, to_subgroup)
from .scalars import Ball, is_exact, midpoint, radius, simplify, upper
from .smooth import SmoothBase, enumerate_smooth, is_smooth, sequence_period


class FactorisationError(RuntimeError):
    """A certificate could not be met within the configured caps."""


class InvariantViolation(RuntimeError):
    """An internal guarantee (dimension drop, depth <= m) failed."""


# -- helpers ----------------------------------------------------------------------


def _is_identity_seq(g: PolySequence) -> bool:
    return all(x == 0 for c in g.coeffs for x in c)


def _all_exact(g: PolySequence) -> bool:
    return all(is_exact(x) for c in g.coeffs for x in c)


def _sup_bound(g: PolySequence, N: int) -> float:
    """Upper bound for max_i sup_{0<=n<=N} |coordinate_i(g(n))|."""
    best = 0.0
    for row in coordinate_polynomials(g):
        s = 0.0
        for j, c in enumerate(row):
            if c != 0:
                s += (abs(float(midpoint(c))) + float(radius(c))) * math.comb(N, j)
        best = max(best, s)
    return best


def _increments(g: PolySequence) -> PolySequence:
    """n -> g(n) g(n-1)^{-1}."""
    return pointwise_product(g, inverse_sequence(reindex_shift(g, -1)))


def reindex_shift(g: PolySequence, r: int) -> PolySequence:
    """n -> g(n + r) for any integer r."""
    G = g.group
    f = lambda n: evaluate(g, n + r)  # noqa: E731
    return PolySequence.from_values(G, [f(n) for n in range(G.d + 1)])


def smoothness_certificate(eps: PolySequence, N: int, M: float) -> dict:
    """Loose reading d(ε(n), id) <= N, strict reading <= M, and
    increments d(ε(n), ε(n-1)) <= M/N, all over 0 <= n <= N."""
    sup = _sup_bound(eps, N)
    inc = _sup_bound(_increments(eps), N) if not _is_identity_seq(eps) else 0.0
    return {"sup_dist_id": sup, "sup_increment": inc, "M": M, "N": N,
            "within_N_ok": sup <= N, "definition_ok": sup <= M, "increment_ok": inc <= M / N}


def rationality_certificate(gamma: PolySequence, bound: int, max_points: int = 256) -> dict:
    G = gamma.group
    if not _all_exact(gamma):
        return {"period": None, "max_height": None, "ok": False, "reason": "inexact gamma"}
    p = sequence_period(gamma, bound)
    if p is None:
        return {"period": None, "max_height": None, "ok": False, "reason": f"no period <= {bound}"}
    heights = [G.rationality_height(evaluate(gamma, n), bound) for n in range(min(p, max_points))]
    if any(x is None for x in heights):
        return {"period": p, "max_height": None, "ok": False, "reason": f"height exceeds {bound}"}
    return {"period": p, "max_height": max(heights, default=1), "heights_checked": len(heights), "ok": True}


def reconstruction_holds(g: PolySequence, parts: Sequence[PolySequence], q: int = 1, r: int = 0,
                         points: Optional[Sequence[int]] = None) -> bool:
    """g(q m + r) == parts[0](m) parts[1](m) ... at enough points to pin the
    polynomial identity (or at the given points)."""
    G = g.group
    if points is None:
        D = G.d * max(1, G.step)
        points = range(D + 2)
    for m in points:
        acc = G.identity()
        for p in parts:
            acc = G.multiply(acc, evaluate(p, m))
        if not elements_agree(tuple(simplify(x) for x in acc), evaluate(g, q * m + r)):
            return False
    return True


# -- single-step factorisation -----------------------------------------------------------


@dataclass(eq=False)
class Factorisation:
    epsilon: PolySequence
    gPrime: PolySequence
    gamma: PolySequence
    subgroup: RationalSubgroup
    M: int
    q_gamma: int
    certificates: Dict[str, object] = field(default_factory=dict)
    steps: List[dict] = field(default_factory=list)

    @property
    def gprime_inner(self) -> PolySequence:
        return to_subgroup(self.gPrime, self.subgroup)

    @property
    def reduced(self) -> bool:
        return self.subgroup.reduced


def _level_directions(P: FilteredGroup, j: int) -> List[int]:
    if j <= 1:
        return list(range(P.h))
    lvl = P.level(j)
    return [i for i in range(P.h) if i in lvl]


def _split_phase(P: FilteredGroup, g: PolySequence, k0: Sequence[int], c: int):
    """Taylor coefficients of (ε, γ) in P removing the k0-component of each
    horizontal Taylor coefficient of g: rational part to γ, rest to ε."""
    h = P.h
    eps, gam, dens = [], [], [1]
    for j, beta in enumerate(horizontal_taylor(g)):
        e_row = [Fraction(0)] * P.m
        g_row = [Fraction(0)] * P.m
        b = Fraction(0)
        for ki, x in zip(k0, beta):
            if ki:
                b = x * ki + b
        b = simplify(b)
        dirs = _level_directions(P, j)
        sub = [k0[i] for i in dirs]
        cj = 0
        for x in sub:
            cj = math.gcd(cj, x)
        if b != 0 and cj:
            uj_sub, _ = lattice.bezout_split([x // cj for x in sub])
            uj = [0] * h
            for i, v in zip(dirs, uj_sub):
                uj[i] = v
            x = b * Fraction(1, cj)
            mid = midpoint(x)
            if j == 0:
                p = Fraction(math.floor(mid + Fraction(1, 2)))
            else:
                p = mid.limit_denominator(max(1, c * cj))
            s = simplify(x - p)
            if isinstance(s, Ball) and s.contains(0):
                s = Fraction(0)
            dens.append(p.denominator)
            for i in range(h):
                if uj[i]:
                    e_row[i] = s * uj[i]
                    g_row[i] = p * uj[i]
        eps.append(tuple(e_row))
        gam.append(tuple(g_row))
    return PolySequence(P, tuple(eps)), PolySequence(P, tuple(gam)), max(dens)


def _divisors(n: int) -> List[int]:
    return [t for t in range(1, n + 1) if n % t == 0]


def _hint_character(cur: PolySequence, hint: Sequence[int], N: int, tol: float, d: int) -> Optional[ObstructionResult]:
    for t in _divisors(math.factorial(max(1, d))):
        k = tuple(t * x for x in hint)
        nrm = c_infty_norm(compose_horizontal(HorizontalCharacter(k), cur), N)
        if upper(nrm) <= tol:
            return ObstructionResult(HorizontalCharacter(k).canonical(), nrm, "hint", max(map(abs, k)), tol, t)
    return None


def factorise_once(g: PolySequence, N: int, A: Optional[float] = None, config: Optional[ConstantsConfig] = None,
                   *, M0: int = 2, subgroup: Optional[RationalSubgroup] = None,
                   hint: Optional[Sequence[int]] = None) -> Factorisation:
    """g = ε g′ γ with ε (M, N)-smooth, γ M-rational and g′ free of
    obstructions at scale M^{-A} inside a rational subgroup G′.

    ``subgroup`` is a rational subgroup already containing the values of g
    (default: the whole group).  ``hint`` is a horizontal character of that
    subgroup known to obstruct some dilate of g (used by the tree when the
    scale-M search comes back empty)."""
    config = config or ConstantsConfig()
    A = config.A if A is None else A
    G = g.group
    S = subgroup or full_subgroup(G)
    if S.ambient is not G:
        raise GroupError("subgroup lives in a different group")
    M0 = max(2, int(M0))
    M = M0
    cur = to_subgroup(g, S)
    eps_parts: List[PolySequence] = []
    gam_parts: List[PolySequence] = []
    steps: List[dict] = []
    direct_json = None
    for it in range(G.m + 1):
        P = S.inner
        if P.m == 0 or P.h == 0:
            break
        delta = float(M) ** (-A)
        K = config.obstruction_cutoff(delta, N)
        res = obstruction_search(cur, N, K, config.tau, config.exhaustive_limit)
        if res.character is None and hint is not None and it == 0:
            tol = config.tau * config.C_prime ** G.d
            res = _hint_character(cur, hint, N, tol, G.d) or res
            if res.character is None:
                raise FactorisationError("the obstruction inherited from the parent node is not visible on this residue class")
        if res.character is None and config.direct_check and N < resolvable_length(delta):
            direct_json = {"skipped": f"delta = {delta:.3g} is below the resolvable scale N^-1/2"}
        elif res.character is None and config.direct_check:
            ok, rep = total_verdict(cur, N, min(1.0, delta), config)
            direct_json = rep.to_json()
            tau = config.tau
            while not ok and res.character is None:
                tau *= 2
                if tau > float(M) ** A:
                    raise FactorisationError(
                        f"direct defect {rep.defect:.3g} exceeds M^-A = {delta:.3g} but no obstruction "
                        f"with norm <= {tau / 2:.3g} and |k| <= {K} exists")
                res = obstruction_search(cur, N, K, tau, config.exhaustive_limit)
        if res.character is None:
            break
        k = list(res.character.k)
        c = 0
        for x in k:
            c = math.gcd(c, x)
        k0 = [x // c for x in k]
        eps_P, gam_P, den = _split_phase(P, cur, k0, c)
        nxt = pointwise_product(pointwise_product(inverse_sequence(eps_P), cur), inverse_sequence(gam_P))
        S_new = kernel_subgroup(S, k0)
        nxt_root = from_subgroup(nxt, S)
        if _all_exact(nxt_root) and not all(S_new.contains(cf) for cf in nxt_root.coeffs):
            raise InvariantViolation("remainder left the kernel subgroup")
        eps_parts.append(from_subgroup(eps_P, S))
        gam_parts.append(from_subgroup(gam_P, S))
        steps.append({"character": k, "norm": float(upper(res.norm)), "method": res.method, "K": res.K,
                      "threshold": res.threshold, "M": M, "denominator": den,
                      "dimension_before": S.dimension, "dimension_after": S_new.dimension})
        cur = to_subgroup(nxt_root, S_new)
        S = S_new
        M = max(M, den)
    else:
        raise InvariantViolation("factorise_once did not terminate within dim G steps")

    epsilon = product_of(G, eps_parts) if eps_parts else PolySequence.identity(G)
    gamma = product_of(G, list(reversed(gam_parts))) if gam_parts else PolySequence.identity(G)
    gprime = from_subgroup(cur, S)
    if not reconstruction_holds(g, [epsilon, gprime, gamma]):
        raise InvariantViolation("reconstruction identity failed")

    cap = int(M0 ** config.scale_cap_exponent)
    rat = rationality_certificate(gamma, cap)
    if not rat["ok"]:
        raise FactorisationError(f"gamma is not rational within the cap M0^{config.scale_cap_exponent}: {rat['reason']}")
    q_gamma = rat["period"]
    sm = smoothness_certificate(epsilon, N, M)
    M = max(M, q_gamma, rat["max_height"], math.ceil(sm["sup_increment"] * N))
    sm.update(M=M, definition_ok=sm["sup_dist_id"] <= M, increment_ok=sm["sup_increment"] <= M / N)
    if M > cap:
        raise FactorisationError(f"M = {M} exceeds M0^{config.scale_cap_exponent} "
                                 f"(measured exponent {math.log(M) / math.log(M0):.2f})")
    certs = {"smoothness": sm, "rationality": rat,
             "equidistribution": {"delta": float(M) ** (-A), "obstruction": "none",
                                  "K": config.obstruction_cutoff(float(M) ** (-A), N), "tau": config.tau,
                                  "direct": direct_json},
             "reconstruction": "exact" if _all_exact(g) else "ball",
             "reduced_precision": S.reduced}
    return Factorisation(epsilon, gprime, gamma, S, M, q_gamma, certs, steps)


# -- full-group certificate -----------------------------------------------------------------


def _frozen_points(f: Factorisation, ns: np.ndarray, starts: np.ndarray, bits: int = FIXED_BITS):
    """Fundamental-domain points of ε(s_n) g′(n) γ(n)."""
    G = f.gPrime.group
    y = pointwise_product(f.gPrime, f.gamma)
    Y, _ = coordinate_values(y, ns, bits)
    E, _ = coordinate_values(f.epsilon, starts, bits)
    one = 1 << bits
    Z = [e + yy for e, yy in zip(E, Y)]
    if G.bilinear is not None:
        h = G.h
        for j, mat in enumerate(G.bilinear):
            for p in range(h):
                for q in range(h):
                    c = mat[p][q]
                    if c:
                        Z[h + j] = Z[h + j] + (E[p] * Y[q] * c.numerator) // (c.denominator * one)
    else:
        raise FactorisationError("freezing check needs a bilinear group law")
    return reduce_mod_lattice(G, Z, bits)


def certify_full_group(f: Factorisation, A: float, N: int, config: Optional[ConstantsConfig] = None) -> EquidistReport:
    """Total equidistribution of g = ε g′ γ at M^{-A/(2C)} from that of g′
    when G′ = G, following the piece-freezing argument."""
    config = config or ConstantsConfig()
    if not f.subgroup.is_full:
        raise FactorisationError("certify_full_group needs G′ = G")
    G = f.gPrime.group
    M = f.M
    expo = A / (2 * config.C)
    delta_c = min(1.0, float(M) ** (-expo))
    family = default_family(G, config)
    progs = ProgressionSet.total(N, delta_c, config.q_max, config.window_grid)
    if G.m == 0:
        return EquidistReport(0.0, 0.0, None, progs.mode, N, tuple(family), progs, delta_c, delta_c, True)
    gp_rep = direct_defect(f.gPrime, N, family, progs)
    if _is_identity_seq(f.epsilon) and _is_identity_seq(f.gamma):
        extra = {"certified_exponent": expo, "gprime_defect": gp_rep.defect, "freeze_error": 0.0,
                 "freeze_bound": 0.0, "transfers": []}
        return EquidistReport(gp_rep.defect, gp_rep.bias, gp_rep.witness if gp_rep.defect > delta_c else None,
                              gp_rep.mode, N, gp_rep.family, progs, delta_c, delta_c,
                              gp_rep.defect <= delta_c, gp_rep.precision, extra)
    g = product_of(G, [f.epsilon, f.gPrime, f.gamma])
    rep = direct_defect(g, N, family, progs, threshold=delta_c)
    # transfer for each value of γ along one period
    transfers = []
    for a in range(min(f.q_gamma, 64)):
        t = transfer_right_multiply(f.gPrime, evaluate(f.gamma, a), gp_rep, config)
        transfers.append({"residue": a, "measured": t.defect,
                          "declared": t.extra.get("declared_bound", gp_rep.defect)})
    # freeze ε on pieces of each residue class of γ's period
    piece = max(1, math.ceil(float(M) ** (-(expo + 1)) * N))
    ns = np.arange(1, N + 1)
    p = f.q_gamma
    cls = (ns - 1) % p
    pos = (ns - 1) // p
    pid = cls * (N // p + 2) + pos // piece
    uniq, inv = np.unique(pid, return_inverse=True)
    first = np.full(len(uniq), N + 1)
    np.minimum.at(first, inv, ns)
    starts = first[inv]
    xh, xv, _ = orbit_points(g, ns)
    fh, fv = _frozen_points(f, ns, starts)
    err = 0.0
    counts = np.bincount(inv)
    for F in family:
        diff = F.values(xh, xv) - F.values(fh, fv)
        sr = np.bincount(inv, weights=diff.real)
        si = np.bincount(inv, weights=diff.imag)
        err = max(err, float((np.hypot(sr, si) / counts).max()) / F.norm)
    extra = {"certified_exponent": expo, "gprime_defect": gp_rep.defect, "piece_length": piece,
             "freeze_error": err, "freeze_bound": 2 * float(M) ** (-expo), "transfers": transfers}
    return EquidistReport(rep.defect, rep.bias, rep.witness, rep.mode, N, rep.family, progs, delta_c, delta_c,
                          rep.passed, rep.precision, extra)


# -- residue splitting and the smooth search ------------------------------------------------


def residue_split(g: PolySequence, q1: int, d: int, base: Optional[SmoothBase] = None,
                  N: Optional[int] = None) -> List[Tuple[int, int, PolySequence]]:
    if q1 < 2:
        raise ValueError("q1 must be at least 2")
    if base is not None and not is_smooth(q1, base, N):
        raise ValueError(f"q1 = {q1} is not smooth for base {base.label()}")
    z = q1 ** d
    return [(z, r, reindex(g, z, r)) for r in range(z)]


@dataclass(frozen=True)
class SmoothFailure:
    qtilde: int
    witness: Tuple[int, ...]
    norm: float
    length: int
    K: int
    method: str

    def to_json(self) -> dict:
        return {"qtilde": self.qtilde, "witness": list(self.witness), "norm": self.norm,
                "length": self.length, "K": self.K, "method": self.method}


def resolvable_length(delta: float) -> int:
    """Shortest length L with delta * sqrt(L) >= 1; shorter sequences are not
    tested at scale delta (Dirichlet noise dominates there)."""
    return math.ceil(delta ** -2 - 1e-9)


def smooth_failure_search(gPrime: PolySequence, N: int, q: int, q_gamma: int, R: int, E: int, B: float,
                          base: SmoothBase, Q: Optional[int] = None, config: Optional[ConstantsConfig] = None,
                          min_q: int = 1, log: Optional[dict] = None,
                          max_q: Optional[int] = None) -> Optional[SmoothFailure]:
    """Smallest smooth q̃ in [min_q, (q q_γ R)^E) (capped by config.qtilde_cap
    and max_q) whose dilate n -> gPrime(q̃ n), n <= N/(q q̃), fails at Q^{-B}."""
    config = config or ConstantsConfig()
    Q = R if Q is None else Q
    G = gPrime.group
    limit = (q * q_gamma * R) ** E
    capped = min(limit, config.qtilde_cap + 1)
    cands = [x for x in enumerate_smooth(capped, base, N) if x >= min_q and (max_q is None or x <= max_q)]
    if log is not None:
        log.update({"limit": limit, "cap": config.qtilde_cap, "capped": capped < limit, "candidates": len(cands),
                    "resolvable_length": resolvable_length(float(Q) ** (-B))})
    if G.m == 0 or G.h == 0:
        return None
    delta = float(Q) ** (-B)
    for qt in cands:
        length = N // (q * qt)
        if length < resolvable_length(delta):
            if log is not None:
                log["unresolved_from"] = qt
            break
        seq = reindex(gPrime, qt, 0)
        res = obstruction_verdict(seq, length, delta, config)
        if res.character is not None:
            return SmoothFailure(qt, tuple(res.character.k), float(upper(res.norm)), length, res.K, res.method)
    return None


# -- the tree --------------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeParams:
    N: int
    T: int
    B: float = 2
    E: int = 2
    R: int = 8
    base: SmoothBase = SmoothBase.fixed(2)
    Q0: int = 2
    seed: int = 0

    def check(self) -> List[str]:
        """Sanity checks; returns non-fatal flags, raises on fatal ones."""
        if self.T < 1 or self.N < 1:
            raise ValueError("N and T must be positive")
        if self.T > self.N:
            raise ValueError("T exceeds N")
        if self.R < self.Q0:
            raise ValueError("R must be at least Q0")
        flags = []
        kN = self.base.bound(self.N)
        if not self.Q0 <= math.log(kN):
            flags.append(f"Q0 = {self.Q0} exceeds log k(N) = {math.log(kN):.3f}")
        return flags

    def to_json(self) -> dict:
        return {"N": self.N, "T": self.T, "B": self.B, "E": self.E, "R": self.R,
                "base": self.base.to_json(), "Q0": self.Q0, "seed": self.seed}


@dataclass(eq=False)
class Level:
    """One split along a root-to-leaf path: residue r of modulus z, and the
    factorisation of the parent's g′ restricted to z n + r."""
    z: int
    r: int
    qtilde: int
    witness: Tuple[int, ...]
    factorisation: Factorisation


@dataclass(eq=False)
class Leaf:
    q: int
    r: int
    levels: List[Level]
    subgroup: RationalSubgroup
    gPrime: PolySequence          # ambient coordinates
    epsilon: PolySequence         # assembled ε̃
    gamma: PolySequence           # assembled γ̃
    q_gamma: int
    report: Optional["VerificationReport"] = None
    stored_depth: Optional[int] = None      # set when loaded from a file
    stored_factors: Optional[int] = None

    @property
    def depth(self) -> int:
        return len(self.levels) if self.stored_depth is None else self.stored_depth

    @property
    def factors(self) -> int:
        """Number of non-trivial rational factors composing γ̃."""
        if self.stored_factors is not None:
            return self.stored_factors
        return sum(1 for lv in self.levels if not _is_identity_seq(lv.factorisation.gamma))

    def elements(self, T: int) -> range:
        start = self.r if self.r >= 1 else self.q
        return range(start, T + 1, self.q)


@dataclass(eq=False)
class FactorisationTree:
    g: PolySequence
    params: TreeParams
    config: ConstantsConfig
    leaves: List[Leaf]
    Q: int
    flags: List[str]
    splits: List[dict]

    @property
    def height(self) -> int:
        return max((lf.depth for lf in self.leaves), default=0)

    @property
    def passed(self) -> bool:
        return all(lf.report is not None and lf.report.passed for lf in self.leaves)


def assemble_leaf_factors(levels: Sequence[Level]) -> Tuple[PolySequence, PolySequence, PolySequence]:
    """(ε̃, g′_t, γ̃) with g(q m + r) = ε̃(m) g′_t(m) γ̃(m), where
    ε̃(m) = ε_1(a_1(m)) ⋯ ε_t(m), γ̃(m) = γ_t(m) ⋯ γ_1(a_1(m)) and
    a_i(m) = z_{i+1} ⋯ z_t m + ρ_i."""
    if not levels:
        raise ValueError("empty path")
    G = levels[0].factorisation.epsilon.group
    for lv in levels:
        if lv.factorisation.epsilon.group is not G or not (0 <= lv.r < lv.z):
            raise ValueError("inconsistent path")
    t = len(levels)
    Z = [1] * (t + 1)
    rho = [0] * (t + 1)
    for i in range(t - 1, 0, -1):
        Z[i] = Z[i + 1] * levels[i].z
        rho[i] = levels[i].z * rho[i + 1] + levels[i].r
    Z[t], rho[t] = 1, 0
    eps, gam = [], []
    for i in range(1, t + 1):
        f = levels[i - 1].factorisation
        eps.append(reindex_shift_scale(f.epsilon, Z[i], rho[i]))
        gam.append(reindex_shift_scale(f.gamma, Z[i], rho[i]))
    e_t = product_of(G, eps)
    g_t = product_of(G, list(reversed(gam)))
    return e_t, levels[-1].factorisation.gPrime, g_t


def reindex_shift_scale(g: PolySequence, q: int, r: int) -> PolySequence:
    if q == 1 and r == 0:
        return g
    return reindex(g, q, r)


def _path_offset(levels: Sequence[Level]) -> Tuple[int, int]:
    q, r = 1, 0
    for lv in levels:
        r = q * lv.r + r
        q = q * lv.z
    return q, r


@dataclass
class VerificationReport:
    smoothness: dict
    rationality: dict
    equidistribution: dict
    reconstruction: bool
    passed: bool

    def to_json(self) -> dict:
        return {"smoothness": self.smoothness, "rationality": self.rationality,
                "equidistribution": self.equidistribution, "reconstruction": self.reconstruction,
                "passed": self.passed}


def verify_leaf(leaf: Leaf, g: PolySequence, params: TreeParams, config: ConstantsConfig, Q: int,
                period_override: Optional[int] = None) -> VerificationReport:
    """The three leaf properties: smooth ε̃, rational periodic γ̃ with at most m
    factors, and no failing smooth dilate of g′ at Q^{-B}."""
    G = g.group
    L = max(1, params.T // leaf.q)
    sm = smoothness_certificate(leaf.epsilon, L, Q)
    sm["pass"] = bool(sm["within_N_ok"] and sm["increment_ok"])
    # (2) rationality and period
    reasons = []
    rat = rationality_certificate(leaf.gamma, max(Q, 1))
    period = rat.get("period")
    if period_override is not None and period_override != period:
        reasons.append(f"stored period {period_override} does not match recomputed period {period}")
        period = period_override
    if not rat["ok"]:
        reasons.append(rat["reason"])
    if period is not None:
        if period > Q:
            reasons.append("period exceeds Q")
        if not is_smooth(period, params.base, params.N):
            reasons.append("period not k-smooth")
    factors = leaf.factors
    if factors > G.m:
        reasons.append("more than m rational factors")
    ratj = {"period": period, "max_height": rat.get("max_height"), "factors": factors, "Q": Q,
            "pass": not reasons, "reasons": reasons}
    # (3) no smooth dilate fails
    inner = to_subgroup(leaf.gPrime, leaf.subgroup)
    log: dict = {}
    fail = smooth_failure_search(inner, params.T, leaf.q, period or 1, params.R, params.E, params.B,
                                 params.base, Q, config, min_q=1, log=log)
    eq = {"threshold": float(Q) ** (-params.B), "search": log, "failure": fail.to_json() if fail else None,
          "pass": fail is None, "residues": "0 only"}
    rec = reconstruction_holds(g, [leaf.epsilon, leaf.gPrime, leaf.gamma], leaf.q, leaf.r)
    ok = sm["pass"] and ratj["pass"] and eq["pass"] and rec
    return VerificationReport(sm, ratj, eq, rec, ok)


def build_tree(g: PolySequence, params: TreeParams, config: Optional[ConstantsConfig] = None) -> FactorisationTree:
    """Partition {1..T} into smooth-difference progressions on each of which
    g = ε̃ g′ γ̃ with g′ free of obstructions on all smooth dilates."""
    config = config or ConstantsConfig()
    flags = params.check()
    G = g.group
    root = full_subgroup(G)
    state = {"Q": max(params.Q0, 1)}
    splits: List[dict] = []
    leaves: List[Leaf] = []

    def make_leaf(levels: List[Level], S: RationalSubgroup, gP: PolySequence) -> Leaf:
        q, r = _path_offset(levels)
        if levels:
            e, gp, gm = assemble_leaf_factors(levels)
        else:
            e, gp, gm = PolySequence.identity(G), g, PolySequence.identity(G)
        rat = rationality_certificate(gm, int(max(state["Q"], 2) ** config.scale_cap_exponent))
        if not rat["ok"]:
            raise FactorisationError(f"assembled gamma is not periodic: {rat['reason']}")
        state["Q"] = max(state["Q"], rat["period"], rat["max_height"])
        return Leaf(q, r, list(levels), S, gp, e, gm, rat["period"])

    def expand(leaf: Leaf) -> List[Leaf]:
        S = leaf.subgroup
        inner = to_subgroup(leaf.gPrime, S)
        fail = None
        # children g(z n + r) must stay long enough to be resolvable at Q^{-B}
        need = resolvable_length(float(state["Q"]) ** (-params.B))
        max_q = 1
        while leaf.q * (max_q + 1) ** G.d * need <= params.T:
            max_q += 1
        if S.dimension:
            for mq in (2, 1):
                fail = smooth_failure_search(inner, params.T, leaf.q, leaf.q_gamma, params.R, params.E, params.B,
                                             params.base, state["Q"], config, min_q=mq,
                                             max_q=max_q if mq == 2 else 1)
                if fail is not None:
                    break
        if fail is None:
            return [leaf]
        if leaf.depth >= G.m:
            raise InvariantViolation(f"tree depth would exceed m = {G.m}")
        z = fail.qtilde ** G.d
        q_new = leaf.q * z
        if q_new > params.R ** config.difference_cap_exponent:
            raise FactorisationError(f"common difference {q_new} exceeds R^{config.difference_cap_exponent}")
        splits.append({"q": leaf.q, "r": leaf.r, "qtilde": fail.qtilde, "z": z, "witness": list(fail.witness),
                       "norm": fail.norm, "Q": state["Q"]})
        out = []
        length = max(1, params.T // q_new)
        for ri in range(z):
            child = reindex(inner, z, ri) if z > 1 else inner
            f = factorise_once(from_subgroup(child, S), length, config.A, config, M0=state["Q"], subgroup=S,
                               hint=fail.witness)
            if f.subgroup.dimension >= S.dimension:
                raise InvariantViolation("subgroup dimension did not drop")
            state["Q"] = max(state["Q"], f.M)
            lv = Level(z, ri, fail.qtilde, fail.witness, f)
            out.extend(expand(make_leaf(leaf.levels + [lv], f.subgroup, f.gPrime)))
        return out

    pending = expand(make_leaf([], root, g))
    # re-verify at the final Q until stable
    while True:
        Q = state["Q"]
        if Q > max(params.Q0, 2) ** config.scale_cap_exponent:
            raise FactorisationError(f"Q = {Q} exceeds Q0^{config.scale_cap_exponent}")
        changed = False
        new = []
        for lf in pending:
            lf.report = verify_leaf(lf, g, params, config, Q)
            if not lf.report.equidistribution["pass"] and lf.subgroup.dimension:
                out = expand(lf)
                changed = changed or out != [lf]
                new.extend(out)
            else:
                new.append(lf)
        pending = new
        if not changed and state["Q"] == Q:
            break
    leaves = sorted(pending, key=lambda lf: (lf.q, lf.r))
    return FactorisationTree(g, params, config, leaves, state["Q"], flags, splits)


def tree_partition_ok(tree: FactorisationTree) -> bool:
    T = tree.params.T
    seen = np.zeros(T + 1, dtype=np.int64)
    for lf in tree.leaves:
        for x in lf.elements(T):
            seen[x] += 1
    return bool((seen[1:] == 1).all())
