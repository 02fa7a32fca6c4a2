"""Quantitative equidistribution of polynomial orbits.

The direct oracle measures

    sup_{F, P} |avg_{n in P} F(g(n)Γ) - ∫F| / ‖F‖_Lip

over a declared finite family of test functions and a declared set of
progressions inside [1, N].  ‖F‖_Lip = sup|F| + Lip(F); every test function has
sup|F| = 1.  The raw (unnormalised) supremum is reported alongside as ``bias``.
"""

from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import lattice
from .config import ConstantsConfig
from .nilgroup import FilteredGroup
from .polyseq import (HorizontalCharacter, PolySequence, c_infty_norm, compose_horizontal,
                      coordinate_polynomials, evaluate, horizontal_taylor, pointwise_product)
from .scalars import is_exact, midpoint, radius, upper

TAU = 2 * math.pi
FIXED_BITS = 128


class EquidistError(ValueError):
    pass


# -- test functions -------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """kind "horizontal": e(k·x_h); kind "vertical": e(xi·w) Π sin²(π x_i),
    with (x_h, w) the fundamental-domain representative of gΓ."""

    __test__ = False  # not a pytest class

    kind: str
    k: Tuple[int, ...] = ()
    xi: Tuple[int, ...] = ()
    lipschitz: float = 0.0
    mean: float = 0.0

    @property
    def id(self) -> str:
        if self.kind == "horizontal":
            return "chr:" + ",".join(map(str, self.k))
        return "vsm:" + ",".join(map(str, self.xi))

    @property
    def norm(self) -> float:
        return 1.0 + self.lipschitz

    @property
    def key(self):
        v = self.k if self.kind == "horizontal" else self.xi
        return (0 if self.kind == "horizontal" else 1, max(map(abs, v), default=0), v)

    def values(self, xh: np.ndarray, xv: Optional[np.ndarray]) -> np.ndarray:
        if self.kind == "horizontal":
            ph = np.zeros(xh.shape[1])
            for ki, row in zip(self.k, xh):
                if ki:
                    ph = ph + ki * row
            return np.exp(1j * TAU * ph)
        if xv is None:
            raise EquidistError("vertical test functions need a bilinear group law")
        ph = np.zeros(xv.shape[1])
        for xi, row in zip(self.xi, xv):
            if xi:
                ph = ph + xi * row
        amp = np.ones(xv.shape[1])
        for row in xh:
            amp = amp * np.sin(math.pi * row) ** 2
        return amp * np.exp(1j * TAU * ph)

    def value_at(self, xh: Sequence[float], xv: Sequence[float]) -> complex:
        return complex(self.values(np.array(xh, dtype=float).reshape(-1, 1),
                                   None if xv is None else np.array(xv, dtype=float).reshape(-1, 1))[0])

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind, "lipschitz": self.lipschitz, "mean": self.mean}


def _canonical_vectors(dim: int, K: int) -> List[Tuple[int, ...]]:
    out = []
    for v in itertools.product(range(-K, K + 1), repeat=dim):
        nz = [x for x in v if x]
        if nz and nz[-1] > 0:
            out.append(v)
    out.sort(key=lambda v: (max(map(abs, v)), v))
    return out


def character_family(h: int, K: int) -> List[TestFunction]:
    """Horizontal characters with |k|_∞ <= K, one per ± pair."""
    return [TestFunction("horizontal", k=k, lipschitz=TAU * sum(map(abs, k)))
            for k in _canonical_vectors(h, K)]


def _beta(G: FilteredGroup) -> float:
    return float(sum(abs(x) for mat in G.bilinear for row in mat for x in row))


def vertical_family(G: FilteredGroup, K: int) -> List[TestFunction]:
    if G.bilinear is None or G.m == G.h or K < 1:
        return []
    beta = _beta(G)
    return [TestFunction("vertical", xi=xi, lipschitz=TAU * sum(map(abs, xi)) * (1 + beta) + math.pi * G.h)
            for xi in _canonical_vectors(G.m - G.h, K)]


def default_family(G: FilteredGroup, config: Optional[ConstantsConfig] = None) -> List[TestFunction]:
    config = config or ConstantsConfig()
    return character_family(G.h, config.char_cutoff) + vertical_family(G, config.vertical_cutoff)


def family_bounds(family: Sequence[TestFunction]) -> dict:
    hk = [f for f in family if f.kind == "horizontal"]
    vk = [f for f in family if f.kind == "vertical"]
    return {"size": len(family),
            "char_cutoff": max((max(map(abs, f.k)) for f in hk), default=0),
            "vertical_cutoff": max((max(map(abs, f.xi)) for f in vk), default=0)}


# -- progressions ---------------------------------------------------------------


@dataclass(frozen=True)
class ProgressionSet:
    """Residue classes n ≡ r (mod q), q <= q_max, inside [1, N], and windows
    of consecutive class elements with length >= min_length.  Window
    endpoints lie on a grid of the given stride (a class of length L uses
    stride max(stride, ceil(L / grid))); windows=False keeps whole classes."""

    q_max: int = 64
    min_length: int = 1
    windows: bool = True
    stride: Optional[int] = None
    grid: int = 256
    sampled: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.q_max < 1 or self.min_length < 1 or self.grid < 1:
            raise EquidistError("progression bounds must be positive")

    @classmethod
    def total(cls, N: int, delta: float, q_max: int = 64, grid: int = 256, **kw) -> "ProgressionSet":
        return cls(q_max=q_max, min_length=max(1, math.ceil(delta * N - 1e-12)), grid=grid, **kw)

    @classmethod
    def plain(cls) -> "ProgressionSet":
        return cls(q_max=1, min_length=1, windows=False)

    @property
    def mode(self) -> str:
        return "certified-enumeration" if self.sampled == 0 else "sampled"

    def class_stride(self, length: int) -> int:
        s = self.stride if self.stride is not None else max(1, self.min_length // 4)
        return max(s, math.ceil(length / self.grid))

    def classes(self, N: int):
        """(q, r, first element, class length) for every class long enough."""
        for q in range(1, self.q_max + 1):
            for r in range(q):
                first = r if r >= 1 else q
                if first > N:
                    continue
                length = (N - first) // q + 1
                if length >= self.min_length:
                    yield q, r, first, length

    def positions(self, length: int) -> np.ndarray:
        if not self.windows:
            return np.array([0, length])
        s = self.class_stride(length)
        pos = list(range(0, length, s))
        pos.append(length)
        return np.array(sorted(set(pos)))

    def to_json(self) -> dict:
        return {"q_max": self.q_max, "min_length": self.min_length, "windows": self.windows,
                "stride": self.stride, "grid": self.grid, "sampled": self.sampled,
                "seed": self.seed, "mode": self.mode}


@dataclass(frozen=True)
class Witness:
    q: int
    r: int
    first: int      # first element n of the progression
    length: int
    test: str       # test function id

    def elements(self) -> range:
        return range(self.first, self.first + self.q * self.length, self.q)

    def to_json(self) -> dict:
        return {"q": self.q, "r": self.r, "first": self.first, "length": self.length, "test": self.test}


@dataclass(frozen=True, eq=False)
class EquidistReport:
    defect: float
    bias: float
    witness: Optional[Witness]
    mode: str
    N: int
    family: Tuple[TestFunction, ...]
    progression_set: ProgressionSet
    threshold: Optional[float] = None
    delta: Optional[float] = None
    passed: Optional[bool] = None
    precision: float = 0.0
    extra: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"defect": self.defect, "bias": self.bias,
               "witness": self.witness.to_json() if self.witness else None,
               "mode": self.mode, "N": self.N, "delta": self.delta, "threshold": self.threshold,
               "passed": self.passed, "precision": self.precision,
               "family": family_bounds(self.family), "progressions": self.progression_set.to_json()}
        if self.extra:
            out["extra"] = self.extra
        return out


# -- coordinates and reduction mod Γ ------------------------------------------------


def _fixed(x, bits: int) -> int:
    m = midpoint(x)
    return (m.numerator << bits) // m.denominator


def coordinate_values(g: PolySequence, ns: np.ndarray, bits: int = FIXED_BITS):
    """Fixed-point coordinates (integers scaled by 2^bits) of g(n) for each n,
    plus an upper bound on the absolute error of each coordinate."""
    G = g.group
    polys = coordinate_polynomials(g)
    D = max((len(p) for p in polys), default=1) - 1
    n_obj = np.asarray(ns, dtype=np.int64).astype(object)
    binoms = [np.full(len(n_obj), 1, dtype=object)]
    for j in range(1, D + 1):
        binoms.append(binoms[-1] * (n_obj - (j - 1)) // j)
    nmax = int(max(abs(int(x)) for x in ns)) if len(ns) else 0
    bmax = [math.comb(nmax + j, j) for j in range(D + 1)]
    X, err = [], []
    for i in range(G.m):
        acc = np.zeros(len(n_obj), dtype=object)
        e = 0.0
        for j, c in enumerate(polys[i]):
            if c == 0:
                continue
            acc = acc + _fixed(c, bits) * binoms[j]
            e += (float(radius(c)) + 2.0 ** -bits) * bmax[j]
        X.append(acc)
        err.append(e)
    return X, err


def _to_unit_float(arr: np.ndarray, bits: int) -> np.ndarray:
    return (arr >> (bits - 52)).astype(np.float64) / float(1 << 52)


def reduce_mod_lattice(G: FilteredGroup, X: List[np.ndarray], bits: int = FIXED_BITS):
    """Fundamental-domain representative of xΓ in [0,1)^m: horizontal
    coordinates by fractional part, vertical ones by w = x_v - B(x_h, ⌊x_h⌋)
    mod 1.  Returns float arrays (xh, xv); xv is None for non-bilinear laws."""
    h = G.h
    floors = [x >> bits for x in X[:h]]
    fr = [x - (f << bits) for x, f in zip(X[:h], floors)]
    xh = np.array([_to_unit_float(f, bits) for f in fr]).reshape(h, -1) if h else np.zeros((0, len(X[0]) if X else 0))
    if G.bilinear is None or G.m == h:
        return xh, None
    xv = []
    for j, mat in enumerate(G.bilinear):
        w = X[h + j]
        for p in range(h):
            for q in range(h):
                c = mat[p][q]
                if c:
                    w = w - (X[p] * floors[q] * c.numerator) // c.denominator
        w = w - ((w >> bits) << bits)
        xv.append(_to_unit_float(w, bits))
    return xh, np.array(xv)


def orbit_points(g: PolySequence, ns: np.ndarray, bits: int = FIXED_BITS):
    X, err = coordinate_values(g, ns, bits)
    xh, xv = reduce_mod_lattice(g.group, X, bits)
    return xh, xv, max(err, default=0.0)


# -- the direct oracle ----------------------------------------------------------------


def _scan(values: np.ndarray, means: np.ndarray, norms: np.ndarray, N: int, progs: ProgressionSet):
    """Max normalised defect over (test function, window); returns
    (defect, bias, witness indices)."""
    best = -1.0
    best_key = None
    best_w = None
    bias = 0.0
    rng = random.Random(progs.seed)
    samples: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    classes = list(progs.classes(N))
    if not classes:
        raise EquidistError("empty progression set")
    for _ in range(progs.sampled):
        q, r, first, length = classes[rng.randrange(len(classes))]
        L = rng.randint(progs.min_length, length)
        a = rng.randint(0, length - L)
        samples.setdefault((q, r), []).append((a, a + L))
    for q, r, first, length in classes:
        idx = np.arange(first - 1, N, q)
        vals = values[:, idx]
        pref = np.zeros((values.shape[0], length + 1), dtype=complex)
        np.cumsum(vals, axis=1, out=pref[:, 1:])
        pos = progs.positions(length)
        ia, ib = np.triu_indices(len(pos), k=1)
        lens = pos[ib] - pos[ia]
        keep = lens >= progs.min_length
        ia, ib, lens = ia[keep], ib[keep], lens[keep]
        # order pairs by (start asc, length desc) so the first maximum wins ties
        order = np.lexsort((-lens, pos[ia]))
        starts = pos[ia][order]
        ends = pos[ib][order]
        extra = samples.get((q, r), [])
        if extra:
            starts = np.concatenate([starts, [a for a, _ in extra]]).astype(np.int64)
            ends = np.concatenate([ends, [b for _, b in extra]]).astype(np.int64)
        if len(starts) == 0:
            continue
        L = (ends - starts).astype(float)
        avg = (pref[:, ends] - pref[:, starts]) / L
        dev = np.abs(avg - means[:, None])
        bias = max(bias, float(dev.max()))
        nd = dev / norms[:, None]
        flat = nd.max(axis=1)
        for fi in range(values.shape[0]):
            v = float(flat[fi])
            key = (fi, q, r)
            if v > best or (v == best and key < best_key):
                j = int(np.argmax(nd[fi]))
                best, best_key = v, key
                best_w = (fi, q, r, first, int(starts[j]), int(ends[j] - starts[j]))
    return max(best, 0.0), bias, best_w


def _trivial_report(N, family, progs, threshold=None, delta=None) -> EquidistReport:
    return EquidistReport(0.0, 0.0, None, progs.mode, N, tuple(family), progs, threshold, delta,
                          None if threshold is None else True)


def direct_defect(g: PolySequence, N: int, family: Sequence[TestFunction], progressions: ProgressionSet,
                  threshold: Optional[float] = None) -> EquidistReport:
    """Exact supremum over the declared family and progression set."""
    if N < 1:
        raise EquidistError("N must be positive")
    if not family:
        raise EquidistError("empty test family")
    family = sorted(family, key=lambda f: f.key)
    if g.group.m == 0:
        if not list(progressions.classes(N)):
            raise EquidistError("empty progression set")
        return _trivial_report(N, family, progressions, threshold)
    ns = np.arange(1, N + 1)
    xh, xv, prec = orbit_points(g, ns)
    values = np.array([f.values(xh, xv) for f in family])
    means = np.array([f.mean for f in family], dtype=complex)
    norms = np.array([f.norm for f in family])
    defect, bias, w = _scan(values, means, norms, N, progressions)
    cut = 0.0 if threshold is None else threshold
    witness = None
    if w is not None and defect > cut:
        fi, q, r, first, start, length = w
        witness = Witness(q, r, first + q * start, length, family[fi].id)
    passed = None if threshold is None else defect <= threshold
    return EquidistReport(defect, bias, witness, progressions.mode, N, tuple(family), progressions,
                          threshold, None, passed, prec)


def brute_force_defect(g: PolySequence, N: int, family: Sequence[TestFunction],
                       progressions: ProgressionSet) -> float:
    """Independent slow path: each g(n) evaluated exactly in the group, reduced
    mod Γ with rational arithmetic, windows summed with plain Python."""
    G = g.group
    if G.m == 0:
        return 0.0
    family = sorted(family, key=lambda f: f.key)
    pts = []
    for n in range(1, N + 1):
        x = [midpoint(c) for c in evaluate(g, n)]
        fl = [math.floor(c) for c in x[:G.h]]
        xh = [float(c - f) for c, f in zip(x[:G.h], fl)]
        xv = None
        if G.bilinear is not None and G.m > G.h:
            xv = []
            for j, mat in enumerate(G.bilinear):
                w = x[G.h + j] - sum(mat[p][q] * x[p] * fl[q] for p in range(G.h) for q in range(G.h))
                xv.append(float(w - math.floor(w)))
        pts.append((xh, xv))
    best = 0.0
    for f in family:
        vals = []
        for xh, xv in pts:
            if f.kind == "horizontal":
                vals.append(cmath.exp(1j * TAU * sum(k * x for k, x in zip(f.k, xh))))
            else:
                amp = 1.0
                for x in xh:
                    amp *= math.sin(math.pi * x) ** 2
                vals.append(amp * cmath.exp(1j * TAU * sum(k * x for k, x in zip(f.xi, xv))))
        for q, r, first, length in progressions.classes(N):
            cls = vals[first - 1::q]
            pref = [0j]
            for v in cls:
                pref.append(pref[-1] + v)
            pos = progressions.positions(length).tolist()
            for a, b in itertools.combinations(pos, 2):
                if b - a >= progressions.min_length:
                    best = max(best, abs((pref[b] - pref[a]) / (b - a) - f.mean) / f.norm)
    return best


def witness_defect(g: PolySequence, witness: Witness, family: Sequence[TestFunction]) -> float:
    """Re-evaluate the normalised defect of one (progression, test function)."""
    f = next(t for t in family if t.id == witness.test)
    ns = np.array(list(witness.elements()))
    xh, xv, _ = orbit_points(g, ns)
    v = f.values(xh, xv)
    return float(abs(v.mean() - f.mean) / f.norm)


def total_verdict(g: PolySequence, N: int, delta: float, config: Optional[ConstantsConfig] = None,
                  family: Optional[Sequence[TestFunction]] = None,
                  progressions: Optional[ProgressionSet] = None) -> Tuple[bool, EquidistReport]:
    """Pass iff the defect is <= delta over all progressions of length >= delta N."""
    if not (0 < delta <= 1):
        raise EquidistError("delta must lie in (0, 1]")
    config = config or ConstantsConfig()
    G = g.group
    progs = progressions or ProgressionSet.total(N, delta, config.q_max, config.window_grid)
    fam = list(family) if family is not None else default_family(G, config)
    if G.m == 0 or not fam:
        rep = _trivial_report(N, fam, progs, threshold=delta, delta=delta)
        return True, rep
    rep = direct_defect(g, N, fam, progs, threshold=delta)
    rep = replace(rep, delta=delta)
    return bool(rep.passed), rep


# -- obstructions -------------------------------------------------------------------


@dataclass(frozen=True)
class ObstructionResult:
    character: Optional[HorizontalCharacter]
    norm: object
    method: str
    K: int
    threshold: float
    searched: int

    def to_json(self) -> dict:
        from .scalars import format_scalar
        return {"k": list(self.character.k) if self.character else None,
                "norm": None if self.norm is None else float(upper(self.norm)),
                "norm_exact": None if self.norm is None else format_scalar(self.norm),
                "method": self.method, "K": self.K, "threshold": self.threshold, "searched": self.searched}


def _verify_candidate(g, k, N, threshold):
    eta = HorizontalCharacter(tuple(int(x) for x in k))
    nrm = c_infty_norm(compose_horizontal(eta, g), N)
    return (upper(nrm) <= threshold), nrm


def _phase_rows(g: PolySequence):
    return [(j, c) for j, c in enumerate(horizontal_taylor(g)) if j >= 1 and any(x != 0 for x in c)]


def _exhaustive(g, N, K, threshold):
    h = g.group.h
    grids = np.meshgrid(*[np.arange(-K, K + 1, dtype=np.int64)] * h, indexing="ij")
    ks = np.stack([x.ravel() for x in grids], axis=1)
    sign = np.zeros(len(ks), dtype=np.int64)
    for i in reversed(range(h)):
        sign = np.where(sign == 0, np.sign(ks[:, i]), sign)
    ks = ks[sign > 0]
    mask = np.ones(len(ks), dtype=bool)
    l1 = np.abs(ks).sum(axis=1).astype(float)
    for j, row in _phase_rows(g):
        acc = np.zeros(len(ks), dtype=np.uint64)
        rad = 0.0
        for i, x in enumerate(row):
            m = midpoint(x)
            fr = ((m.numerator % m.denominator) << 64) // m.denominator
            acc = acc + ks[:, i].astype(np.uint64) * np.uint64(fr)
            rad = max(rad, float(radius(x)))
        dist = np.minimum(acc, np.uint64(0) - acc).astype(np.float64) / 2.0 ** 64
        scale = float(N) ** j
        slack = scale * (2.0 ** -50 + l1 * (2.0 ** -63 + rad)) + 1e-12
        mask &= dist * scale <= threshold + slack
    cand = ks[mask]
    if len(cand):
        order = np.lexsort(tuple(cand[:, i] for i in reversed(range(h))) + (np.abs(cand).max(axis=1),))
        cand = cand[order]
    for k in cand:
        ok, nrm = _verify_candidate(g, k, N, threshold)
        if ok:
            return tuple(int(x) for x in k), nrm, len(ks)
    return None, None, len(ks)


def _lll_search(g, N, K, threshold, span=2):
    h = g.group.h
    rows_j = _phase_rows(g)
    S = 1 << 48
    W = max(1, int(S * threshold / K))
    J = len(rows_j)
    basis = []
    for i in range(h):
        row = [W * int(i == t) for t in range(h)]
        for j, c in rows_j:
            m = midpoint(c[i])
            row.append(int(round(m * S * N ** j)) % (S * N ** j))
        basis.append(row)
    for a, (j, _) in enumerate(rows_j):
        basis.append([0] * h + [S * N ** j * int(a == b) for b in range(J)])
    red = lattice.lll_reduce(basis)
    short = [r for r in red if any(r[:h])][: max(4, h)]
    found = []
    for coeffs in itertools.product(range(-span, span + 1), repeat=len(short)):
        if not any(coeffs):
            continue
        k = [sum(c * r[t] for c, r in zip(coeffs, short)) for t in range(h)]
        if any(x % W for x in k):
            continue
        k = [x // W for x in k]
        if not any(k) or max(map(abs, k)) > K:
            continue
        k = HorizontalCharacter(tuple(k)).canonical().k
        found.append(k)
    found = sorted(set(found), key=lambda k: (max(map(abs, k)), k))
    for k in found:
        ok, nrm = _verify_candidate(g, k, N, threshold)
        if ok:
            return k, nrm, len(found)
    return None, None, len(found)


def obstruction_search(g: PolySequence, N: int, K: int, threshold: float,
                       exhaustive_limit: int = 300000) -> ObstructionResult:
    """Smallest (by |k|_∞ then lexicographically) nonzero horizontal
    character k with |k|_∞ <= K and ‖k∘g‖_{C∞[N]} <= threshold."""
    if K < 1:
        raise EquidistError("K must be positive")
    G = g.group
    if G.h == 0:
        return ObstructionResult(None, None, "vacuous", K, threshold, 0)
    if not _phase_rows(g):
        k = (0,) * (G.h - 1) + (1,)
        return ObstructionResult(HorizontalCharacter(k), Fraction(0), "constant", K, threshold, 1)
    count = ((2 * K + 1) ** G.h - 1) // 2
    if count <= exhaustive_limit:
        k, nrm, n = _exhaustive(g, N, K, threshold)
        method = "exhaustive"
    else:
        # doubling frequency bounds keep the returned k close to minimal
        k, nrm, n = None, None, 0
        Kp = 1
        while k is None:
            Kp = min(K, 2 * Kp)
            k, nrm, c = _lll_search(g, N, Kp, threshold)
            n += c
            if Kp == K:
                break
        method = "lll"
    return ObstructionResult(HorizontalCharacter(k) if k else None, nrm, method, K, threshold, n)


def find_obstruction(g: PolySequence, N: int, K: int, threshold: float) -> Optional[HorizontalCharacter]:
    return obstruction_search(g, N, K, threshold).character


def obstruction_verdict(g: PolySequence, N: int, delta: float, config: ConstantsConfig,
                        threshold: Optional[float] = None) -> ObstructionResult:
    """The obstruction criterion at scale delta: frequencies up to K(delta)."""
    K = config.obstruction_cutoff(delta, N)
    return obstruction_search(g, N, K, config.tau if threshold is None else threshold, config.exhaustive_limit)


# -- transfers ------------------------------------------------------------------------


def transfer_right_multiply(g: PolySequence, gamma0: Sequence, report: EquidistReport,
                            config: Optional[ConstantsConfig] = None) -> EquidistReport:
    """Report for n -> g(n)·gamma0: declared bound report.defect^(1/C) and the
    directly re-measured defect."""
    config = config or ConstantsConfig()
    G = g.group
    gamma0 = G.check(gamma0)
    if not all(is_exact(x) for x in gamma0):
        raise EquidistError("gamma0 must be exact")
    if all(x == 0 for x in gamma0):
        return report
    declared = report.defect ** (1.0 / config.C)
    if G.m == 0:
        return replace(report, extra={**report.extra, "declared_bound": declared})
    g2 = pointwise_product(g, PolySequence.constant(G, gamma0))
    measured = direct_defect(g2, report.N, report.family, report.progression_set, report.threshold)
    extra = {**report.extra, "declared_bound": declared, "source_defect": report.defect}
    return replace(measured, delta=report.delta, extra=extra)


def total_from_plain(A_exponent: float, config: Optional[ConstantsConfig] = None) -> float:
    """A plain exponent A gives the total exponent A / B_cfg when A / B_cfg > 1."""
    from .config import ConfigError
    config = config or ConstantsConfig()
    ratio = A_exponent / config.B
    if not ratio > 1:
        raise ConfigError(f"A / B = {ratio} is not > 1")
    return ratio


def erdos_turan_estimate(g: PolySequence, N: int, K: int, progressions: ProgressionSet) -> float:
    """Character-sum discrepancy estimate max_P Σ_{k<=K} |avg_P e(k x)| / (1 + 2πk)
    for linear one-dimensional torus sequences, from closed-form geometric sums."""
    G = g.group
    if G.m != 1 or G.h != 1 or any(c[0] != 0 for c in g.coeffs[2:]):
        raise EquidistError("the closed-form estimate covers linear one-dimensional sequences")
    beta = float(midpoint(g.coeffs[1][0]) % 1)
    best = 0.0
    ks = np.arange(1, K + 1)
    weights = 1.0 / (1.0 + TAU * ks)
    for q, r, first, length in progressions.classes(N):
        pos = progressions.positions(length)
        ia, ib = np.triu_indices(len(pos), k=1)
        lens = np.unique((pos[ib] - pos[ia]))
        lens = lens[lens >= progressions.min_length].astype(float)
        if not len(lens):
            continue
        x = (ks * beta * q) % 1.0
        s = np.sin(math.pi * x)
        num = np.abs(np.sin(math.pi * np.outer(lens, x)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(np.abs(s) < 1e-15, 1.0, num / (lens[:, None] * np.abs(s)))
        best = max(best, float((ratio * weights).sum(axis=1).max()))
    return best
