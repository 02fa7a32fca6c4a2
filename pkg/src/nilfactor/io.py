"""Run specs, report emission and tree files."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from importlib import resources
from typing import Any, Dict, List, Optional, Tuple

import jsonschema

from .config import ConfigError, ConstantsConfig
from .factor import (Factorisation, FactorisationTree, Leaf, TreeParams, tree_partition_ok, verify_leaf)
from .nilgroup import FilteredGroup, GroupError, RationalSubgroup, custom_group, preset
from .poly import Poly
from .polyseq import PolySequence, SequenceError
from .scalars import ScalarSyntaxError, format_scalar, load_scalar
from .smooth import SmoothBase, is_smooth

TREE_FORMAT = "nilfactor-tree/1"


class RunSpecError(ValueError):
    """Invalid run spec; ``errors`` holds "path: reason" strings."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def load_schema(name: str = "runspec") -> dict:
    text = resources.files("nilfactor").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _path(err) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


@dataclass(frozen=True)
class RunSpec:
    group: Any
    coeffs: Tuple[Tuple[Any, ...], ...]
    N: int
    T: Optional[int] = None
    degree: Optional[int] = None
    form: str = "taylor"
    T_exponent: float = 0.9
    B: float = 2
    E: int = 2
    R: int = 8
    Q0: int = 2
    A: Optional[float] = None
    delta: float = 0.05
    smooth_base: Dict[str, Any] = field(default_factory=lambda: {"kind": "loglog"})
    config: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    mode: str = "certified"
    samples: Optional[int] = None

    def __post_init__(self):
        if self.T is None:
            object.__setattr__(self, "T", self.N)

    def to_json(self) -> dict:
        out = asdict(self)
        out["coeffs"] = [list(row) for row in self.coeffs]
        return {k: v for k, v in out.items() if v is not None}

    # -- resolved objects --------------------------------------------------

    def constants(self) -> ConstantsConfig:
        cfg = ConstantsConfig.from_json(self.config)
        if self.A is not None:
            cfg = cfg.with_(A=float(self.A))
        return cfg

    def base(self) -> SmoothBase:
        return SmoothBase.from_json(self.smooth_base)

    def tree_params(self) -> TreeParams:
        return TreeParams(N=self.N, T=self.T, B=self.B, E=self.E, R=self.R, base=self.base(), Q0=self.Q0,
                          seed=self.seed)

    def build_group(self) -> FilteredGroup:
        if isinstance(self.group, dict):
            c = self.group["custom"]
            return custom_group(c.get("name", "custom"), c["m"], c["d"], c["law"], c["filtration"], c.get("Q0", 1))
        rows = len(self.coeffs) - 1 if self.form == "taylor" else 0
        G = preset(self.group, self.degree)
        if rows > G.d and self.degree is None:
            G = preset(self.group, rows)
        return G

    def sequence(self) -> PolySequence:
        G = self.build_group()
        rows = [tuple(load_scalar(x) for x in row) for row in self.coeffs]
        for j, row in enumerate(rows):
            if len(row) != G.m:
                raise RunSpecError([f"/coeffs/{j}: expected {G.m} entries, got {len(row)}"])
        if self.form == "coordinates":
            return PolySequence.from_coordinates(G, rows)
        if len(rows) > G.d + 1:
            raise RunSpecError([f"/coeffs: {len(rows)} Taylor coefficients exceed degree {G.d}"])
        return PolySequence(G, tuple(rows))


def _sanity(spec: RunSpec) -> List[str]:
    errs = []
    if spec.T > spec.N:
        errs.append("/T: T exceeds N")
    elif spec.T < spec.N ** spec.T_exponent - 1e-9:
        errs.append(f"/T: T is below N^{spec.T_exponent}")
    if spec.R < spec.Q0:
        errs.append("/R: R must be at least Q0")
    return errs


def parse_runspec(text) -> RunSpec:
    """Validate a JSON document (text or already-decoded dict) into a RunSpec."""
    if isinstance(text, (str, bytes)):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RunSpecError([f"/: not valid JSON ({exc.msg} at line {exc.lineno})"]) from exc
    else:
        data = text
    validator = jsonschema.Draft202012Validator(load_schema())
    errs = sorted(validator.iter_errors(data), key=lambda e: (list(e.absolute_path), e.message))
    if errs:
        raise RunSpecError([f"{_path(e)}: {e.message}" for e in errs])
    known = {f.name for f in fields(RunSpec)}
    kw = {k: v for k, v in data.items() if k in known}
    kw["coeffs"] = tuple(tuple(row) for row in data["coeffs"])
    spec = RunSpec(**kw)
    problems = _sanity(spec)
    for j, row in enumerate(spec.coeffs):
        for i, x in enumerate(row):
            try:
                load_scalar(x)
            except (ScalarSyntaxError, ValueError, ZeroDivisionError, KeyError) as exc:
                problems.append(f"/coeffs/{j}/{i}: {exc}")
    try:
        spec.constants()
    except (ConfigError, TypeError) as exc:
        problems.append(f"/config: {exc}")
    try:
        spec.base()
    except ValueError as exc:
        problems.append(f"/smooth_base: {exc}")
    if not problems:
        try:
            spec.sequence()
        except RunSpecError as exc:
            problems.extend(exc.errors)
        except (GroupError, SequenceError) as exc:
            problems.append(f"/group: {exc}")
    if problems:
        raise RunSpecError(problems)
    return spec


def dump_json(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


# -- groups, subgroups and sequences ---------------------------------------------------


def group_to_json(G: FilteredGroup) -> dict:
    return {"name": G.name, "m": G.m, "d": G.d, "Q0": G.Q0,
            "law": [p.to_json() for p in G.law],
            "filtration": [sorted(lv) for lv in G.filtration]}


def group_from_json(data: dict) -> FilteredGroup:
    m = data["m"]
    law = tuple(Poly.from_json(2 * m, p) for p in data["law"])
    return FilteredGroup(data["name"], m, data["d"], law, tuple(frozenset(lv) for lv in data["filtration"]),
                         data.get("Q0", 1))


def subgroup_to_json(S: RationalSubgroup) -> dict:
    return {"dimension": S.dimension, "reduced": S.reduced, "inner": group_to_json(S.inner),
            "basis": [[format_scalar(x) for x in b] for b in S.basis],
            "to_ambient": [p.to_json() for p in S.to_ambient],
            "from_ambient": [p.to_json() for p in S.from_ambient]}


def subgroup_from_json(G: FilteredGroup, data: dict) -> RationalSubgroup:
    inner = group_from_json(data["inner"])
    basis = tuple(tuple(Fraction(x) for x in b) for b in data["basis"])
    to_amb = tuple(Poly.from_json(inner.m, p) for p in data["to_ambient"])
    from_amb = tuple(Poly.from_json(G.m, p) for p in data["from_ambient"])
    return RationalSubgroup(G, inner, basis, to_amb, from_amb, bool(data.get("reduced", False)))


def seq_to_json(g: PolySequence) -> list:
    return g.to_json()


def seq_from_json(G: FilteredGroup, rows) -> PolySequence:
    return PolySequence(G, tuple(tuple(load_scalar(x) for x in row) for row in rows))


def factorisation_to_json(f: Factorisation) -> dict:
    return {"epsilon": seq_to_json(f.epsilon), "gPrime": seq_to_json(f.gPrime), "gamma": seq_to_json(f.gamma),
            "M": f.M, "q_gamma": f.q_gamma, "subgroup": subgroup_to_json(f.subgroup),
            "certificates": f.certificates, "steps": f.steps}


# -- trees -------------------------------------------------------------------------------


def leaf_to_json(lf: Leaf) -> dict:
    return {"q": lf.q, "r": lf.r, "depth": lf.depth, "q_gamma": lf.q_gamma, "factors": lf.factors,
            "subgroup": subgroup_to_json(lf.subgroup),
            "epsilon": seq_to_json(lf.epsilon), "gPrime": seq_to_json(lf.gPrime), "gamma": seq_to_json(lf.gamma),
            "path": [{"z": lv.z, "r": lv.r, "qtilde": lv.qtilde, "witness": list(lv.witness),
                      "M": lv.factorisation.M, "steps": lv.factorisation.steps} for lv in lf.levels],
            "report": lf.report.to_json() if lf.report else None}


def tree_to_json(tree: FactorisationTree, spec: RunSpec) -> dict:
    return {"format": TREE_FORMAT, "spec": spec.to_json(), "config": tree.config.to_json(),
            "params": tree.params.to_json(), "seed": spec.seed, "Q": tree.Q, "height": tree.height,
            "flags": tree.flags, "splits": tree.splits, "passed": tree.passed,
            "partition_ok": tree_partition_ok(tree), "leaves": [leaf_to_json(lf) for lf in tree.leaves]}


def load_tree(data: dict) -> Tuple[RunSpec, FactorisationTree]:
    if data.get("format") != TREE_FORMAT:
        raise RunSpecError([f"/format: expected {TREE_FORMAT!r}"])
    spec = parse_runspec(data["spec"])
    g = spec.sequence()
    G = g.group
    config = ConstantsConfig.from_json(data["config"])
    leaves = []
    for i, d in enumerate(data["leaves"]):
        S = subgroup_from_json(G, d["subgroup"])
        leaves.append(Leaf(int(d["q"]), int(d["r"]), [], S, seq_from_json(G, d["gPrime"]),
                           seq_from_json(G, d["epsilon"]), seq_from_json(G, d["gamma"]), int(d["q_gamma"]),
                           stored_depth=int(d["depth"]), stored_factors=int(d["factors"])))
    tree = FactorisationTree(g, spec.tree_params(), config, leaves, int(data["Q"]), list(data.get("flags", [])),
                             list(data.get("splits", [])))
    return spec, tree


def verify_tree(data: dict) -> Tuple[bool, dict]:
    """Re-check a stored tree from scratch: partition, common differences,
    height, and the three leaf properties with periods recomputed."""
    spec, tree = load_tree(data)
    G = tree.g.group
    params, config = tree.params, tree.config
    cap = params.R ** config.difference_cap_exponent
    problems = []
    if not tree_partition_ok(tree):
        problems.append("leaf progressions do not partition [1, T]")
    for lf in tree.leaves:
        if not is_smooth(lf.q, params.base, params.N):
            problems.append(f"leaf ({lf.q}, {lf.r}): common difference is not smooth")
        if lf.q > cap:
            problems.append(f"leaf ({lf.q}, {lf.r}): common difference exceeds R^{config.difference_cap_exponent}")
    if tree.height > G.m:
        problems.append(f"height {tree.height} exceeds m = {G.m}")
    reports = []
    for lf in tree.leaves:
        rep = verify_leaf(lf, tree.g, params, config, tree.Q, period_override=lf.q_gamma)
        reports.append({"q": lf.q, "r": lf.r, **rep.to_json()})
        if not rep.passed:
            problems.append(f"leaf ({lf.q}, {lf.r}) failed verification")
    ok = not problems
    return ok, {"command": "verify", "passed": ok, "problems": problems, "Q": tree.Q, "height": tree.height,
                "config": config.to_json(), "spec": spec.to_json(), "leaves": reports}
