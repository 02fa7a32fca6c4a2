"""n*phi on the circle: equidistribution, obstructions, and a one-leaf tree."""

import math
from fractions import Fraction

from nilfactor import (ConstantsConfig, PolySequence, SmoothBase, TreeParams, build_tree, factorise_once,
                       parse_scalar, preset, total_verdict)
from nilfactor.equidist import ProgressionSet, character_family, direct_defect, obstruction_search

T1 = preset("torus:1")
g = PolySequence(T1, ((Fraction(0),), (parse_scalar("phi"),)))
cfg = ConstantsConfig()

ok, rep = total_verdict(g, 4096, 0.05, cfg)
print(f"total verdict at delta=0.05, N=4096: {ok}, defect {rep.defect:.4g}")

N = 2 ** 16
d = direct_defect(g, N, character_family(1, 16), ProgressionSet(q_max=16, min_length=N // 16)).defect
print(f"N=2^16, |k|<=16, q<=16: defect {d:.3e}  vs 10 log N / N = {10 * math.log(N) / N:.3e}")

# the first character that sees n*phi as nearly constant at N=5000 is a Fibonacci number
res = obstruction_search(g, 5000, 5000, 1)
print(f"smallest obstruction at N=5000: k={res.character.k}, norm {float(res.norm.mid):.4f} ({res.method})")

f = factorise_once(g, 4096, config=cfg)
print(f"factorise_once: M={f.M}, period {f.q_gamma}, subgroup dim {f.subgroup.dimension}")

tree = build_tree(g, TreeParams(N=4096, T=4096, base=SmoothBase.fixed(2)), cfg)
print(f"tree with base {{2}}: {len(tree.leaves)} leaves, Q={tree.Q}, passed={tree.passed}")
for lf in tree.leaves[:1]:
    print("  leaf 0:", lf.report.rationality["reasons"] or "ok")
tree = build_tree(g, TreeParams(N=4096, T=4096, base=SmoothBase.fixed(97)), cfg)
print(f"tree with base k=97: {len(tree.leaves)} leaves, Q={tree.Q}, passed={tree.passed}, splits {tree.splits}")
