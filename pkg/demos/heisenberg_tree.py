"""Heisenberg nilsequences: a horizontal obstruction and a tree with a failure
that sits below the resolvable scale."""

from fractions import Fraction as F

from nilfactor import ConstantsConfig, PolySequence, SmoothBase, TreeParams, build_tree, factorise_once, parse_scalar, preset
from nilfactor.factor import reconstruction_holds

H = preset("heisenberg")
phi, sqrt2 = parse_scalar("phi"), parse_scalar("sqrt2")
cfg = ConstantsConfig()

# x and y move in lockstep up to an integer: k = (-1, 1) kills the horizontal motion
g = PolySequence.from_coordinates(H, [(F(0),) * 3, (phi, phi * phi, F(0))])
f = factorise_once(g, 4096, config=cfg)
print(f"lockstep: G' has dimension {f.subgroup.dimension}, steps {[s['character'] for s in f.steps]}")
print("  reconstruction:", reconstruction_holds(g, [f.epsilon, f.gPrime, f.gamma]))

g = PolySequence(H, ((F(0),) * 3, (phi, F(1, 3), F(0)), (F(0), F(0), sqrt2)))
tree = build_tree(g, TreeParams(N=4096, T=4096, base=SmoothBase.fixed(97)), cfg)
print(f"mixed: {len(tree.leaves)} leaves, Q={tree.Q}, passed={tree.passed}")
for lf in tree.leaves:
    fail = lf.report.equidistribution["failure"]
    if fail:
        print(f"  leaf {lf.r} mod {lf.q}: dilate q~={fail['qtilde']} fails with k={fail['witness']} "
              f"(length {fail['length']}); splitting would leave pieces below the resolvable length")
