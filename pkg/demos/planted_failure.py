"""A rotation that looks equidistributed until you step by 16."""

from nilfactor import ConstantsConfig, PolySequence, SmoothBase, TreeParams, build_tree, parse_scalar, preset
from nilfactor.factor import smooth_failure_search, tree_partition_ok

N = 2 ** 20
alpha = parse_scalar("2^-12 + phi*2^-30")
g = PolySequence(preset("torus:1"), ((0,), (alpha,)))
base = SmoothBase.prime_set([2])
cfg = ConstantsConfig()

log = {}
fail = smooth_failure_search(g, N, 1, 1, 8, 2, 2, base, config=cfg, log=log)
print("search:", log)
print(f"first failing dilate q~={fail.qtilde}, witness k={fail.witness}, norm {fail.norm:.4f}, length {fail.length}")

tree = build_tree(g, TreeParams(N=N, T=N, R=8, E=2, base=base), cfg)
print(f"{len(tree.leaves)} leaves, Q={tree.Q}, height {tree.height}, partition ok {tree_partition_ok(tree)}")
print("all leaves verified:", tree.passed)
lf = tree.leaves[3]
print(f"leaf n = {lf.r} mod {lf.q}: gamma coefficients {[str(c[0]) for c in lf.gamma.coeffs]}")
