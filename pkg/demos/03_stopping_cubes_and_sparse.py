"""
Stopping cubes, sparse families, sparse operators
=================================================

The Calderon-Zygmund ladder of f picks, for each height a^k, the maximal
dyadic cubes where the average of f exceeds a^k.  Each cube keeps the part
not covered at the next height, and those portions are disjoint, so the
cubes form a sparse family.
"""
import numpy as np

from apweights import (GridSpec, StepFunction, Weight, cf_check, cz_decompose, cz_ladder,
                       sparse_apply, sparse_from_ladder, sparse_norm_lower)
from apweights import io

g = GridSpec(1, 2)
f = StepFunction(np.array([0.0, 0.0, 0.0, 4.0]), g)
print("cubes with average > 1:", [Q.label(g) for Q in cz_decompose(f, 1.0)])

lad = cz_ladder(f)
for k, j, Q in lad.cubes():
    print(f"  height 4^{k}: {Q.label(g)}  E = cells {lad.esets[(k, j)].tolist()}")

S = sparse_from_ladder(lad)
print("T_S f =", sparse_apply(S, f).values)

# sparse families serialize to JSON and can be fed back to the CLI
print(io.sparse_to_json(S)[:120] + "...")

# the sparse operator is controlled by the dyadic maximal function
rng = np.random.default_rng(0)
g = GridSpec(1, 8)
h = StepFunction(np.exp(rng.normal(0, 2, g.shape)), g)
w = Weight(np.exp(rng.normal(0, 1, g.shape)), g)
rep = cf_check(h, w, 2.0)
print(f"\nint T_S h w = {rep.lhs:.4g} <= 2^p [w]_A2 int M h w = {rep.bound * rep.rhs:.4g}")
est = sparse_norm_lower(sparse_from_ladder(cz_ladder(h)), 2.0, w, trials=4)
print(f"||T_S||_L2(w) in [{est.lower:.3f}, {est.upper:.3f}]")
