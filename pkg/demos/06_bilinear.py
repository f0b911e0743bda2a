"""
Bilinear operators
==================

The bilinear maximal function takes the product of averages on each cube.
Multilinear A_p constants and a sparse bound at p1 = p2 = 2 are computed
together with every intermediate inequality of the estimate.
"""
import numpy as np

from apweights import (BilinearParams, GridSpec, StepFunction, Weight, bilinear_a2_check,
                       bilinear_maximal, bilinear_rh_check, cz_ladder, multi_ap_constant,
                       sparse_from_ladder)

rng = np.random.default_rng(7)
g = GridSpec(1, 8)
w1 = Weight(np.exp(rng.normal(0, 0.5, g.shape)), g)
w2 = Weight(np.exp(rng.normal(0, 0.5, g.shape)), g)
f = StepFunction(np.exp(rng.normal(0, 1, g.shape)), g)
h = StepFunction(np.exp(rng.normal(0, 1, g.shape)), g)

print("max of M(f, h):", round(float(bilinear_maximal(f, h).values.max()), 4))
print("[w]_A(2,2):", round(multi_ap_constant(BilinearParams(2.0, 2.0, w1, w2)).value, 4))

rh = bilinear_rh_check(w1, w2, 2.0)
print(f"\nC* = {rh.C_star:.4f}, chain constant {rh.chain_constant:.4f} at r = {rh.r}")

rep = bilinear_a2_check(sparse_from_ladder(cz_ladder(f)), f, h, w1, w2)
print(f"||T_S(f,h)||_L1(w) = {rep.lhs:.4g} <= {rep.rhs:.4g}  (C = {rep.C:.2f}, kappa = {rep.kappa:.3f})")
for c in rep.checks.checks:
    print(f"  {'ok ' if c.passed else 'BAD'} {c.name}")
