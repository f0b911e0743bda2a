"""
Maximal operators and their norms
=================================

Dyadic, shifted-dyadic, full and weighted maximal functions of a step
function, then a bracket [lower, upper] for the operator norm on L^p(w).
"""
import numpy as np

from apweights import (GridSpec, MaximalKind, PowerWeightSpec, StepFunction, apply_maximal,
                       ap_constant, iterate_maximal, norm_estimate, weak_type_ratio)

g = GridSpec(1, 2)
f = StepFunction(np.array([0.0, 0.0, 0.0, 4.0]), g)
print("dyadic  M f    =", apply_maximal(MaximalKind.dyadic(), f).values)
print("full    M f    =", apply_maximal(MaximalKind.full(), f).values)
print("dyadic  M M f  =", iterate_maximal(MaximalKind.dyadic(), f, 2).values)

# a bigger example: |x|^0.7 on 2^10 cells
w = PowerWeightSpec(0.7).build(10)
print("\n[w]_A2 =", round(ap_constant(w, 2).value, 4))
est = norm_estimate(MaximalKind.dyadic(), 2.0, w, trials=8, seed=0)
print(f"||M^d||_L2(w) in [{est.lower:.4f}, {est.upper:.4f}]  (best test function: {est.witness})")

# the weak-type ratio never exceeds the strong-type ratio to the p-th power
rng = np.random.default_rng(1)
h = StepFunction(np.exp(rng.normal(size=w.grid.shape)), w.grid)
print("weak-type ratio for a random h:", round(weak_type_ratio(MaximalKind.dyadic(), h, w, 2.0), 4))
