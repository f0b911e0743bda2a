"""
The iteration algorithm and factorization
=========================================

R h = sum_k M^k h / (2B)^k dominates h, has at most twice its norm, and is
an A_1 weight.  Running the same series for a sum of two operators factors
an A_p weight as w1 w2^(1-p) with w1, w2 in A_1.
"""
import numpy as np

from apweights import (GridSpec, StepFunction, Weight, a1_constant, ap_constant,
                       extrapolation_weight, jones_factorize, rdf_majorant, sharp_constant_predict)

rng = np.random.default_rng(3)
g = GridSpec(1, 8)
w = Weight(np.exp(rng.normal(0, 0.7, g.shape)), g)
h = StepFunction(np.exp(rng.normal(0, 1, g.shape)), g)

rep = rdf_majorant(h, 2.0, w)
print(f"B = {rep.B:.3f}, {rep.terms} terms, [R h]_A1 = {rep.a1:.3f} <= 2B = {2 * rep.B:.3f}")
print(f"||R h|| / ||h|| = {rep.majorant_norm / rep.h_norm:.4f} (at most 2)")
for c in rep.checks.checks:
    print(f"  {'ok ' if c.passed else 'BAD'} {c.name}")

fz = jones_factorize(w, 2.0)
print(f"\n[w]_A2 = {ap_constant(w, 2).value:.4f} <= [w1]_A1 [w2]_A1 = {fz.a1_w1 * fz.a1_w2:.4f}")
print("max |w1/w2 - w| / w =", float(np.max(np.abs(fz.w1.values / fz.w2.values / w.values - 1))))

w0, ex = extrapolation_weight(h, StepFunction(np.ones(g.shape), g), w, 2.0, 3.0)
print(f"\nextrapolation weight: [w0]_A3 = {ex.ap0:.3f} <= {ex.bound:.3f}")
print("A_1 constant of the first majorant:", round(a1_constant(ex.R1.majorant).value, 4))
print(sharp_constant_predict(3.0, 2.0).to_dict())
