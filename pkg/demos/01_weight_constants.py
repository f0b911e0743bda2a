"""
Weight constants on a dyadic grid
=================================

A weight is a positive step function on the 2^L cells of [0,1)^d.  Every
constant below is a maximum over a family of cubes, and each report also
names the cube where the maximum is attained.
"""
import numpy as np

from apweights import (CubeFamily, GridSpec, PowerWeightSpec, Weight, a1_constant,
                       ainfty_rj_constant, ap_constant, dual_weight, fw_ainfty_constant,
                       refinement_study, rh_constant)

# the four-cell weight (1, 1, 1, 4)
g = GridSpec(dim=1, depth=2)
w = Weight(np.array([1.0, 1.0, 1.0, 4.0]), g)

for name, rep in [("A_2", ap_constant(w, 2)), ("A_1", a1_constant(w)),
                  ("RH_2", rh_constant(w, 2)), ("A_inf (exp)", ainfty_rj_constant(w)),
                  ("A_inf (FW)", fw_ainfty_constant(w))]:
    print(f"{name:12s} {rep.value:.6f}  on {rep.cube.label(g)}")

# the dyadic family sees fewer cubes than the family of all aligned cubes
print("A_2 over all aligned intervals:", ap_constant(w, 2, CubeFamily.aligned()).value)

# duality: sigma = w^(1-p') has [sigma]_{A_p'} = [w]_{A_p}^(p'-1)
sigma = dual_weight(w, 3.0)
print("[w]_A3^(1/2) =", ap_constant(w, 3).value ** 0.5, " [sigma]_A(3/2) =", ap_constant(sigma, 1.5).value)

# |x|^a is in A_2 exactly for -1 < a < 1; on a grid this shows up as
# constants that settle down or keep growing as the mesh is refined
for a in (0.5, 0.9, 1.1):
    st = refinement_study(PowerWeightSpec(a), 2.0, range(6, 13))
    print(f"a = {a}: " + " ".join(f"{c:.3f}" for c in st.constants) + f"  -> {st.classification}")
