"""
Reverse Hölder exponents
========================

Every A_infinity weight satisfies (avg w^s)^(1/s) <= 2 avg w on all cubes for
some s > 1.  The search returns the largest such s (up to a cap), and the
exponent shrinks as the Fujii-Wilson constant grows.
"""
import numpy as np

from apweights import (GridSpec, Weight, check_ap_rh_product, p_epsilon_search, rh_constant,
                       rh_exponent_search)
from apweights.studies import rh_exponent_study

w = Weight(np.array([1.0, 1.0, 1.0, 4.0]), GridSpec(1, 2))
s = rh_exponent_search(w)
print(f"s_max = {s:.6f}, RH constant there = {rh_constant(w, s).value:.9f}")
print(f"smallest q with [w]_Aq <= 2: {p_epsilon_search(w, 2.0, 2.0):.6f}")
print("A_p and RH_s together <=> w^s in A_q:", check_ap_rh_product(w, 2.0, 2.0).passed)

st = rh_exponent_study(depth=10)
print("\n     a      s_max        FW")
for r in st.rows:
    print(f"{r['a']:6.2f} {r['s_max']:10.4f} {r['fw']:9.4f}")
print("monotone:", st.summary["monotone"])
