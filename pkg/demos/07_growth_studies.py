"""
Growth of operator norms along power weights
============================================

Lower bounds for the dyadic maximal and sparse operator norms on
L^2(|x|^a) are tabulated against [w]_A2.  On a 2^12 cell grid
[w]_A2 only reaches about 3.4 as a -> 0.9, so the log-log slopes mix the
constant and linear parts of the growth; see the README.
"""
from apweights.studies import a2_growth_study, buckley_study

for study in (buckley_study(depth=12, trials=4), a2_growth_study(depth=12, trials=4)):
    print(study.name)
    key = "Ap" if "Ap" in study.rows[0] else "A2"
    for r in study.rows:
        print(f"  a = {r['a']:.1f}  [w]_A2 = {r[key]:.4f}  lower = {r['lower']:.4f}")
    print(f"  log-log slope {study.summary['slope']:.3f}\n")
