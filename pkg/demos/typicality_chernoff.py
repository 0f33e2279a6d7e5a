"""Typical subspaces, gentle measurements and operator concentration.

The counting path handles n in the hundreds for diagonal states; the
typical mass only approaches one slowly.  The Weyl sampler shows the
operator Chernoff violation rate dropping well under its bound.
"""

import numpy as np

from corrsim.typicality import chernoff_trial, gentle_measurement_check, typicality_report_counting, weyl_sampler

for n in (10, 50, 100, 200, 300, 500):
    rep = typicality_report_counting([0.9, 0.1], n, 0.1)
    print(f"n = {n:>3}: typical mass = {rep.mass:.4f}, dim = 2^{np.log2(float(rep.dim)):.1f}, sandwich ok: {rep.sandwich_ok}")

res = gentle_measurement_check(np.diag([0.9, 0.1]), np.diag([1.0, 0.0]))
print(f"gentle: delta = {res.delta:.2f}, disturbance = {res.lhs:.3f} <= {res.bound:.3f}")

d = 4
sampler, mean = weyl_sampler(np.diag([1 / d if i // d == i % d else 0 for i in range(d * d)]), (d, d))
for size in (32, 128, 512, 1024):
    r = chernoff_trial(sampler, size, 0.2, 200, seed=0, mean=mean)
    print(f"N = {size:>4}: violation rate = {r.violation_rate:.3f}, bound = {r.bound:.3g}")
