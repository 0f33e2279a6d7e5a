"""Decorrelate four copies of a classically correlated pair with sampled Weyl unitaries.

Alice's typical subspace is randomized by N Weyl operators drawn at random.
The median distance to a product state falls as N grows, and the rate
log2(N)/n at which it drops below 0.3 sits above the mutual information of
one bit, as expected at this small n.
"""

import numpy as np

from corrsim import bell_dephased, mutual_information
from corrsim.protocols import decorrelate_typical

rho = bell_dephased()
n = 4
print(f"I(A:B) = {mutual_information(rho):.3f} bit per copy, n = {n}")
for size in (2, 4, 8, 16, 32, 64, 128):
    eps = [decorrelate_typical(rho, n, 0.1, size, seed).achieved_eps for seed in range(20)]
    print(f"N = {size:>3}  rate = {np.log2(size) / n:.2f}  median eps = {np.median(eps):.4f}")
