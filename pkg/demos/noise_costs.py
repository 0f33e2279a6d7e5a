"""The three ways of counting noise: log N >= H(p) >= S_e.

A biased phase flip on half a Bell pair costs one unitary label but only
H(0.9) bits of randomness; the entropy exchange, computed from the ensemble
Gram matrix, agrees with the explicit purification.
"""

import numpy as np

from corrsim import bell, linalg as la
from corrsim.channels import MixedUnitaryChannel, entropy_exchange_purified, noise_costs
from corrsim.states import random_state
from corrsim.typicality import haar_unitary

rho = bell().density()
biased = MixedUnitaryChannel.a_lur([0.9, 0.1], [la.I2, la.SIGMA_Z], (2, 2))
cost = noise_costs(biased, rho)
print(f"biased flip: log N = {cost.log_n:.3f}, H(p) = {cost.shannon:.3f}, S_e = {cost.entropy_exchange:.3f}")

rng = np.random.default_rng(1)
mixed = random_state("induced_mixed", (2, 2), seed=1)
chan = MixedUnitaryChannel.from_local(
    rng.dirichlet(np.ones(6)), [(haar_unitary(2, rng), haar_unitary(2, rng)) for _ in range(6)], (2, 2))
cost = noise_costs(chan, mixed)
print(f"random 6-element local ensemble: {cost.as_dict()}")
print(f"purification check: {entropy_exchange_purified(chan, mixed):.12f}")
