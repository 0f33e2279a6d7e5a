"""Several parties, strong subadditivity, and the separable-output scan.

The total correlation of GHZ splits into 2 + 1 bits when parties decorrelate
one by one.  Random tripartite states never violate I(A:C|B) >= 0, and local
channels with separable outputs never push I(A:B) above E(psi).
"""

from corrsim import ghz3
from corrsim.protocols import conjecture_scan, multipartite_erasure, ssa_scan

c_er, seq = multipartite_erasure(ghz3())
print(f"GHZ: total = {c_er:.3f}, one by one = {[round(x, 3) for x in seq]}")

scan = ssa_scan(1000, (2, 2, 2), seed=42)
print(f"SSA over {scan.count} states: min I(A:C|B) = {scan.min_value:.4f}, violations = {scan.violations}")

for family in ("schmidt_dephasing", "trace_replace", "random_local"):
    res = conjecture_scan(2000, (2, 2), seed=0, family=family)
    print(f"{family:>17}: {res.separable_trials} separable outputs, max I - E = {res.max_excess:.2e}, "
          f"witnesses = {len(res.witnesses)}")
