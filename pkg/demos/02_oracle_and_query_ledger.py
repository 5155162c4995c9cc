"""The subcube-conditional sampling oracle and its query ledger.

Testers never touch a distribution directly: they go through an oracle that
answers plain draws, draws conditioned on a restriction, random-restriction
draws, and batched edge-bias estimates.  Every answer is charged to a ledger,
so a tester's cost claim can be audited after the fact.  Restricted views
share the parent's ledger and compose.

Run:  python3 demos/02_oracle_and_query_ledger.py
"""

import numpy as np

from hypercube_tester import (
    ProductDistribution,
    Restriction,
    ScondOracle,
)
from hypercube_tester.rng import stream

target = ProductDistribution(np.array([0.3, 0.0, -0.2, 0.0, 0.1, 0.0]))
oracle = ScondOracle(target, stream(7, 0, 0))

# -- plain and conditional draws ---------------------------------------------
xs = oracle.sample(5)
print(f"5 unconditioned samples (one query each):\n{xs}")
print(f"ledger after sampling: {oracle.queries} queries")

rho = Restriction(np.array([1, 0, 0, -1, 0, 0], dtype=np.int8))
star_draws = oracle.cond_sample(rho, 4)
print(f"\nconditional draws return only the {rho.num_stars} star coordinates"
      f" (ascending order {rho.stars.tolist()}):\n{star_draws}")
print(f"ledger: {oracle.queries} queries")

# -- random restrictions -----------------------------------------------------
sigma_rho = oracle.draw_restriction_sigma(0.5)  # each coordinate free w.p. 1/2
fixed_rho = oracle.draw_restriction_fixed(2)    # exactly 2 fixed coordinates
print(f"\nsigma-restriction: {sigma_rho}  (fills come from one target sample)")
print(f"fixed-size restriction: {fixed_rho}")
print(f"ledger: {oracle.queries} queries")

# -- edge-bias estimates -----------------------------------------------------
# for each (point, coordinate) pair the oracle spends b conditional draws on
# the 2-point subcube along that edge and reports the empirical bias
points = oracle.sample(3)
coords = np.array([0, 2, 4])
before = oracle.queries
est = oracle.estimate_edge_biases(points, coords, draws_per_pair=4000)
print(f"\nedge-bias estimates at coordinates {coords.tolist()}: {np.round(est, 3).tolist()}")
print(f"true coordinate means there:                 {target.mu[coords].tolist()}")
print(f"cost: {oracle.queries - before} queries (= 3 pairs x 4000 draws each)")

# -- restricted views compose ------------------------------------------------
view = oracle.restricted(rho)
print(f"\nrestricted view has n={view.n} (parent coordinates {rho.stars.tolist()})")
inner = Restriction(np.array([1, 0, 0, 0], dtype=np.int8))  # fixes view coord 0
deep = view.restricted(inner)
print(f"restricting the view again leaves n={deep.n}")
deep_draws = deep.sample(3)
print(f"draws from the doubly-restricted view:\n{deep_draws}")
print(f"shared ledger now reads {oracle.queries} queries"
      f" (view reports the same: {view.queries})")

# -- zero-support conditioning is flagged, not hidden --------------------------
from hypercube_tester import DensePmf, Point

pm = DensePmf.point_mass(Point(np.array([1, 1, 1], dtype=np.int8)))
dead_oracle = ScondOracle(pm, stream(7, 1, 0))
dead = Restriction(np.array([-1, 0, 0], dtype=np.int8))  # mass zero under pm
dead_oracle.cond_sample(dead, 2)
print(f"\nconditioning a point mass on a dead subcube: uniform fallback draws,"
      f" zero_support_hits={dead_oracle.zero_support_hits}")
