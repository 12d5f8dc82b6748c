"""
Checking the probability bounds by simulation
=============================================

The tail bounds behind the guarantees are compared with Monte Carlo
estimates. A check passes when the estimate stays below the bound plus three
standard errors.
"""
import numpy as np

import sbsc
from sbsc import theory

rng = np.random.default_rng(7)

# tail of sum (lambda_i b_i)^2 for b uniform on the sphere
lam = np.sort(rng.uniform(0.0, 0.5, size=8))[::-1]
res = theory.lemma1_check(lam, g1=0.6, trials=100_000, seed=1)
print(f"sphere tail: eps={res.epsilon:.3f} bound={res.bound:.3g} "
      f"empirical={res.empirical:.3g} pass={res.passed}")

# upper tail of an F(m, n) variable
res = theory.corollary1_check(m=10, n=40, q=4.0, trials=100_000, seed=2)
print(f"F tail:      eps={res.epsilon:.3f} bound={res.bound:.3g} "
      f"empirical={res.empirical:.3g} pass={res.passed}")

# order statistic of squared cosines, at the largest admissible separation
d, d_max, N_j = 5, 4, 2000
T = theory.max_separation(d, d_max, N_j)
res = theory.lemma3_check(T, d, d_max, N_j, trials=100_000, seed=3)
print(f"order stat:  T={T:.3f} bound={res.bound:.3g} "
      f"empirical={res.empirical:.3g} pass={res.passed}")

# geometry of a synthetic instance: principal cosines between subspaces
spec = sbsc.SyntheticSpec.balanced(K=3, d=3, D=20, per_cluster=500, seed=0)
data = sbsc.generate_synthetic(spec)
for (i, j), cos in sorted(theory.pairwise_cosines(data.bases).items()):
    print(f"subspaces {i},{j}: cosines {np.round(cos, 3)}")
print("maximal affinity rows:\n", np.round(theory.maximal_affinity(data.bases), 3))
