"""
Runtime against data size
=========================

With n, d_max and m fixed, only the neighbour search and the out-of-sample
step touch all N points, so runtime grows at most linearly in N. At these
small sizes the fixed spectral cost still dominates and the fitted slope sits
below 1; the full sweep (N from 2e4 to 1.6e5) comes out between 0.87 and 0.96.
"""
import sbsc
from sbsc.bench import loglog_slope, size_sweep

base = sbsc.SyntheticSpec.balanced(K=5, d=5, D=30, per_cluster=1000, sigma=0.2, seed=0)
params = sbsc.SBSCParams(K=5, n=250, d_max=19, m=10, bags=1, seed=0)

rows = size_sweep(base, params, per_cluster=[1000, 2000, 4000, 8000], repeats=1)
for row in rows:
    print(f"N={int(row.level):6d}  acc={row.mean:.3f}  runtime={row.runtime:.3f}s")

slope = loglog_slope([r.level for r in rows], [r.runtime for r in rows])
print("log-log slope:", round(slope, 3))
