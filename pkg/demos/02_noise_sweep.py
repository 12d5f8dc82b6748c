"""
Accuracy as the noise level grows
=================================

Same geometry as the noiseless demo, smaller clusters, with Gaussian noise
added before normalization. The constant-label baseline is 0.2.
"""
import sbsc
from sbsc.bench import SweepRow, sigma_sweep

base = sbsc.SyntheticSpec.balanced(K=5, d=5, D=30, per_cluster=600, seed=0)
params = sbsc.SBSCParams(K=5, n=250, d_max=19, m=10, bags=3, seed=0)

sigmas = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25]
rows = sigma_sweep(base, params, sigmas, repeats=3)

print("  ".join(f"{h:>8s}" for h in SweepRow.HEADER))
for row in rows:
    print("  ".join(f"{v:8.4f}" if isinstance(v, float) else f"{v:8d}" for v in row.as_tuple()))

# noise energy relative to the unit signal is about D * sigma^2
for s in sigmas:
    print(f"sigma={s:.2f}  noise/signal ~ {30 * s * s:.2f}")
