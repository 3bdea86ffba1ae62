"""
Empirical phase transition of soft-thresholding AMP
===================================================

A coarse grid over undersampling delta = m/n and normalized sparsity
rho' = k/m, compared with the analytical l1 boundary.
"""

from thzamp import amp_config
from thzamp.experiments import PhaseGridSpec, dmm_l1_curve, empirical_boundary, phase_transition

# %%
# Small problems and few trials keep this under a minute. The acceptance
# suite runs the same experiment on a finer grid.
deltas = (0.25, 0.5, 0.75)
rhos = tuple(round(0.1 * j, 1) for j in range(1, 10))
spec = PhaseGridSpec(deltas, rhos, n=200, trials=4, config=amp_config("soft", max_iters=100))
results = phase_transition(spec)

# %%
# Success rate per cell; a trial succeeds at NMSE <= -20 dB.
print("delta  " + " ".join(f"{r:4.1f}" for r in rhos))
for d in deltas:
    rates = [r.success_rate for r in results if r.delta == d]
    print(f"{d:5.2f}  " + " ".join(f"{x:4.1f}" for x in rates))

# %%
# The interpolated 50% point tracks the analytical curve.
for d, b in empirical_boundary(results).items():
    print(f"delta={d:.2f}: empirical {b:.3f}, analytical {dmm_l1_curve(d):.3f}")
