"""
Soft and hard thresholding
==========================

The two scalar denoisers behind the AMP variants, side by side.
"""

import numpy as np

from thzamp import hard_threshold, soft_threshold

# %%
# Soft thresholding shrinks every surviving entry toward zero by the
# threshold. Hard thresholding keeps survivors untouched, and an entry
# sitting exactly on the threshold is kept.
a = np.linspace(-3, 3, 13)
theta = 1.0
print(" a      soft    hard")
for ai, s, h in zip(a, soft_threshold(a, theta), hard_threshold(a, theta)):
    print(f"{ai:+.1f}  {s:+.2f}  {h:+.2f}")

# %%
# The soft rule is the proximal map of theta * |x|: a fine grid search over
# the penalized objective lands on the same point.
grid = np.linspace(-5, 5, 200001)
for ai in (-2.3, 0.4, 1.7):
    obj = 0.5 * (grid - ai) ** 2 + theta * np.abs(grid)
    print(f"a={ai:+.1f}: grid argmin {grid[np.argmin(obj)]:+.5f}, "
          f"soft_threshold {soft_threshold(ai, theta):+.5f}")
