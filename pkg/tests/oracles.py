"""Brute-force reference computations, kept independent of the package code."""

import itertools
import math

import numpy as np


def restricted_ls(M, y, cols):
    """Least squares on the given columns through the normal equations."""
    sub = M[:, list(cols)]
    return np.linalg.solve(sub.T @ sub, sub.T @ y)


def exhaustive_l0(M, y, k):
    """Best k-sparse fit of y over every support of size k."""
    n = M.shape[1]
    best = (math.inf, None)
    for cols in itertools.combinations(range(n), k):
        coef = restricted_ls(M, y, cols)
        res = float(np.sum((y - M[:, list(cols)] @ coef) ** 2))
        if res < best[0]:
            x = np.zeros(n)
            x[list(cols)] = coef
            best = (res, x)
    return best[1]


def staged_grid_argmin(objective, centers, half_widths, counts):
    """Minimize a batch of 1-D objectives by successively finer grids.

    ``objective(grid)`` maps a (probes, points) array to values of the same
    shape. Half-widths may be scalars or per-probe arrays.
    """
    x_best = np.asarray(centers, dtype=float)
    for hw, cnt in zip(half_widths, counts):
        offsets = np.linspace(-1.0, 1.0, cnt)[None, :] * np.reshape(hw, (-1, 1))
        grid = x_best[:, None] + offsets
        vals = objective(grid)
        x_best = grid[np.arange(grid.shape[0]), np.argmin(vals, axis=1)]
    return x_best


def normal_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def dmm_grid(delta, z_max=20.0, step=1e-4):
    """Dense grid maximization of the analytical l1 phase-transition expression."""
    z = np.arange(step, z_max + step / 2, step)
    cdf = 0.5 * np.vectorize(math.erfc)(z / math.sqrt(2.0))  # Phi(-z)
    pdf = np.exp(-z * z / 2) / math.sqrt(2 * math.pi)
    psi = (1 + z * z) * cdf - z * pdf
    ratio = (1 - 2 / delta * psi) / (1 + z * z - 2 * psi)
    return float(ratio.max())
