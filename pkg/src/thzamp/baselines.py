"""Reference estimators: least squares, oracle-support least squares, CoSaMP."""

from __future__ import annotations

import math

import numpy as np

from .core import RecoveryResult
from .sensing import SensingMatrix

#: Ridge added to the normal equations when a CoSaMP least-squares step is
#: rank deficient.
COSAMP_RIDGE = 1e-10


def _matrix(A):
    return A.entries if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)


def least_squares(A, y) -> np.ndarray:
    """Least-squares estimate; the minimum-norm solution when ``m < n`` or A is rank deficient."""
    M = _matrix(A)
    y = np.asarray(y, dtype=float)
    if y.shape != (M.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({M.shape[0]},)")
    return np.linalg.lstsq(M, y, rcond=None)[0]


def oracle_ls(A, y, support) -> np.ndarray:
    """Least squares on the columns in ``support``, zero elsewhere."""
    M = _matrix(A)
    m, n = M.shape
    support = np.asarray(support, dtype=int)
    if support.size > m:
        raise ValueError(f"support of size {support.size} exceeds m={m} measurements")
    if support.size and (support.min() < 0 or support.max() >= n):
        raise ValueError("support index out of range")
    if np.unique(support).size != support.size:
        raise ValueError("support has repeated indices")
    out = np.zeros(n)
    if support.size:
        out[support] = np.linalg.lstsq(M[:, support], np.asarray(y, dtype=float), rcond=None)[0]
    return out


def _top_k(values, k):
    # stable sort keeps tie-breaking deterministic
    return np.argsort(-np.abs(values), kind="stable")[:k]


def _restricted_solve(M, y, cols):
    sub = M[:, cols]
    sol, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
    if rank < cols.size:
        gram = sub.T @ sub
        sol = np.linalg.solve(gram + COSAMP_RIDGE * np.eye(cols.size), sub.T @ y)
    return sol


def cosamp(A, y, k: int, max_iters: int = 100, stop_tol: float = 1e-7) -> RecoveryResult:
    """Compressive sampling matching pursuit (Needell and Tropp).

    Each pass merges the ``2k`` largest entries of the proxy ``A.T r`` with
    the current support, solves least squares on the merged set and prunes
    back to the ``k`` largest coefficients.

    Stops when the residual vanishes relative to ``||y||``, when its norm
    changes by less than ``stop_tol`` relatively between passes, or after
    ``max_iters`` passes. ``sigma_history`` holds ``||r|| / sqrt(m)`` per pass.
    """
    M = _matrix(A)
    m, n = M.shape
    y = np.asarray(y, dtype=float)
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, n], got {k}")
    x = np.zeros(n)
    if k == 0:
        return RecoveryResult(x, 0, [], "converged")

    y_norm = float(np.linalg.norm(y))
    r = y.copy()
    r_norm = y_norm
    history = []
    status = "max-iters"
    for _ in range(max_iters):
        proxy = M.T @ r
        merged = np.union1d(_top_k(proxy, 2 * k), np.flatnonzero(x))
        b = np.zeros(n)
        b[merged] = _restricted_solve(M, y, merged)
        x = np.zeros(n)
        keep = _top_k(b, k)
        x[keep] = b[keep]
        r = y - M @ x
        new_norm = float(np.linalg.norm(r))
        history.append(new_norm / math.sqrt(m))
        if new_norm <= stop_tol * y_norm or abs(r_norm - new_norm) <= stop_tol * r_norm:
            status = "converged"
            break
        r_norm = new_norm
    return RecoveryResult(x, len(history), history, status)
