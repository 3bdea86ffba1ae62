"""Problem geometry, error metrics and the success criterion.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: Finite stand-in for -inf dB in serialized output.
NEG_INF_DB = -300.0

#: Default success threshold for a reconstruction, in dB of NMSE.
SUCCESS_THRESHOLD_DB = -20.0


@dataclass(frozen=True)
class ProblemGeometry:
    """Dimensions of a sparse recovery problem and the ratios derived from them.

    Attributes
    ----------
    n : int
        Signal length (number of channel taps).
    m : int
        Number of measurements (training length).
    k : int
        Number of nonzero entries.
    delta : float
        Indeterminacy ``m / n``.
    rho : float
        Sparsity factor ``k / n``.
    rho_prime : float
        Normalized sparsity ``k / m``.
    r : float
        Compression rate ``n / m``.
    """

    n: int
    m: int
    k: int
    delta: float = field(init=False)
    rho: float = field(init=False)
    rho_prime: float = field(init=False)
    r: float = field(init=False)

    def __post_init__(self):
        for name in ("n", "m", "k"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be an integer")
        if self.n < 1 or self.m < 1:
            raise ValueError(f"n and m must be positive, got n={self.n}, m={self.m}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k must lie in [0, n], got k={self.k}, n={self.n}")
        object.__setattr__(self, "delta", self.m / self.n)
        object.__setattr__(self, "rho", self.k / self.n)
        object.__setattr__(self, "rho_prime", self.k / self.m)
        object.__setattr__(self, "r", self.n / self.m)


def geometry(n: int, m: int, k: int) -> ProblemGeometry:
    """Build a :class:`ProblemGeometry`, validating ``n, m >= 1`` and ``0 <= k <= n``."""
    return ProblemGeometry(int(n), int(m), int(k))


@dataclass
class RecoveryResult:
    """Outcome of an iterative recovery run.

    ``status`` is one of ``"converged"``, ``"max-iters"`` or ``"diverged"``.
    For a diverged run ``estimate`` is the last finite iterate and
    ``sigma_history`` ends with the value that tripped the guard.
    """

    estimate: np.ndarray
    iterations_run: int
    sigma_history: list = field(default_factory=list)
    status: str = "max-iters"

    STATUSES = ("converged", "max-iters", "diverged")

    def __post_init__(self):
        if self.status not in self.STATUSES:
            raise ValueError(f"unknown status {self.status!r}")


def to_db(ratio: float) -> float:
    """``10 log10(ratio)``, mapping zero to :data:`NEG_INF_DB`."""
    if ratio < 0:
        raise ValueError("ratio must be nonnegative")
    if ratio == 0:
        return NEG_INF_DB
    return max(10.0 * np.log10(ratio), NEG_INF_DB)


def nmse(h_hat, h) -> float:
    """Normalized squared error ``||h_hat - h||^2 / ||h||^2``."""
    h_hat = np.asarray(h_hat, dtype=float)
    h = np.asarray(h, dtype=float)
    if h_hat.shape != h.shape:
        raise ValueError(f"shape mismatch: {h_hat.shape} vs {h.shape}")
    energy = float(np.dot(h, h))
    if energy == 0:
        raise ValueError("nmse is undefined for an all-zero true vector")
    err = h_hat - h
    return float(np.dot(err, err)) / energy


def nmse_db(h_hat, h) -> float:
    """:func:`nmse` in dB; an exact estimate gives :data:`NEG_INF_DB`."""
    return to_db(nmse(h_hat, h))


def mse_db(h, estimates: Sequence) -> float:
    """Mean squared error over realizations, in dB.

    Parameters
    ----------
    h : array_like
        True vector, length n.
    estimates : sequence of array_like
        R >= 1 estimates of ``h``.

    Returns
    -------
    float
        ``10 log10(mean_r ||h - h_hat_r||^2)``, or :data:`NEG_INF_DB` when
        every estimate is exact.
    """
    h = np.asarray(h, dtype=float)
    if len(estimates) < 1:
        raise ValueError("need at least one estimate")
    total = 0.0
    for est in estimates:
        est = np.asarray(est, dtype=float)
        if est.shape != h.shape:
            raise ValueError(f"shape mismatch: {est.shape} vs {h.shape}")
        err = h - est
        total += float(np.dot(err, err))
    return to_db(total / len(estimates))


def success(nmse_db_value: float, threshold_db: float = SUCCESS_THRESHOLD_DB) -> bool:
    """True iff the reconstruction error is at or below ``threshold_db``."""
    return bool(nmse_db_value <= threshold_db)
