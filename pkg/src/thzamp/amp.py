"""Approximate message passing with soft or hard thresholding.

One AMP step alternates a linear residual update, which carries the
Onsager correction, with an element-wise thresholding of the pseudo-data
``A.T z + h_hat``. The threshold is ``tau * sigma`` where ``sigma`` is the
empirical standard deviation of the current residual, ``||z|| / sqrt(m)``.

The iteration starts from ``h_hat = 0`` and ``z = y``; the correction term is
zero on the first step because no earlier residual exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import RecoveryResult, nmse
from .sensing import SensingMatrix

THRESHOLD_KINDS = ("soft", "hard")

#: Floor of the denominator in the relative-change stopping rule.
REL_CHANGE_EPS = 1e-12

DEFAULT_TAU_GRID = tuple(round(0.1 * i, 1) for i in range(1, 31))
# the best hard threshold in the very sparse regime sits around 3.5-4.5
DEFAULT_HARD_TAU_GRID = tuple(round(0.1 * i, 1) for i in range(1, 61))


def default_tau_grid(kind: str) -> tuple:
    """Oracle search grid: 0.1..3.0 for soft thresholding, 0.1..6.0 for hard."""
    if kind not in THRESHOLD_KINDS:
        raise ValueError(f"unknown thresholder kind {kind!r}")
    return DEFAULT_TAU_GRID if kind == "soft" else DEFAULT_HARD_TAU_GRID


def soft_threshold(a, theta):
    """Shrink toward zero by ``theta``; entries with ``|a| <= theta`` become 0.

    This is the proximal map of ``theta * |x|``. Works element-wise on arrays.
    """
    if np.any(np.asarray(theta) < 0):
        raise ValueError("threshold must be nonnegative")
    a = np.asarray(a, dtype=float)
    out = np.sign(a) * np.maximum(np.abs(a) - theta, 0.0)
    return out if out.ndim else float(out)


def hard_threshold(a, theta):
    """Keep ``a`` where ``|a| >= theta``, zero elsewhere (the boundary is kept)."""
    if np.any(np.asarray(theta) < 0):
        raise ValueError("threshold must be nonnegative")
    a = np.asarray(a, dtype=float)
    out = np.where(np.abs(a) >= theta, a, 0.0)
    return out if out.ndim else float(out)


def onsager_coefficient(v, theta: float, kind: str = "soft") -> float:
    """Empirical mean of the thresholder's derivative at ``v``.

    Both thresholders have derivative 1 where the input passes
    (``|v| > theta``) and 0 where it is zeroed, so the mean is the fraction
    of entries above the threshold. The kink itself is a null set and is
    counted as zeroed.
    """
    if kind not in THRESHOLD_KINDS:
        raise ValueError(f"unknown thresholder kind {kind!r}")
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("empty input")
    return float(np.count_nonzero(np.abs(v) > theta)) / v.size


@dataclass(frozen=True)
class Thresholder:
    kind: str
    tau: float

    def __post_init__(self):
        if self.kind not in THRESHOLD_KINDS:
            raise ValueError(f"unknown thresholder kind {self.kind!r}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")

    def __call__(self, v, theta):
        if self.kind == "soft":
            return soft_threshold(v, theta)
        return hard_threshold(v, theta)


@dataclass(frozen=True)
class AmpConfig:
    """Iteration controls.

    ``onsager=False`` drops the correction term, which turns the scheme into
    plain iterative thresholding with a residual-scaled threshold. It exists
    for ablation studies.
    """

    thresholder: Thresholder
    max_iters: int = 200
    stop_tol: float = 1e-8
    divergence_factor: float = 10.0
    onsager: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")
        if not self.divergence_factor > 1:
            raise ValueError("divergence_factor must exceed 1")

    def with_tau(self, tau: float) -> "AmpConfig":
        return replace(self, thresholder=Thresholder(self.thresholder.kind, tau))


def amp_config(kind: str = "soft", tau: float = 1.0, **kwargs) -> AmpConfig:
    """Shorthand for ``AmpConfig(Thresholder(kind, tau), **kwargs)``."""
    return AmpConfig(Thresholder(kind, tau), **kwargs)


@dataclass(frozen=True, eq=False)
class AmpState:
    """Iterate of AMP after ``t`` steps.

    ``z`` is the residual that produced ``h_hat`` and ``sigma`` its standard
    deviation. ``pseudo`` and ``theta`` are the pseudo-data and threshold of
    that step; the next Onsager term is evaluated on them. ``data_residual``
    is ``y - A h_hat_prev``, the plain fit residual of the previous estimate.
    """

    h_hat: np.ndarray
    z: np.ndarray
    z_prev: np.ndarray
    h_hat_prev: np.ndarray
    sigma: float
    t: int
    pseudo: np.ndarray | None = None
    theta: float = 0.0
    data_residual: np.ndarray | None = None


def initial_state(A: SensingMatrix, y) -> AmpState:
    y = np.asarray(y, dtype=float)
    zeros = np.zeros(A.n)
    return AmpState(zeros, y.copy(), y.copy(), zeros, math.sqrt(float(np.dot(y, y)) / A.m), 0)


def amp_iterate(state: AmpState, A: SensingMatrix, y, config: AmpConfig) -> AmpState:
    """One AMP step: residual with Onsager correction, then thresholding."""
    m, n = A.shape
    if state.h_hat.shape != (n,) or state.z.shape != (m,):
        raise ValueError("state does not match the sensing matrix dimensions")
    residual = y - A.forward(state.h_hat)
    if state.t == 0 or not config.onsager:
        z = residual
    else:
        # (1/delta) * mean(eta') == (n/m) * fraction passed == passed / m
        b = onsager_coefficient(state.pseudo, state.theta, config.thresholder.kind) * n / m
        z = residual + b * state.z
    sigma = math.sqrt(float(np.dot(z, z)) / m)
    pseudo = A.adjoint(z) + state.h_hat
    theta = config.thresholder.tau * sigma
    h_new = config.thresholder(pseudo, theta)
    return AmpState(h_new, z, state.z, state.h_hat, sigma, state.t + 1, pseudo, theta, residual)


def _check_problem(A: SensingMatrix, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (A.m,):
        raise ValueError(f"y has shape {y.shape}, expected ({A.m},)")
    return y


def amp_run(A: SensingMatrix, y, config: AmpConfig) -> RecoveryResult:
    """Iterate AMP from ``h_hat = 0, z = y`` until a stopping rule fires.

    Stopping rules, checked after each step:

    * the previous estimate fits the data, ``||y - A h_hat|| <= stop_tol ||y||``
      (that estimate is returned);
    * non-finite values, or ``sigma`` above ``divergence_factor`` times the
      smallest ``sigma`` seen so far: status ``"diverged"`` and the last
      finite estimate is returned;
    * relative change ``||h_new - h_old|| / max(||h_old||, eps) < stop_tol``;
    * ``max_iters`` steps.
    """
    y = _check_problem(A, y)
    y_norm = float(np.linalg.norm(y))
    state = initial_state(A, y)
    history: list[float] = []
    min_sigma = math.inf
    status = "max-iters"
    for step in range(config.max_iters):
        new = amp_iterate(state, A, y, config)
        if step > 0 and np.linalg.norm(new.data_residual) <= config.stop_tol * y_norm:
            status = "converged"
            break
        history.append(new.sigma)
        if not (math.isfinite(new.sigma) and np.all(np.isfinite(new.h_hat))):
            status = "diverged"
            break
        if 0 < min_sigma < math.inf and new.sigma > config.divergence_factor * min_sigma:
            status = "diverged"
            break
        min_sigma = min(min_sigma, new.sigma)
        change = float(np.linalg.norm(new.h_hat - state.h_hat))
        state = new
        if change / max(float(np.linalg.norm(new.h_hat_prev)), REL_CHANGE_EPS) < config.stop_tol:
            status = "converged"
            break
    return RecoveryResult(state.h_hat.copy(), len(history), history, status)


def tune_tau_oracle(A: SensingMatrix, y, h_true, tau_grid=None,
                    config: AmpConfig | None = None):
    """Pick the threshold multiplier that minimizes NMSE against the truth.

    Runs :func:`amp_run` once per grid value. Ties go to the smaller ``tau``.
    Without ``tau_grid`` the kind-specific :func:`default_tau_grid` is used.

    Returns
    -------
    best_tau : float
    result : RecoveryResult
        The run for ``best_tau``.
    """
    if config is None:
        config = amp_config("soft")
    if tau_grid is None:
        tau_grid = default_tau_grid(config.thresholder.kind)
    grid = sorted(float(t) for t in tau_grid)
    if not grid:
        raise ValueError("tau grid is empty")
    h_true = np.asarray(h_true, dtype=float)
    if not np.any(h_true):
        raise ValueError("oracle tuning needs a nonzero true vector")
    best = None
    for tau in grid:
        result = amp_run(A, y, config.with_tau(tau))
        err = nmse(result.estimate, h_true)
        if best is None or err < best[0]:
            best = (err, tau, result)
    return best[1], best[2]
