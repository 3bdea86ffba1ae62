"""Monte-Carlo drivers: empirical phase transitions, the analytical l1 curve
and the channel-estimation benchmark.

Randomness is derived per trial from ``(master_seed, cell_index,
trial_index, stream)`` through ``numpy.random.SeedSequence``, so a table does
not depend on evaluation order or on how trials are spread over worker
processes.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr
from threadpoolctl import threadpool_limits

from .amp import AmpConfig, Thresholder, amp_config, amp_run, default_tau_grid, tune_tau_oracle
from .baselines import cosamp, least_squares, oracle_ls
from .core import SUCCESS_THRESHOLD_DB, nmse, to_db
from .sensing import gaussian_matrix, toeplitz_bpsk_matrix
from .signals import ChannelPreset, add_noise, strictly_sparse, thz_like_channel

PHASE_ALGORITHMS = ("s-amp", "h-amp", "cosamp")
BENCHMARK_ALGORITHMS = ("s-amp", "h-amp", "cosamp", "ls", "opt-ls")

# independent random streams within one trial
_MATRIX, _SIGNAL, _NOISE, _CHANNEL = range(4)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable 64-bit seed mixed from a master seed and integer indices."""
    if master_seed < 0 or any(i < 0 for i in indices):
        raise ValueError("seeds and indices must be nonnegative")
    words = np.random.SeedSequence([int(master_seed), *map(int, indices)]).generate_state(2)
    return int(words[1]) << 32 | int(words[0])


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _kind(algo: str) -> str:
    return {"s-amp": "soft", "h-amp": "hard"}[algo]


def _map(func, tasks, workers: int):
    """Ordered map over tasks; BLAS is pinned to one thread so results do not
    depend on the worker count."""
    if workers <= 1 or len(tasks) <= 1:
        with threadpool_limits(limits=1):
            return [func(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
        return list(pool.map(func, tasks, chunksize=chunk))


def _init_worker():
    threadpool_limits(limits=1)


# --------------------------------------------------------------------------
# analytical l1 / soft-AMP phase transition


def _psi(z):
    return (1.0 + z * z) * ndtr(-z) - z * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _dmm_ratio(z, delta):
    psi = _psi(z)
    return (1.0 - 2.0 / delta * psi) / (1.0 + z * z - 2.0 * psi)


def dmm_l1_curve(delta: float) -> float:
    """Critical normalized sparsity ``k/m`` of l1 recovery at indeterminacy ``delta``.

    Maximizes the Donoho-Maleki-Montanari expression over the threshold
    parameter ``z > 0``: a coarse scan on ``(0, 20]`` followed by bounded
    Brent refinement around the best grid point. ``delta = 1`` returns the
    limit value 1.
    """
    delta = float(delta)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if delta == 1:
        return 1.0
    z = np.linspace(0.0, 20.0, 4001)[1:]
    vals = _dmm_ratio(z, delta)
    i = int(np.argmax(vals))
    lo, hi = z[max(i - 1, 0)], z[min(i + 1, z.size - 1)]
    res = minimize_scalar(lambda t: -_dmm_ratio(t, delta), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return float(max(-res.fun, vals[i]))


# --------------------------------------------------------------------------
# empirical phase transition


@dataclass(frozen=True)
class PhaseGridSpec:
    """A grid of (indeterminacy, sparsity) cells to test.

    ``rho_axis`` selects whether ``rho_values`` are normalized sparsities
    ``k/m`` (``"rho_prime"``) or sparsity factors ``k/n`` (``"rho"``). The
    problem size is ``n`` for every cell unless ``n_table`` maps each delta
    to its own size.
    """

    delta_values: tuple
    rho_values: tuple
    rho_axis: str = "rho_prime"
    n: int = 500
    n_table: tuple | None = None
    trials: int = 10
    algo: str = "s-amp"
    config: AmpConfig = field(default_factory=lambda: amp_config("soft"))
    tau_grid: tuple | None = None
    success_threshold_db: float = SUCCESS_THRESHOLD_DB
    master_seed: int = 0

    def __post_init__(self):
        if self.algo not in PHASE_ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.rho_axis not in ("rho_prime", "rho"):
            raise ValueError(f"unknown sparsity axis {self.rho_axis!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(not 0 < d <= 2 for d in self.delta_values):
            raise ValueError("every delta must lie in (0, 2]")
        if self.n_table is not None:
            table = dict(self.n_table)
            missing = [d for d in self.delta_values if d not in table]
            if missing:
                raise ValueError(f"dynamic size table misses delta values {missing}")
        elif self.n < 1:
            raise ValueError("n must be positive")

    def n_for(self, delta: float) -> int:
        return int(dict(self.n_table)[delta]) if self.n_table is not None else int(self.n)

    def amp_config(self) -> AmpConfig:
        return replace(self.config, thresholder=Thresholder(_kind(self.algo), self.config.thresholder.tau))


def dynamic_n_table(delta_values, n_at_min: int = 20000, n_at_max: int = 2000) -> tuple:
    """Geometric interpolation of problem size from the smallest delta to the largest."""
    ds = sorted(set(float(d) for d in delta_values))
    lo, hi = ds[0], ds[-1]
    table = []
    for d in delta_values:
        frac = 0.0 if hi == lo else (d - lo) / (hi - lo)
        table.append((d, round_half_up(n_at_min * (n_at_max / n_at_min) ** frac)))
    return tuple(table)


@dataclass(frozen=True)
class PhaseCell:
    index: int
    delta: float
    rho: float
    n: int
    m: int
    k: int
    feasible: bool


@dataclass(frozen=True)
class PhaseCellResult:
    delta: float
    rho_prime: float
    n: int
    m: int
    k: int
    successes: int
    trials: int
    success_rate: float
    mean_nmse_db: float
    status: str = "ok"


def phase_cells(spec: PhaseGridSpec) -> list:
    """Enumerate grid cells with their derived ``(n, m, k)``, delta-major."""
    cells = []
    for i, delta in enumerate(spec.delta_values):
        n = spec.n_for(delta)
        m = round_half_up(delta * n)
        for j, rho in enumerate(spec.rho_values):
            if spec.rho_axis == "rho_prime":
                k = max(1, round_half_up(rho * m))
            else:
                k = round_half_up(rho * n)
            feasible = m >= 1 and 1 <= k <= n
            cells.append(PhaseCell(i * len(spec.rho_values) + j, delta, rho, n, m, k, feasible))
    return cells


def _phase_trial(task) -> float:
    spec, cell, trial = task
    A = gaussian_matrix(cell.m, cell.n, derive_seed(spec.master_seed, cell.index, trial, _MATRIX))
    h = strictly_sparse(cell.n, cell.k, derive_seed(spec.master_seed, cell.index, trial, _SIGNAL)).values
    y = A.forward(h)
    if spec.algo == "cosamp":
        estimate = cosamp(A, y, cell.k).estimate
    else:
        grid = spec.tau_grid if spec.tau_grid is not None else default_tau_grid(_kind(spec.algo))
        estimate = tune_tau_oracle(A, y, h, grid, spec.amp_config())[1].estimate
    return nmse(estimate, h)


def _summarize_cell(spec: PhaseGridSpec, cell: PhaseCell, errors) -> PhaseCellResult:
    rho_prime = cell.rho if spec.rho_axis == "rho_prime" else cell.k / cell.m
    if not cell.feasible:
        return PhaseCellResult(cell.delta, rho_prime, cell.n, cell.m, cell.k, 0, spec.trials,
                               0.0, math.nan, "skipped")
    wins = sum(to_db(e) <= spec.success_threshold_db for e in errors)
    return PhaseCellResult(cell.delta, rho_prime, cell.n, cell.m, cell.k, wins, len(errors),
                           wins / len(errors), to_db(float(np.mean(errors))))


def evaluate_phase_cell(spec: PhaseGridSpec, cell: PhaseCell) -> PhaseCellResult:
    """Run all trials of a single cell in-process."""
    errors = _map(_phase_trial, [(spec, cell, t) for t in range(spec.trials)], 1) if cell.feasible else []
    return _summarize_cell(spec, cell, errors)


def phase_transition(spec: PhaseGridSpec, workers: int = 1) -> list:
    """Success statistics for every cell of the grid.

    Each trial draws a fresh column-normalized Gaussian matrix and a strictly
    sparse signal, observes it without noise and recovers it with the chosen
    algorithm (AMP variants use the oracle threshold). A trial succeeds when
    its NMSE is at or below ``spec.success_threshold_db``; ``mean_nmse_db``
    is the dB value of the NMSE averaged over trials. Infeasible cells come
    back with status ``"skipped"``.
    """
    cells = phase_cells(spec)
    tasks = [(spec, c, t) for c in cells if c.feasible for t in range(spec.trials)]
    errors = iter(_map(_phase_trial, tasks, workers))
    results = []
    for cell in cells:
        errs = [next(errors) for _ in range(spec.trials)] if cell.feasible else []
        results.append(_summarize_cell(spec, cell, errs))
    return results


def empirical_boundary(results, level: float = 0.5) -> dict:
    """Normalized sparsity at which the success rate first drops below ``level``, per delta.

    Linear interpolation between the last cell at or above ``level`` and the
    first one below it. If no cell drops below, the largest tested value is
    returned; if the first cell is already below, the smallest.
    """
    by_delta = defaultdict(list)
    for r in results:
        if r.status == "ok":
            by_delta[r.delta].append((r.rho_prime, r.success_rate))
    out = {}
    for delta, pts in by_delta.items():
        pts.sort()
        boundary = pts[-1][0]
        for i, (rho, rate) in enumerate(pts):
            if rate < level:
                if i == 0:
                    boundary = rho
                else:
                    r0, s0 = pts[i - 1]
                    boundary = r0 + (s0 - level) / (s0 - rate) * (rho - r0)
                break
        out[delta] = boundary
    return out


# --------------------------------------------------------------------------
# channel estimation benchmark


@dataclass(frozen=True)
class BenchmarkSpec:
    """Channel-estimation comparison over training lengths.

    One synthetic channel is drawn from ``master_seed``. Each of the
    ``realizations`` then uses a fresh BPSK training sequence and fresh noise,
    shared by all algorithms so comparisons are paired.
    """

    preset: ChannelPreset
    m_values: tuple
    algorithms: tuple = BENCHMARK_ALGORITHMS
    realizations: int = 20
    snr_db: float = 20.0
    master_seed: int = 0
    decay_rate: float = 0.7
    tail_fraction: float = 0.01
    config: AmpConfig = field(default_factory=lambda: amp_config("soft"))
    soft_tau_grid: tuple | None = None
    hard_tau_grid: tuple | None = None

    def __post_init__(self):
        unknown = set(self.algorithms) - set(BENCHMARK_ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")
        lo, hi = self.preset.m_range
        bad = [m for m in self.m_values if not lo <= m <= hi]
        if bad:
            raise ValueError(f"m values {bad} fall outside the preset range [{lo}, {hi}]")

    def channel(self):
        return thz_like_channel(self.preset, self.decay_rate, self.tail_fraction,
                                derive_seed(self.master_seed, 0, 0, _CHANNEL))


@dataclass(frozen=True)
class BenchmarkRow:
    preset: str
    n: int
    k: int
    m: int
    algorithm: str
    snr_db: float
    trials: int
    mse_db: float
    squared_errors: tuple = ()
    status: str = "ok"


def _feasible(algo: str, m: int, k: int) -> bool:
    return not (algo == "opt-ls" and k > m)


def _channel_trial(task) -> dict:
    spec, h, support, mi, r = task
    m = spec.m_values[mi]
    A = toeplitz_bpsk_matrix(m, spec.preset.n, derive_seed(spec.master_seed, mi, r, _MATRIX))
    y, _ = add_noise(A.forward(h), spec.snr_db, derive_seed(spec.master_seed, mi, r, _NOISE))
    errors = {}
    for algo in spec.algorithms:
        if not _feasible(algo, m, spec.preset.k):
            continue
        if algo == "ls":
            est = least_squares(A, y)
        elif algo == "opt-ls":
            est = oracle_ls(A, y, support)
        elif algo == "cosamp":
            est = cosamp(A, y, spec.preset.k).estimate
        else:
            kind = _kind(algo)
            grid = spec.soft_tau_grid if kind == "soft" else spec.hard_tau_grid
            config = replace(spec.config, thresholder=Thresholder(kind, spec.config.thresholder.tau))
            est = tune_tau_oracle(A, y, h, grid, config)[1].estimate
        err = est - h
        errors[algo] = float(np.dot(err, err))
    return errors


def channel_benchmark(spec: BenchmarkSpec, workers: int = 1) -> list:
    """MSE in dB of every algorithm at every training length.

    Rows come out m-major in the order of ``spec.algorithms``. Each row keeps
    the per-realization squared errors for paired comparisons.
    """
    chan = spec.channel()
    tasks = [(spec, chan.values, chan.support, mi, r)
             for mi in range(len(spec.m_values)) for r in range(spec.realizations)]
    outcomes = _map(_channel_trial, tasks, workers)
    rows = []
    p = spec.preset
    for mi, m in enumerate(spec.m_values):
        block = outcomes[mi * spec.realizations:(mi + 1) * spec.realizations]
        for algo in spec.algorithms:
            if not _feasible(algo, m, p.k):
                rows.append(BenchmarkRow(p.name, p.n, p.k, m, algo, spec.snr_db, 0, math.nan,
                                         status="skipped"))
                continue
            errs = tuple(o[algo] for o in block)
            rows.append(BenchmarkRow(p.name, p.n, p.k, m, algo, spec.snr_db, len(errs),
                                     to_db(float(np.mean(errs))), errs))
    return rows


def single_recovery(algo: str, A, y, k: int | None = None, h_true=None, tau: float | None = None,
                    config: AmpConfig | None = None, tau_grid=None):
    """Run one algorithm on one instance.

    AMP variants use ``tau`` when given, otherwise the oracle grid (which
    needs ``h_true``). Returns ``(estimate, RecoveryResult or None, tau)``.
    """
    if algo == "ls":
        return least_squares(A, y), None, None
    if algo == "opt-ls":
        if h_true is None:
            raise ValueError("opt-ls needs the true signal")
        support = np.flatnonzero(h_true) if k is None else np.sort(np.argsort(-np.abs(h_true), kind="stable")[:k])
        return oracle_ls(A, y, support), None, None
    if algo == "cosamp":
        if k is None:
            raise ValueError("cosamp needs the sparsity k")
        res = cosamp(A, y, k)
        return res.estimate, res, None
    if algo not in ("s-amp", "h-amp"):
        raise ValueError(f"unknown algorithm {algo!r}")
    base = config if config is not None else amp_config(_kind(algo))
    base = replace(base, thresholder=Thresholder(_kind(algo), base.thresholder.tau))
    if tau is not None:
        res = amp_run(A, y, base.with_tau(tau))
        return res.estimate, res, float(tau)
    if h_true is None:
        raise ValueError("oracle threshold selection needs the true signal; pass tau instead")
    best, res = tune_tau_oracle(A, y, h_true, tau_grid, base)
    return res.estimate, res, best
