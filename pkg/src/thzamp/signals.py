"""Sparse test vectors, synthetic THz-like channels and noisy measurements."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .sensing import make_rng


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """A length-n vector together with its (dominant) support.

    For strictly sparse signals ``values`` is nonzero exactly on
    ``support``. For approximately sparse channels ``support`` lists the
    ``k`` dominant taps and the remaining taps carry a small tail.
    """

    values: np.ndarray
    support: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.values.size

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "value"])
            for i, v in enumerate(self.values):
                writer.writerow([i, repr(float(v))])

    @classmethod
    def from_csv(cls, path, k: int | None = None) -> "SparseSignal":
        """Load an ``index,value`` CSV.

        Without ``k`` the support is the set of nonzero entries; with ``k``
        it is the ``k`` largest-magnitude entries.
        """
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        idx = np.array([int(r["index"]) for r in rows])
        values = np.zeros(idx.max() + 1 if idx.size else 0)
        values[idx] = [float(r["value"]) for r in rows]
        if k is None:
            support = np.flatnonzero(values)
        else:
            support = np.sort(np.argsort(-np.abs(values), kind="stable")[:k])
        return cls(values, support, int(support.size))


@dataclass(frozen=True)
class ChannelPreset:
    """Subband configuration for the channel benchmark.

    ``N`` is the number of subbands, ``N_u`` the subband used, ``n`` the
    channel length in taps, ``k`` the number of dominant taps and
    ``m_range`` the admissible training lengths (inclusive).
    """

    name: str
    N: int
    N_u: str
    n: int
    k: int
    m_range: tuple
    snr_db: float = 20.0

    def __post_init__(self):
        if not self.n >= self.k >= 1:
            raise ValueError(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        lo, hi = self.m_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad m_range {self.m_range}")


PRESETS = {
    "32-band-first": ChannelPreset("32-band-first", 32, "first", 1585, 9, (100, 3000)),
    "16-band-third": ChannelPreset("16-band-third", 16, "third", 3223, 9, (100, 5000)),
}


def get_preset(name: str) -> ChannelPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _nonzero_normals(rng, size):
    x = rng.standard_normal(size)
    while np.any(x == 0):
        bad = x == 0
        x[bad] = rng.standard_normal(int(bad.sum()))
    return x


def strictly_sparse(n: int, k: int, seed) -> SparseSignal:
    """Uniformly placed support of size ``k`` with standard normal amplitudes."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    rng = make_rng(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    values = np.zeros(n)
    values[support] = _nonzero_normals(rng, k)
    return SparseSignal(values, support, k)


def thz_like_channel(preset: ChannelPreset, decay_rate: float = 0.7,
                     tail_fraction: float = 0.01, seed=0) -> SparseSignal:
    """Approximately sparse surrogate for an indoor THz channel impulse response.

    ``preset.k`` dominant taps sit at random delays. Their magnitudes fall by
    ``decay_rate`` from one tap to the next in delay order and their signs
    are random. Every other tap gets i.i.d. Gaussian clutter scaled so that
    the off-support share of the total energy is exactly ``tail_fraction``
    (``0`` gives a strictly sparse channel).
    """
    n, k = preset.n, preset.k
    if not 0 <= tail_fraction < 1:
        raise ValueError(f"tail_fraction must lie in [0, 1), got {tail_fraction}")
    if not 0 < decay_rate <= 1:
        raise ValueError(f"decay_rate must lie in (0, 1], got {decay_rate}")
    rng = make_rng(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    signs = 2.0 * rng.integers(0, 2, size=k) - 1.0
    values = np.zeros(n)
    values[support] = signs * decay_rate ** np.arange(k)

    off = np.setdiff1d(np.arange(n), support, assume_unique=True)
    if tail_fraction > 0 and off.size:
        tail = _nonzero_normals(rng, off.size)
        dominant = float(np.dot(values, values))
        target = tail_fraction / (1.0 - tail_fraction) * dominant
        values[off] = tail * math.sqrt(target / float(np.dot(tail, tail)))
    return SparseSignal(values, support, k)


def tail_energy_fraction(signal: SparseSignal) -> float:
    """Share of the signal energy that lies off the listed support."""
    total = float(np.dot(signal.values, signal.values))
    on = float(np.sum(signal.values[signal.support] ** 2))
    return (total - on) / total


def noise_variance(y_clean, snr_db: float) -> float:
    """Per-sample noise power ``||y||^2 / (m 10^(snr/10))``; zero for infinite SNR."""
    y_clean = np.asarray(y_clean, dtype=float)
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return float(np.dot(y_clean, y_clean)) / (y_clean.size * 10.0 ** (snr_db / 10.0))


def add_noise(y_clean, snr_db: float, seed):
    """Add white Gaussian noise at the given SNR.

    Returns
    -------
    y : numpy.ndarray
        Noisy measurement.
    variance : float
        Per-sample noise variance used.
    """
    y_clean = np.asarray(y_clean, dtype=float)
    if math.isinf(snr_db) and snr_db > 0:
        return y_clean.copy(), 0.0
    if not np.any(y_clean):
        raise ValueError("cannot scale noise to a finite SNR on an all-zero signal")
    var = noise_variance(y_clean, snr_db)
    noise = make_rng(seed).standard_normal(y_clean.size) * math.sqrt(var)
    return y_clean + noise, var
