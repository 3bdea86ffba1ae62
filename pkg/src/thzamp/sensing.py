"""Sensing matrices with unit-norm columns.

Two ensembles are provided: i.i.d. Gaussian and the Toeplitz convolution
matrix of a random BPSK training sequence. All randomness goes through
``numpy.random.Generator`` with the PCG64 bit generator, seeded by an integer,
so a seed reproduces the same matrix on every platform.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

KINDS = ("gaussian", "toeplitz-bpsk", "custom")


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for an integer seed or a ``SeedSequence``."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """An ``m x n`` real sensing matrix with unit-l2-norm columns.

    Attributes
    ----------
    entries : numpy.ndarray
        Normalized matrix, read-only.
    kind : str
        ``"gaussian"``, ``"toeplitz-bpsk"`` or ``"custom"``.
    column_norms_pre_normalization : numpy.ndarray
        Column norms before scaling.
    seed : int or None
        Seed the matrix was drawn from, if any.
    sequence : numpy.ndarray or None
        For ``toeplitz-bpsk``, the ``m + n - 1`` training symbols.
    """

    entries: np.ndarray
    kind: str
    column_norms_pre_normalization: np.ndarray
    seed: int | None = None
    sequence: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        self.entries.setflags(write=False)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def forward(self, x, fast: bool = False) -> np.ndarray:
        """Apply ``A @ x``.

        With ``fast=True`` a Toeplitz-BPSK matrix is applied by FFT
        convolution of its training sequence instead of a dense product.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector, got shape {x.shape}")
        if fast and self.sequence is not None:
            return toeplitz_forward(self.sequence, x, self.m) / self.column_norms_pre_normalization[0]
        return self.entries @ x

    def adjoint(self, z, fast: bool = False) -> np.ndarray:
        """Apply ``A.T @ z`` (real field, so the Hermitian transpose is the transpose)."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.m,):
            raise ValueError(f"expected a length-{self.m} vector, got shape {z.shape}")
        if fast and self.sequence is not None:
            return toeplitz_adjoint(self.sequence, z, self.n) / self.column_norms_pre_normalization[0]
        return self.entries.T @ z

    def to_csv(self, path) -> None:
        """Dump as CSV: a ``# m=..,n=..,kind=..,seed=..`` header then row-major entries."""
        header = f"m={self.m},n={self.n},kind={self.kind},seed={self.seed}"
        np.savetxt(path, self.entries, delimiter=",", fmt="%.17g", header=header)

    @classmethod
    def from_csv(cls, path) -> "SensingMatrix":
        text = Path(path).read_text()
        first = text.splitlines()[0]
        if not first.startswith("#"):
            raise ValueError("missing matrix header line")
        meta = dict(item.split("=", 1) for item in first[1:].strip().split(","))
        entries = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
        m, n = int(meta["m"]), int(meta["n"])
        if entries.shape != (m, n):
            raise ValueError(f"header says {m}x{n} but found {entries.shape}")
        seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
        return from_array(entries, kind=meta.get("kind", "custom"), seed=seed)


def _normalize_columns(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(raw, axis=0)
    return raw / norms, norms


def _check_size(m, n):
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive integers, got {m}x{n}")


def from_array(raw, kind: str = "custom", seed=None) -> SensingMatrix:
    """Column-normalize an arbitrary matrix. Zero columns are rejected."""
    raw = np.array(raw, dtype=float, ndmin=2)
    if np.any(np.linalg.norm(raw, axis=0) == 0):
        raise ValueError("matrix has an all-zero column")
    entries, norms = _normalize_columns(raw)
    return SensingMatrix(np.ascontiguousarray(entries), kind, norms, seed)


def gaussian_matrix(m: int, n: int, seed: int) -> SensingMatrix:
    """i.i.d. N(0, 1) entries, each column then scaled to unit norm."""
    _check_size(m, n)
    rng = make_rng(seed)
    raw = rng.standard_normal((m, n))
    norms = np.linalg.norm(raw, axis=0)
    # redraw the (probability-zero) null columns
    while np.any(norms == 0):
        bad = np.flatnonzero(norms == 0)
        raw[:, bad] = rng.standard_normal((m, bad.size))
        norms = np.linalg.norm(raw, axis=0)
    return SensingMatrix(raw / norms, "gaussian", norms, seed)


def bpsk_sequence(length: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform i.i.d. +-1 symbols."""
    return 2.0 * rng.integers(0, 2, size=length) - 1.0


def toeplitz_from_sequence(s, m: int, n: int) -> np.ndarray:
    """Unnormalized convolution matrix with ``A[i, j] = s[i - j + n - 1]``."""
    s = np.asarray(s, dtype=float)
    if s.shape != (m + n - 1,):
        raise ValueError(f"need {m + n - 1} symbols for a {m}x{n} window, got {s.shape}")
    idx = np.arange(m)[:, None] - np.arange(n)[None, :] + (n - 1)
    return s[idx]


def toeplitz_bpsk_matrix(m: int, n: int, seed: int) -> SensingMatrix:
    """Linear-convolution matrix of a random BPSK training sequence.

    The sequence has ``m + n - 1`` symbols so that all ``m`` observed
    outputs see the full channel memory. Every column holds ``m`` entries
    of magnitude one, so normalization divides by ``sqrt(m)``.
    """
    _check_size(m, n)
    s = bpsk_sequence(m + n - 1, make_rng(seed))
    raw = toeplitz_from_sequence(s, m, n)
    entries, norms = _normalize_columns(raw)
    s.setflags(write=False)
    return SensingMatrix(entries, "toeplitz-bpsk", norms, seed, s)


def toeplitz_forward(s, x, m: int) -> np.ndarray:
    """Unnormalized ``A @ x`` for the convolution matrix of ``s`` via FFT."""
    n = len(x)
    return fftconvolve(s, x)[n - 1 : n - 1 + m]


def toeplitz_adjoint(s, z, n: int) -> np.ndarray:
    """Unnormalized ``A.T @ z``: cross-correlation of ``s`` with ``z``."""
    m = len(z)
    # x[j] = sum_i s[i - j + n - 1] z[i]
    return fftconvolve(s, z[::-1])[m - 1 : m - 1 + n][::-1]
