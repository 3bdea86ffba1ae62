"""Approximate message passing for sparse channel estimation.

Soft- and hard-thresholding AMP, least-squares and CoSaMP baselines, sensing
matrix and channel generators, and Monte-Carlo drivers for phase-transition
and channel-estimation experiments.
"""

__version__ = "0.1.0"

from .core import (NEG_INF_DB, ProblemGeometry, RecoveryResult, geometry, mse_db, nmse,
                   nmse_db, success)
from .sensing import SensingMatrix, gaussian_matrix, toeplitz_bpsk_matrix
from .signals import (PRESETS, ChannelPreset, SparseSignal, add_noise, get_preset,
                      strictly_sparse, thz_like_channel)
from .amp import (AmpConfig, AmpState, Thresholder, amp_config, amp_iterate, amp_run,
                  hard_threshold, onsager_coefficient, soft_threshold, tune_tau_oracle)
from .baselines import cosamp, least_squares, oracle_ls
