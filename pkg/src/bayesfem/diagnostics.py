"""Convergence and cost summaries for a single chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .samplers import Chain


@dataclass
class ChainDiagnostics:
    acceptance_rate: float
    running_mean: np.ndarray
    ess: np.ndarray
    degenerate: np.ndarray
    n_target_evals: int
    n_samples: int


def autocorrelation(x) -> np.ndarray:
    """Normalised autocorrelation of a 1-D series via FFT (biased estimator)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conjugate(f), nfft)[:n] / n
    if acov[0] == 0:
        return np.zeros(n)
    return acov / acov[0]


def effective_sample_size(x) -> tuple[float, bool]:
    """ESS of a 1-D chain by Geyer's initial monotone sequence.

    Returns ``(ess, degenerate)``. A chain with no variance has no
    meaningful autocorrelation; it is reported as ``(1.0, True)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        return float(n), True
    scale = max(np.abs(x).max(), np.finfo(float).tiny)
    if np.ptp(x) <= 1e-14 * scale:
        return 1.0, True
    rho = autocorrelation(x)
    n_pairs = n // 2
    pairs = rho[: 2 * n_pairs : 2] + rho[1 : 2 * n_pairs : 2]
    positive = np.flatnonzero(pairs <= 0)
    stop = positive[0] if positive.size else n_pairs
    pairs = np.minimum.accumulate(pairs[:stop]) if stop else np.zeros(0)
    tau = -1.0 + 2.0 * float(pairs.sum())
    tau = max(tau, 1.0 / np.log10(max(n, 10)))
    return n / tau, False


def diagnostics(chain: Chain) -> ChainDiagnostics:
    n = len(chain)
    if n < 10:
        raise InvalidInputError(f"diagnostics need at least 10 samples, got {n}")
    running = np.cumsum(chain.samples, axis=0) / np.arange(1, n + 1)[:, None]
    ess = np.empty(chain.dimension)
    degenerate = np.zeros(chain.dimension, dtype=bool)
    for i in range(chain.dimension):
        ess[i], degenerate[i] = effective_sample_size(chain.samples[:, i])
    return ChainDiagnostics(
        acceptance_rate=float(np.mean(chain.accepted)),
        running_mean=running,
        ess=ess,
        degenerate=degenerate,
        n_target_evals=chain.n_target_evals,
        n_samples=n,
    )
