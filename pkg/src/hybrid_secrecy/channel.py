"""Clustered narrow-band mmWave MISO channels for Bob and Eve."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Static system parameters of the partially connected hybrid transmitter.

    ``p_t`` and ``sigma2`` are linear powers; the SNR used throughout the
    package is ``p_t / sigma2``.
    """

    n_t: int = 32
    k: int = 4
    l_paths: int = 12
    d_over_lambda: float = 0.5
    p_t: float = 1.0
    sigma2: float = 1.0
    b_dac: int = 8
    b_ps: int = 4
    beta_grid_step: float = 0.01

    def __post_init__(self):
        if self.n_t < 1 or self.k < 1 or self.n_t % self.k:
            raise ValueError(f"n_t={self.n_t} must be a positive multiple of k={self.k}")
        if self.l_paths < 1:
            raise ValueError("l_paths must be >= 1")
        if not (self.p_t > 0 and self.sigma2 > 0):
            raise ValueError("p_t and sigma2 must be positive")
        if self.b_dac < 1 or self.b_ps < 1:
            raise ValueError("b_dac and b_ps must be >= 1")
        if not (0 < self.beta_grid_step <= 1):
            raise ValueError("beta_grid_step must lie in (0, 1]")

    @property
    def n_sub(self) -> int:
        return self.n_t // self.k

    @property
    def snr_db(self) -> float:
        return 10 * np.log10(self.p_t / self.sigma2)

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "SystemConfig":
        """Unit noise variance, ``p_t`` set from the SNR in dB."""
        return cls(p_t=10 ** (snr_db / 10), sigma2=1.0, **kw)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray          # (n_t,) row channel
    gains: np.ndarray      # (L,)
    aod: np.ndarray        # (L,)
    steering: np.ndarray   # (L, n_t), row l = a(phi_l)^H

    @property
    def n_t(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class EveChannelStats:
    """Eve's partial CSI: the AoD steering matrix; gains are i.i.d. CN(0, 1)."""

    steering_e: np.ndarray  # (L, n_t)
    aod: np.ndarray = field(default=None)

    @property
    def l_paths(self) -> int:
        return self.steering_e.shape[0]

    @property
    def n_t(self) -> int:
        return self.steering_e.shape[1]


def array_response(phi, n, d_over_lambda=0.5):
    """Unit-norm ULA response ``a(phi)`` of length ``n``."""
    if n < 1:
        raise ValueError("array needs at least one element")
    m = np.arange(n)
    return np.exp(-2j * np.pi * d_over_lambda * m * np.sin(phi)) / np.sqrt(n)


def steering_matrix(aod, n, d_over_lambda=0.5):
    """Stack ``a(phi_l)^H`` as rows, shape ``(len(aod), n)``."""
    aod = np.atleast_1d(np.asarray(aod, dtype=float))
    m = np.arange(n)
    return np.exp(2j * np.pi * d_over_lambda * np.outer(np.sin(aod), m)) / np.sqrt(n)


def complex_gaussian(rng, size):
    """Standard circularly symmetric complex Gaussian samples."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def assemble_channel(gains, steering):
    """``h = sqrt(n_t / L) * g @ A_t``."""
    n_paths, n_t = steering.shape
    return np.sqrt(n_t / n_paths) * (gains @ steering)


def channel_from_paths(gains, aod, n_t, d_over_lambda=0.5) -> ChannelRealization:
    gains = np.atleast_1d(np.asarray(gains, dtype=complex))
    aod = np.atleast_1d(np.asarray(aod, dtype=float))
    steering = steering_matrix(aod, n_t, d_over_lambda)
    return ChannelRealization(assemble_channel(gains, steering), gains, aod, steering)


def sample_channel(cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    gains = complex_gaussian(rng, cfg.l_paths)
    aod = rng.uniform(0.0, 2 * np.pi, cfg.l_paths)
    return channel_from_paths(gains, aod, cfg.n_t, cfg.d_over_lambda)


def sample_eve_stats(cfg: SystemConfig, rng: np.random.Generator) -> EveChannelStats:
    """Draw Eve's AoDs, independent of Bob's."""
    aod = rng.uniform(0.0, 2 * np.pi, cfg.l_paths)
    return EveChannelStats(steering_matrix(aod, cfg.n_t, cfg.d_over_lambda), aod)


def sample_eve_gains(stats: EveChannelStats, rng: np.random.Generator, size=None):
    """i.i.d. CN(0,1) path gains; ``size`` adds leading batch dimensions."""
    shape = (stats.l_paths,) if size is None else tuple(np.atleast_1d(size)) + (stats.l_paths,)
    return complex_gaussian(rng, shape)


def eve_channel(stats: EveChannelStats, gains):
    """Full Eve channel(s) for given gains, used only for Monte Carlo checks."""
    return assemble_channel(gains, stats.steering_e)
