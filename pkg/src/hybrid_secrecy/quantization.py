"""Low-resolution DACs (additive quantization noise model) and discrete phase shifters."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Minimum MSE of a Lloyd-Max quantizer for a unit-variance Gaussian input.
# Generated by scripts/lloyd_max_table.py.
LLOYD_MAX_MSE = {
    1: 0.3633802276,
    2: 0.1174818478,
    3: 0.03454776079,
    4: 0.009501008008,
    5: 0.002504668356,
}

_ASYMPTOTIC_GAIN = np.pi * np.sqrt(3) / 2


def dac_distortion_factor(b_dac: int) -> float:
    """Distortion factor ``eta`` (inverse SQNR) of a ``b_dac``-bit DAC."""
    if b_dac < 1:
        raise ValueError("b_dac must be >= 1")
    if b_dac in LLOYD_MAX_MSE:
        return LLOYD_MAX_MSE[b_dac]
    return float(_ASYMPTOTIC_GAIN * 2.0 ** (-2 * b_dac))


def effective_power(p_t: float, eta: float) -> float:
    """Pre-DAC power ``P`` such that the radiated power equals ``p_t``."""
    if not 0 <= eta < 1:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    return p_t / ((1 - eta) ** 2 + eta * (1 - eta))


def quantization_noise_covariance(f_bb, t_bb, beta, p, eta, check=True):
    """Diagonal covariance ``eta(1-eta) diag(R_uu)`` of the DAC noise."""
    f_bb = np.asarray(f_bb)
    t_bb = np.asarray(t_bb)
    if check:
        if abs(np.vdot(f_bb, f_bb).real - 1) > 1e-9:
            raise ValueError("f_bb must have unit norm")
        if abs(np.vdot(t_bb, t_bb).real - 1) > 1e-9:
            raise ValueError("t_bb must have unit Frobenius norm")
        if not 0 <= beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
    diag_ruu = beta * p * np.abs(f_bb) ** 2 + (1 - beta) * p * np.sum(np.abs(t_bb) ** 2, axis=1)
    return np.diag(eta * (1 - eta) * diag_ruu)


def phase_set(b_ps: int) -> np.ndarray:
    return 2 * np.pi * np.arange(2 ** b_ps) / 2 ** b_ps


def quantize_phases(phases, b_ps: int) -> np.ndarray:
    """Map each phase to the circularly nearest ``b_ps``-bit grid phase.

    Exact ties go to the smaller grid value in ``[0, 2*pi)``.
    """
    if b_ps < 1:
        raise ValueError("b_ps must be >= 1")
    n = 2 ** b_ps
    step = 2 * np.pi / n
    x = np.mod(np.asarray(phases, dtype=float), 2 * np.pi)
    lo = np.floor(x / step)
    d_lo = x - lo * step
    d_hi = (lo + 1) * step - x
    lo_idx = lo.astype(np.int64) % n
    hi_idx = (lo_idx + 1) % n
    pick_hi = (d_hi < d_lo) | ((d_hi == d_lo) & (hi_idx < lo_idx))
    idx = np.where(pick_hi, hi_idx, lo_idx)
    return idx * step


@dataclass(frozen=True)
class QuantizationModel:
    eta: float
    b_dac: int
    b_ps: int

    @classmethod
    def from_bits(cls, b_dac: int, b_ps: int) -> "QuantizationModel":
        return cls(dac_distortion_factor(b_dac), b_dac, b_ps)

    @classmethod
    def ideal(cls, b_ps: int = 16) -> "QuantizationModel":
        """Infinite DAC resolution (``eta = 0``)."""
        return cls(0.0, 0, b_ps)

    @property
    def phase_set(self) -> np.ndarray:
        return phase_set(self.b_ps)

    def quantize(self, phases):
        return quantize_phases(phases, self.b_ps)
