"""AN-aided secure hybrid precoding with low-resolution DACs and quantized phase shifters."""
from .channel import (ChannelRealization, EveChannelStats, SystemConfig, sample_channel,
                      sample_eve_stats)
from .gpi import GpiSettings, RayleighProductObjective, gpi_maximize, objective_value
from .optimizer import GaSettings, TlaisSettings, mrt_precoder, tlais
from .quantization import QuantizationModel, dac_distortion_factor, quantize_phases
from .rates import HybridPrecoder, rate_bob, secrecy_rate_approx, secrecy_rate_mc

__all__ = [
    "ChannelRealization", "EveChannelStats", "SystemConfig", "sample_channel",
    "sample_eve_stats", "GpiSettings", "RayleighProductObjective", "gpi_maximize",
    "objective_value", "GaSettings", "TlaisSettings", "mrt_precoder", "tlais",
    "QuantizationModel", "dac_distortion_factor", "quantize_phases", "HybridPrecoder",
    "rate_bob", "secrecy_rate_approx", "secrecy_rate_mc",
]
