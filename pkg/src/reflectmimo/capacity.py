"""Link budget, stream allocation and achievable-rate estimates.

Spatial multiplexing over the singular values of the channel matrix: the
transmit power is split equally over the k strongest streams and the
per-stream rate follows a clipped linear-in-log spectral efficiency curve;
the stream count maximizing the sum is chosen. Wideband rate integrates the
per-frequency spectral efficiency over the band with the midpoint rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import MimoMatrix

__all__ = [
    "LinkBudget",
    "RateModel",
    "band_rate",
    "optimal_streams",
    "rayleigh_distance",
    "rho",
    "singular_values",
    "spectral_efficiency",
]

# Thermal noise floor at 290 K in dBm/Hz.
_NOISE_FLOOR_DBM_HZ = -174.0


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, bandwidth and receiver noise figure."""

    tx_power_dbm: float = 23.0
    bandwidth_hz: float = 2e9
    noise_figure_db: float = 3.0

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth must be positive")

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** (self.tx_power_dbm / 10.0) * 1e-3

    @property
    def noise_psd_w_hz(self) -> float:
        return 10.0 ** ((_NOISE_FLOOR_DBM_HZ + self.noise_figure_db) / 10.0) * 1e-3

    @property
    def noise_power_w(self) -> float:
        return self.noise_psd_w_hz * self.bandwidth_hz


@dataclass(frozen=True)
class RateModel:
    """Clipped spectral-efficiency curve alpha*log2(1+snr), capped at se_max."""

    alpha: float = 0.6
    se_max: float = 4.8

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.se_max <= 0.0:
            raise ValueError("rate model constants must be positive")


def singular_values(h: MimoMatrix | np.ndarray) -> np.ndarray:
    """Singular values of the channel matrix, descending."""
    entries = h.entries if isinstance(h, MimoMatrix) else np.asarray(h)
    return np.linalg.svd(entries, compute_uv=False)


def rho(snr: float, model: RateModel = RateModel()) -> float:
    """Per-stream spectral efficiency at a given SNR, bps/Hz."""
    if snr < 0.0:
        raise ValueError("SNR must be non-negative")
    return min(model.alpha * math.log2(1.0 + snr), model.se_max)


def _stream_rates(
    singulars: np.ndarray, budget: LinkBudget, model: RateModel
) -> list[float]:
    s = np.sort(np.asarray(singulars, dtype=float))[::-1]
    if s.size == 0 or np.any(s < 0.0):
        raise ValueError("singular values must be a non-empty non-negative list")
    rates = []
    for k in range(1, s.size + 1):
        per_stream = budget.tx_power_w / (budget.noise_power_w * k)
        rates.append(sum(rho(float(s[i] ** 2) * per_stream, model) for i in range(k)))
    return rates


def spectral_efficiency(
    singulars: np.ndarray, budget: LinkBudget, model: RateModel = RateModel()
) -> float:
    """Best equal-power stream split, bps/Hz."""
    return max(_stream_rates(singulars, budget, model))


def optimal_streams(
    singulars: np.ndarray, budget: LinkBudget, model: RateModel = RateModel()
) -> int:
    """Stream count achieving the spectral-efficiency maximum."""
    rates = _stream_rates(singulars, budget, model)
    return int(np.argmax(rates)) + 1


def band_rate(
    channel_at: Callable[[float], MimoMatrix],
    f0: float,
    bandwidth: float,
    budget: LinkBudget,
    model: RateModel = RateModel(),
    n_freq: int = 10,
) -> tuple[float, float]:
    """Midpoint-rule rate over [f0 - B/2, f0 + B/2].

    Returns (rate in bit/s, band-averaged spectral efficiency in bps/Hz).
    """
    if n_freq < 1:
        raise ValueError("need at least one frequency sample")
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    step = bandwidth / n_freq
    total = 0.0
    for i in range(n_freq):
        f = f0 - bandwidth / 2.0 + (i + 0.5) * step
        total += spectral_efficiency(singular_values(channel_at(f)), budget, model)
    rate = step * total
    return rate, rate / bandwidth


def rayleigh_distance(aperture: float, wavelength: float) -> float:
    """Far-field boundary 2 D^2 / lambda of an aperture of size D."""
    if aperture < 0.0 or wavelength <= 0.0:
        raise ValueError("aperture must be non-negative and wavelength positive")
    return 2.0 * aperture * aperture / wavelength
