"""BPSK over AWGN with path-loss geometry and split-power accounting.

Noise is unit variance everywhere; the energy axis is set by the total power
P = 2 * R_r * Eb/N0, which equals the frame-average transmitted power when the
per-mode powers are scaled to meet the global constraint with equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf import GaloisField

#: transmitted power fractions (source BC, source MAC, relay MAC) used by the
#: reference experiments; the 2:1:1 shape of P/2, P/4, P/4
DEFAULT_POWER_WEIGHTS = (0.5, 0.25, 0.25)


@dataclass(frozen=True)
class RelayGeometry:
    """Source-destination distance is normalised to 1; the relay sits at d."""

    d: float
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.d < 1.0:
            raise ValueError(f"relay distance {self.d} outside (0, 1)")

    @property
    def h_sd(self) -> float:
        return 1.0

    @property
    def h_sr(self) -> float:
        return self.d ** (-self.alpha / 2.0)

    @property
    def h_rd(self) -> float:
        return (1.0 - self.d) ** (-self.alpha / 2.0)

    @property
    def gain_sr(self) -> float:
        return 1.0 / self.d**self.alpha

    @property
    def gain_rd(self) -> float:
        return 1.0 / (1.0 - self.d) ** self.alpha


@dataclass(frozen=True)
class PowerAllocation:
    """Per-mode average powers under t*P_bc + (1-t)*(P_s_mac + P_r_mac) <= P."""

    total: float
    t: float
    p_s_bc: float
    p_s_mac: float
    p_r_mac: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"time-sharing factor {self.t} outside [0, 1]")
        if self.used() > self.total + 1e-12:
            raise ValueError(
                f"allocation spends {self.used():.12g} > budget {self.total:.12g}"
            )

    def used(self) -> float:
        return self.t * self.p_s_bc + (1.0 - self.t) * (self.p_s_mac + self.p_r_mac)

    @classmethod
    def from_weights(cls, total: float, t: float, weights=DEFAULT_POWER_WEIGHTS):
        """Scale relative per-mode weights so the budget is met with equality."""
        w_bc, w_s_mac, w_r_mac = weights
        denom = t * w_bc + (1.0 - t) * (w_s_mac + w_r_mac)
        if denom <= 0:
            raise ValueError("weights allocate no power to any active mode")
        c = total / denom
        return cls(
            total=total,
            t=t,
            p_s_bc=c * w_bc,
            p_s_mac=c * w_s_mac,
            p_r_mac=c * w_r_mac,
        )


@dataclass
class ReceivedFrame:
    """Real channel samples, one per transmitted bit."""

    samples: np.ndarray
    mode: str  # "bc_relay", "bc_dest", or "mac_dest"
    seed: int | None = None


def snr_normalize(rate: float, ebn0_db: float) -> float:
    """Total power for a target Eb/N0 at overall rate R_r: P = 2 R_r Eb/N0."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate {rate} outside (0, 1]")
    return 2.0 * float(rate) * 10.0 ** (ebn0_db / 10.0)


def modulate(bits, power: float) -> np.ndarray:
    """BPSK: bit 0 -> +sqrt(power), bit 1 -> -sqrt(power)."""
    if power <= 0:
        raise ValueError(f"power {power} must be positive")
    bits = np.asarray(bits)
    return math.sqrt(power) * (1.0 - 2.0 * bits.astype(np.float64))


def transmit(samples, gain: float, rng, noise_std: float = 1.0, mode: str = "bc_relay") -> ReceivedFrame:
    """y = gain * s + n with n ~ N(0, noise_std^2) i.i.d. per sample."""
    s = np.asarray(samples, dtype=np.float64)
    noise = rng.normal(0.0, noise_std, size=s.shape) if noise_std > 0 else 0.0
    return ReceivedFrame(samples=gain * s + noise, mode=mode)


def mac_superpose(
    s_source,
    s_relay,
    geometry: RelayGeometry,
    rng,
    noise_std: float = 1.0,
) -> ReceivedFrame:
    """y = h_sd * s_S + h_rd * s_R + n received at the destination."""
    s_source = np.asarray(s_source, dtype=np.float64)
    s_relay = np.asarray(s_relay, dtype=np.float64)
    if s_source.shape != s_relay.shape:
        raise ValueError("source and relay MAC signals must have equal length")
    clean = geometry.h_sd * s_source + geometry.h_rd * s_relay
    noise = rng.normal(0.0, noise_std, size=clean.shape) if noise_std > 0 else 0.0
    return ReceivedFrame(samples=clean + noise, mode="mac_dest")


def channel_likelihoods(samples, amplitude: float, field: GaloisField) -> np.ndarray:
    """Symbol likelihood vectors from per-bit Gaussian densities.

    samples holds m consecutive bit observations per symbol; entry [v, x] is
    the product over the m bits of the density of the observation given the
    bits of x at +/- amplitude.
    """
    y = np.asarray(samples, dtype=np.float64)
    m = field.m
    if y.size % m:
        raise ValueError(f"sample count {y.size} is not a multiple of m={m}")
    y = y.reshape(-1, m)
    norm = 1.0 / math.sqrt(2.0 * math.pi)
    like0 = norm * np.exp(-0.5 * (y - amplitude) ** 2)  # bit 0 -> +amplitude
    like1 = norm * np.exp(-0.5 * (y + amplitude) ** 2)
    bits = field.bits_table.astype(bool)  # (q, m)
    per_bit = np.where(bits[None, :, :], like1[:, None, :], like0[:, None, :])
    return per_bit.prod(axis=2)
