"""Relay gain strategies and the end-to-end SNR they produce."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ChannelDependent",
    "FixedGain",
    "RelayStrategy",
    "e2e_snr",
    "e2e_snr_channel_dependent",
    "e2e_snr_fixed_gain",
    "e2e_snr_min_bound",
]


@dataclass(frozen=True)
class FixedGain:
    """Relay with a fixed gain; ``c`` is the constant in g1 g2 / (g2 + C)."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"fixed-gain constant C must be positive, got {self.c!r}")


@dataclass(frozen=True)
class ChannelDependent:
    """Relay gain that inverts the first hop (CSI-assisted)."""


RelayStrategy = Union[FixedGain, ChannelDependent]


def _check(*arrays):
    out = [np.asarray(x, dtype=float) for x in arrays]
    for x in out:
        if np.any(x < 0):
            raise ValueError("SNRs must be nonnegative")
    return out


def e2e_snr_fixed_gain(g1, g2, c: float):
    """gamma1 gamma2 / (gamma2 + C)."""
    g1, g2 = _check(g1, g2)
    if not c > 0:
        raise ValueError("C must be positive")
    return g1 * g2 / (g2 + c)


def e2e_snr_channel_dependent(g1, g2):
    """Exact harmonic form gamma1 gamma2 / (gamma1 + gamma2 + 1)."""
    g1, g2 = _check(g1, g2)
    return g1 * g2 / (g1 + g2 + 1.0)


def e2e_snr_min_bound(g1, g2):
    """min(gamma1, gamma2); an upper bound on the channel-dependent SNR."""
    g1, g2 = _check(g1, g2)
    return np.minimum(g1, g2)


def e2e_snr(strategy: RelayStrategy, g1, g2, exact: bool = False):
    """End-to-end SNR for a strategy.

    For a channel-dependent relay the min bound is used unless ``exact``.
    """
    if isinstance(strategy, FixedGain):
        return e2e_snr_fixed_gain(g1, g2, strategy.c)
    if isinstance(strategy, ChannelDependent):
        return e2e_snr_channel_dependent(g1, g2) if exact else e2e_snr_min_bound(g1, g2)
    raise TypeError(f"unknown relay strategy {strategy!r}")
