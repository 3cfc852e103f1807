"""AWGN multi-sender channel to Bob and to Willie with block-constant fading."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_bitgen
from .params import ChannelParams
from .protocol import TransmitBlock


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise of the given variance drawn from ``stream``.

    ``variance == 0`` is an explicit noiseless mode and draws nothing.
    ``stream`` is an integer seed or a bit generator (consumed in place).
    """

    variance: float
    stream: object = 0

    def __post_init__(self):
        if not self.variance >= 0 or not math.isfinite(self.variance):
            raise ValueError(f"noise variance must be non-negative, got {self.variance!r}")

    def sample(self, n: int) -> np.ndarray:
        if self.variance == 0:
            return np.zeros(n)
        z = np.random.Generator(as_bitgen(self.stream)).standard_normal(n)
        return z * math.sqrt(self.variance)


def _receive(block: TransmitBlock, gains, noise: NoiseSpec) -> np.ndarray:
    m = block.signals.shape[0]
    if len(gains) < m:
        raise ValueError(f"{len(gains)} gains for {m} senders")
    y = noise.sample(block.n)
    g = np.asarray(gains[:m], dtype=float)
    # silent rows are exactly zero, so summing over the active set is enough
    for i in block.active_set:
        y += g[i] * block.signals[i]
    return y


def bob_receive(block: TransmitBlock, channel: ChannelParams, noise: NoiseSpec) -> np.ndarray:
    """Y_j = N_Bj + sum_k a_k X_kj."""
    return _receive(block, channel.bob_gains, noise)


def willie_receive(block: TransmitBlock, channel: ChannelParams, noise: NoiseSpec) -> np.ndarray:
    """Z_j = N_Wj + sum_k b_k X_kj."""
    return _receive(block, channel.willie_gains, noise)
