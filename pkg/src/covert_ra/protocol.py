"""Secret chips, BPSK one-time-pad encoders and Bob's threshold decoders."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import as_bitgen, unpack_bits
from .params import ChannelParams, ProtocolConfig


class Verdict(enum.IntEnum):
    BIT0 = 0
    BIT1 = 1
    SILENT = 2


@dataclass(frozen=True)
class ChipMatrix:
    """Pre-shared chips, shape ``(m, u_n * n)``.

    Columns ``[k*n, (k+1)*n)`` of row ``i`` spread message bit ``k`` of sender ``i``.
    """

    bits: np.ndarray
    n: int
    u_n: int = 1

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    def row(self, i: int, bit: int = 0) -> np.ndarray:
        return self.bits[i, bit * self.n:(bit + 1) * self.n]

    def signs(self, bit: int = 0) -> np.ndarray:
        """(-1)**S for message bit ``bit``, shape ``(m, n)``."""
        return 1.0 - 2.0 * self.bits[:, bit * self.n:(bit + 1) * self.n]


@dataclass(frozen=True)
class TransmitBlock:
    signals: np.ndarray
    active_set: tuple[int, ...]
    messages: tuple

    @property
    def n(self) -> int:
        return self.signals.shape[1]


@dataclass(frozen=True)
class DecodeOutcome:
    verdicts: np.ndarray
    statistics: np.ndarray


def gen_chips(m: int, n: int, u_n: int = 1, seed=0) -> ChipMatrix:
    """Uniform i.i.d. chips drawn as raw 64-bit words from a seeded Philox stream."""
    if m < 1 or n < 1 or u_n < 1:
        raise ValueError(f"chip dimensions must be positive, got m={m}, n={n}, u_n={u_n}")
    cols = u_n * n
    words = as_bitgen(seed).random_raw(m * (-(-cols // 64)))
    return ChipMatrix(unpack_bits(words, m, cols), n, u_n)


def _check_active(proto: ProtocolConfig, chips: ChipMatrix, active_set: Sequence[int], messages):
    if chips.n != proto.n:
        raise ValueError(f"chip length {chips.n} does not match n={proto.n}")
    if len(messages) != len(active_set):
        raise ValueError(f"{len(active_set)} active senders but {len(messages)} messages")
    if any(not 0 <= i < chips.m for i in active_set):
        raise ValueError("active sender index outside the chip matrix")


def encode_random_access(proto: ProtocolConfig, chips: ChipMatrix, active_set: Sequence[int],
                         messages: Sequence[int]) -> TransmitBlock:
    """X_ij = sqrt(t_n/n) (-1)**(M_i + S_ij) for active senders, zero rows otherwise."""
    _check_active(proto, chips, active_set, messages)
    active = np.asarray(active_set, dtype=np.intp)
    msg = np.asarray(messages, dtype=np.int64).reshape(-1)
    x = np.zeros((chips.m, proto.n))
    if active.size:
        parity = (chips.bits[active, :proto.n] + msg[:, None]) & 1
        x[active] = proto.amplitude * (1.0 - 2.0 * parity)
    return TransmitBlock(x, tuple(int(i) for i in active), tuple(int(b) for b in msg))


def encode_multibit(proto: ProtocolConfig, chips: ChipMatrix, active_set: Sequence[int],
                    messages: Sequence[Sequence[int]]) -> TransmitBlock:
    """Each active sender superposes ``u_n`` spread bits on its own chip streams."""
    _check_active(proto, chips, active_set, messages)
    u = chips.u_n
    msg = np.asarray(messages, dtype=np.int64).reshape(len(active_set), -1)
    if msg.shape[1] != u:
        raise ValueError(f"each active sender needs {u} message bits, got {msg.shape[1]}")
    x = np.zeros((chips.m, proto.n))
    for row, i in enumerate(active_set):
        s = chips.bits[i].reshape(u, proto.n)
        x[i] = proto.amplitude * (1.0 - 2.0 * ((s + msg[row][:, None]) & 1)).sum(axis=0)
    return TransmitBlock(x, tuple(int(i) for i in active_set), tuple(tuple(r) for r in msg.tolist()))


def encode_p2p(proto: ProtocolConfig, chips: ChipMatrix, messages: Sequence[int]) -> np.ndarray:
    """Point-to-point superposition X_j = sqrt(t_n/n) (l - 2 A_j)."""
    msg = np.asarray(messages, dtype=np.int64).reshape(-1)
    if chips.n != proto.n or chips.m < msg.size:
        raise ValueError(f"need a {msg.size}x{proto.n} chip matrix, got {chips.m}x{chips.n}")
    odd = (chips.bits[:msg.size, :proto.n] + msg[:, None]) & 1
    return proto.amplitude * (msg.size - 2.0 * odd.sum(axis=0))


def decision_statistic(received: np.ndarray, chip_row: np.ndarray) -> float:
    received = np.asarray(received, dtype=float)
    chip_row = np.asarray(chip_row)
    if received.shape != chip_row.shape:
        raise ValueError(f"length mismatch: {received.shape} vs {chip_row.shape}")
    return float(np.dot(1.0 - 2.0 * chip_row, received))


def decision_statistics(received: np.ndarray, chips: ChipMatrix, bit: int = 0) -> np.ndarray:
    """Despread all ``m`` senders at once."""
    return chips.signs(bit) @ np.asarray(received, dtype=float)


def decode_random_access(stats, proto: ProtocolConfig, channel: ChannelParams,
                         threshold: float | None = None) -> DecodeOutcome:
    """Three-way rule: |Y_i| < theta is silent, otherwise the sign gives the bit.

    A tie |Y_i| == theta decodes to a bit.
    """
    stats = np.atleast_1d(np.asarray(stats, dtype=float))
    theta = proto.threshold(channel.a_min) if threshold is None else threshold
    verdicts = np.full(stats.shape, Verdict.SILENT, dtype=np.int8)
    verdicts[stats >= theta] = Verdict.BIT0
    verdicts[stats <= -theta] = Verdict.BIT1
    return DecodeOutcome(verdicts, stats)


def decode_p2p(stats) -> np.ndarray:
    """Bit 1 when the statistic is <= 0, bit 0 otherwise."""
    return (np.atleast_1d(np.asarray(stats, dtype=float)) <= 0).astype(np.int8)
