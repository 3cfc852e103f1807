"""Pure-Python trial kernels, composed from the public protocol and channel functions.

Same signatures and random-stream consumption as the compiled ``_kernels``
module; used when the extension is unavailable and as its reference.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from . import _rng
from .channel import NoiseSpec
from .params import ProtocolConfig
from .protocol import (Verdict, decision_statistics, decode_random_access, encode_random_access,
                       gen_chips)


def _messages(seed, t: int, l: int, random_msgs: bool) -> np.ndarray:
    if not random_msgs:
        return np.zeros(l, dtype=np.int64)
    return (_rng.stream(seed, t, _rng.MESSAGES).random_raw(l) & 1).astype(np.int64)


def decode_chunk(seed, start, stop, n, m, l, amp, gains, v_bob, theta, random_msgs):
    """Return (all-correct trial count, confusion[m, truth, verdict])."""
    proto = ProtocolConfig(n=n, m=m, l=l, t_n=amp * amp * n)
    gains = np.asarray(gains, dtype=float)
    confusion = np.zeros((m, 3, 3), dtype=np.int64)
    truth = np.full(m, Verdict.SILENT, dtype=np.int64)
    rows = np.arange(m)
    ok = 0
    for t in range(start, stop):
        chips = gen_chips(m, n, 1, _rng.stream(seed, t, _rng.CHIPS))
        msgs = _messages(seed, t, l, random_msgs)
        block = encode_random_access(proto, chips, range(l), msgs)
        y = NoiseSpec(v_bob, _rng.stream(seed, t, _rng.BOB_NOISE)).sample(n)
        for i in block.active_set:
            y += gains[i] * block.signals[i]
        verdicts = decode_random_access(decision_statistics(y, chips), proto, None, theta).verdicts
        truth[:l] = msgs
        np.add.at(confusion, (rows, truth, verdicts.astype(np.int64)), 1)
        ok += int(np.array_equal(verdicts, truth))
    return ok, confusion


def mixture_llr(z: np.ndarray, logw, means, mix_var: float, v_ref: float) -> float:
    """sum_j log p_mix(z_j) - log N(z_j; 0, v_ref)."""
    d = z[:, None] - means[None, :]
    lp = special.logsumexp(logw[None, :] - d * d / (2.0 * mix_var), axis=1)
    lp -= 0.5 * math.log(mix_var)
    lg = -z * z / (2.0 * v_ref) - 0.5 * math.log(v_ref)
    return float(np.sum(lp - lg))


def detect_chunk(seed, start, stop, n, l, amp, gains, v_willie, v_silent, logw, means,
                 mix_var, v_ref, energy_threshold, random_msgs):
    """Paired silent/communicating worlds for Willie.

    Returns counts [energy false alarm, energy miss, LRT false alarm, LRT miss].
    """
    gains = np.asarray(gains, dtype=float)
    logw = np.asarray(logw, dtype=float)
    means = np.asarray(means, dtype=float)
    counts = np.zeros(4, dtype=np.int64)
    for t in range(start, stop):
        z0 = NoiseSpec(v_silent, _rng.stream(seed, t, _rng.WILLIE_SILENT)).sample(n)
        z1 = NoiseSpec(v_willie, _rng.stream(seed, t, _rng.WILLIE_NOISE)).sample(n)
        if l > 0:
            chips = gen_chips(l, n, 1, _rng.stream(seed, t, _rng.CHIPS))
            parity = (chips.bits + _messages(seed, t, l, random_msgs)[:, None]) & 1
            for k in range(l):
                z1 += gains[k] * (amp * (1.0 - 2.0 * parity[k]))
        counts[0] += float(np.dot(z0, z0)) / n > energy_threshold
        counts[1] += not float(np.dot(z1, z1)) / n > energy_threshold
        counts[2] += mixture_llr(z0, logw, means, mix_var, v_ref) > 0.0
        counts[3] += not mixture_llr(z1, logw, means, mix_var, v_ref) > 0.0
    return counts
