import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covert_ra.params import ChannelParams, ProtocolConfig
from covert_ra.protocol import (ChipMatrix, Verdict, decision_statistic, decision_statistics,
                                decode_p2p, decode_random_access, encode_multibit, encode_p2p,
                                encode_random_access, gen_chips)


def chips_from(rows, u_n=1):
    bits = np.asarray(rows, dtype=np.uint8)
    return ChipMatrix(bits, bits.shape[1] // u_n, u_n)


def test_gen_chips_deterministic_and_binary():
    a, b = gen_chips(1, 8, seed=5), gen_chips(1, 8, seed=5)
    assert np.array_equal(a.bits, b.bits)
    assert set(np.unique(gen_chips(1, 1, seed=2).bits)) <= {0, 1}
    with pytest.raises(ValueError):
        gen_chips(0, 8)


def test_gen_chips_balanced():
    bits = gen_chips(2, 10**5, seed=9).bits
    tol = 4 * 0.5 / math.sqrt(2 * 10**5)
    assert abs(bits.mean() - 0.5) <= tol


def test_encode_sign_rule():
    proto = ProtocolConfig(n=4, m=2, l=1, t_n=4.0)
    chips = chips_from([[0, 1, 0, 1], [1, 1, 0, 0]])
    x0 = encode_random_access(proto, chips, [0], [0]).signals
    x1 = encode_random_access(proto, chips, [0], [1]).signals
    assert np.array_equal(x0[0], [1, -1, 1, -1])
    assert np.array_equal(x1[0], -x0[0])
    assert np.all(x0[1] == 0)


def test_encode_rejects_bad_shapes():
    proto = ProtocolConfig(n=4, m=2, l=1, t_n=4.0)
    chips = chips_from([[0, 1, 0, 1], [1, 1, 0, 0]])
    with pytest.raises(ValueError):
        encode_random_access(proto, chips, [0, 1], [0])
    with pytest.raises(ValueError):
        encode_random_access(proto, chips, [2], [0])


def test_multibit_reduces_and_superposes():
    proto = ProtocolConfig(n=4, m=1, l=1, t_n=4.0)
    single = chips_from([[0, 1, 1, 0]])
    assert np.array_equal(encode_multibit(proto, single, [0], [[1]]).signals,
                          encode_random_access(proto, single, [0], [1]).signals)
    double = chips_from([[0, 1, 1, 0, 0, 0, 1, 1]], u_n=2)
    x = encode_multibit(proto, double, [0], [[0, 0]]).signals[0]
    assert np.array_equal(x, [2.0, 0.0, -2.0, 0.0])


def test_p2p_examples():
    proto = ProtocolConfig(n=4, m=3, l=1, t_n=4.0)
    chips = chips_from([[0, 1, 1, 0], [1, 0, 0, 0], [0, 0, 0, 0]])
    assert np.array_equal(encode_p2p(proto, chips, [1]),
                          encode_random_access(proto, chips, [0], [1]).signals[0])
    even = chips_from([[0, 0, 0, 0], [1, 1, 1, 1], [0, 0, 0, 0]])
    assert np.allclose(encode_p2p(proto, even, [0, 1, 0]), 3.0)


def test_p2p_power_enumerated():
    # E[X_j^2] = t_n l / n, exact over all chip patterns of one column
    l, n, t_n = 6, 1, 3.0
    proto = ProtocolConfig(n=n, m=l, l=l, t_n=t_n)
    msgs = [1, 0, 1, 1, 0, 0]
    vals = [encode_p2p(proto, chips_from(np.array(col)[:, None]), msgs)[0] ** 2
            for col in itertools.product([0, 1], repeat=l)]
    assert np.mean(vals) == pytest.approx(t_n * l / n, rel=1e-14)


def test_p2p_variance_monte_carlo():
    l, n = 5, 20000
    proto = ProtocolConfig(n=n, m=l, l=l, t_n=8.0)
    x = encode_p2p(proto, gen_chips(l, n, seed=4), [0] * l)
    target = proto.t_n * l / n
    se = target * math.sqrt(2.0 / n) * 2
    assert abs(x.var() - target) < 4 * se


def test_decision_statistic_examples():
    n = 16
    proto = ProtocolConfig(n=n, m=1, l=1, t_n=float(n))
    chips = gen_chips(1, n, seed=1)
    for bit, sign in ((0, 1), (1, -1)):
        y = encode_random_access(proto, chips, [0], [bit]).signals[0]
        assert decision_statistic(y, chips.row(0)) == sign * n
    assert decision_statistic(np.zeros(n), chips.row(0)) == 0
    with pytest.raises(ValueError):
        decision_statistic(np.zeros(n - 1), chips.row(0))


def test_decode_three_way():
    proto = ProtocolConfig(n=64, m=4, l=2, t_n=16.0)
    ch = ChannelParams((1.0,), (1.0,), 1.0, 1.0, (0.5, 2.0))
    theta = proto.threshold(1.0)
    out = decode_random_access([0.0, 2 * theta, theta, -theta], proto, ch).verdicts
    assert list(out) == [Verdict.SILENT, Verdict.BIT0, Verdict.BIT0, Verdict.BIT1]
    eps = decode_random_access([np.nextafter(theta, 0)], proto, ch).verdicts
    assert eps[0] == Verdict.SILENT


def test_decode_p2p_sign_rule():
    assert list(decode_p2p([-3.0, 5.0])) == [1, 0]
    assert list(decode_p2p(0.0)) == [1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 200), st.integers(0, 1))
def test_noiseless_round_trip(seed, n, bit):
    proto = ProtocolConfig(n=n, m=3, l=1, t_n=float(n) / 4)
    ch = ChannelParams((1.0,), (1.0,), 1.0, 1.0, (0.5, 2.0))
    chips = gen_chips(3, n, seed=seed)
    y = encode_random_access(proto, chips, [0], [bit]).signals[0]
    assert abs(decision_statistic(y, chips.row(0))) == pytest.approx(math.sqrt(n * proto.t_n))
    assert decode_random_access(decision_statistics(y, chips)[:1], proto, ch).verdicts[0] == bit
    assert decode_p2p(decision_statistic(y, chips.row(0)))[0] == bit


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=3), st.integers(1, 3))
def test_one_time_pad_masks_messages(msgs, n):
    # Over all chip matrices the multiset of transmitted blocks does not depend on the messages.
    l = len(msgs)
    proto = ProtocolConfig(n=n, m=l, l=l, t_n=float(n))

    def law(m):
        blocks = []
        for flat in itertools.product([0, 1], repeat=l * n):
            chips = chips_from(np.array(flat).reshape(l, n))
            blocks.append(encode_random_access(proto, chips, range(l), m).signals.tobytes())
        return sorted(blocks)

    assert law(msgs) == law([1 - b for b in msgs])
