# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-trial loops. Mirrors ``_kernels_py`` draw for draw."""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport sqrt, exp, log
from libc.stdint cimport uint64_t
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal

import numpy as np

from . import _rng

DEF BIT0 = 0
DEF BIT1 = 1
DEF SILENT = 2


cdef inline bitgen_t* _ptr(object bg) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(bg.capsule, "BitGenerator")


cdef inline int _chip(const uint64_t[::1] words, Py_ssize_t row, Py_ssize_t width,
                      Py_ssize_t j) noexcept nogil:
    return <int>((words[row * width + (j >> 6)] >> (j & 63)) & 1)


cdef void _noise(bitgen_t* bg, double variance, double[::1] out) noexcept nogil:
    cdef Py_ssize_t j
    cdef double scale
    if variance == 0.0:
        for j in range(out.shape[0]):
            out[j] = 0.0
        return
    scale = sqrt(variance)
    for j in range(out.shape[0]):
        out[j] = random_standard_normal(bg) * scale


cdef void _fill_chips(bitgen_t* bg, uint64_t[::1] words) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(words.shape[0]):
        words[i] = bg.next_uint64(bg.state)


cdef void _fill_messages(bitgen_t* bg, long long[::1] msg, Py_ssize_t l) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(l):
        msg[k] = <long long>(bg.next_uint64(bg.state) & 1) if bg != NULL else 0


cdef void _signs(const uint64_t[::1] words, Py_ssize_t row, Py_ssize_t width,
                 double[::1] out) noexcept nogil:
    cdef Py_ssize_t j, w, base
    cdef uint64_t word
    for w in range(width):
        word = words[row * width + w]
        base = w * 64
        for j in range(min(64, out.shape[0] - base)):
            out[base + j] = 1.0 - 2.0 * <double>((word >> j) & 1)


cdef void _superpose(double[::1] y, const uint64_t[::1] words, Py_ssize_t width,
                     const long long[::1] msg, Py_ssize_t l, double amp,
                     const double[::1] gains) noexcept nogil:
    cdef Py_ssize_t k, j
    cdef double g, x
    for k in range(l):
        g = gains[k]
        for j in range(y.shape[0]):
            x = amp * (1.0 - 2.0 * <double>((_chip(words, k, width, j) + msg[k]) & 1))
            y[j] += g * x


def decode_chunk(seed, Py_ssize_t start, Py_ssize_t stop, Py_ssize_t n, Py_ssize_t m,
                 Py_ssize_t l, double amp, gains, double v_bob, double theta, bint random_msgs):
    """Return (all-correct trial count, confusion[m, truth, verdict])."""
    cdef Py_ssize_t width = (n + 63) // 64
    cdef uint64_t[::1] words = np.empty(m * width, dtype=np.uint64)
    cdef double[::1] y = np.empty(n)
    cdef double[::1] sgn = np.empty(n)
    cdef long long[::1] msg = np.zeros(max(l, 1), dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(gains, dtype=float)
    confusion_arr = np.zeros((m, 3, 3), dtype=np.int64)
    cdef long long[:, :, ::1] confusion = confusion_arr
    cdef long long ok = 0
    cdef Py_ssize_t t, i, j
    cdef int truth, verdict, all_ok
    cdef double s
    cdef bitgen_t* chip_bg
    cdef bitgen_t* msg_bg
    cdef bitgen_t* noise_bg
    for t in range(start, stop):
        chip_obj = _rng.stream(seed, t, _rng.CHIPS)
        noise_obj = _rng.stream(seed, t, _rng.BOB_NOISE)
        chip_bg = _ptr(chip_obj)
        noise_bg = _ptr(noise_obj)
        msg_bg = NULL
        if random_msgs:
            msg_obj = _rng.stream(seed, t, _rng.MESSAGES)
            msg_bg = _ptr(msg_obj)
        with nogil:
            _fill_chips(chip_bg, words)
            _fill_messages(msg_bg, msg, l)
            _noise(noise_bg, v_bob, y)
            _superpose(y, words, width, msg, l, amp, g)
            all_ok = 1
            for i in range(m):
                _signs(words, i, width, sgn)
                s = 0.0
                for j in range(n):
                    s += sgn[j] * y[j]
                if s >= theta:
                    verdict = BIT0
                elif s <= -theta:
                    verdict = BIT1
                else:
                    verdict = SILENT
                truth = <int>msg[i] if i < l else SILENT
                confusion[i, truth, verdict] += 1
                if verdict != truth:
                    all_ok = 0
            ok += all_ok
    return int(ok), confusion_arr


cdef double _llr(const double[::1] z, const double[::1] logw, const double[::1] means,
                 double mix_var, double v_ref, double[::1] buf) noexcept nogil:
    cdef Py_ssize_t j, c, k = means.shape[0]
    cdef double total = 0.0, peak, acc, d
    cdef double inv_mix = 0.5 / mix_var, inv_ref = 0.5 / v_ref
    cdef double half_log = 0.5 * log(mix_var) - 0.5 * log(v_ref)
    for j in range(z.shape[0]):
        peak = -1e308
        for c in range(k):
            d = z[j] - means[c]
            buf[c] = logw[c] - d * d * inv_mix
            if buf[c] > peak:
                peak = buf[c]
        acc = 0.0
        for c in range(k):
            acc += exp(buf[c] - peak)
        total += peak + log(acc) - half_log + z[j] * z[j] * inv_ref
    return total


cdef double _energy(const double[::1] z) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(z.shape[0]):
        s += z[j] * z[j]
    return s / z.shape[0]


def detect_chunk(seed, Py_ssize_t start, Py_ssize_t stop, Py_ssize_t n, Py_ssize_t l,
                 double amp, gains, double v_willie, double v_silent, logw, means,
                 double mix_var, double v_ref, double energy_threshold, bint random_msgs):
    """Paired silent/communicating worlds for Willie.

    Returns counts [energy false alarm, energy miss, LRT false alarm, LRT miss].
    """
    cdef Py_ssize_t width = (n + 63) // 64
    cdef uint64_t[::1] words = np.empty(max(l, 1) * width, dtype=np.uint64)
    cdef double[::1] z0 = np.empty(n)
    cdef double[::1] z1 = np.empty(n)
    cdef long long[::1] msg = np.zeros(max(l, 1), dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(gains, dtype=float)
    cdef const double[::1] lw = np.ascontiguousarray(logw, dtype=float)
    cdef const double[::1] mu = np.ascontiguousarray(means, dtype=float)
    cdef double[::1] buf = np.empty(mu.shape[0])
    counts_arr = np.zeros(4, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t t
    cdef bitgen_t* chip_bg
    cdef bitgen_t* msg_bg
    cdef bitgen_t* noise_bg
    cdef bitgen_t* silent_bg
    if l > 0:
        words = np.empty(l * width, dtype=np.uint64)
    for t in range(start, stop):
        silent_obj = _rng.stream(seed, t, _rng.WILLIE_SILENT)
        chip_obj = _rng.stream(seed, t, _rng.CHIPS)
        noise_obj = _rng.stream(seed, t, _rng.WILLIE_NOISE)
        silent_bg = _ptr(silent_obj)
        chip_bg = _ptr(chip_obj)
        noise_bg = _ptr(noise_obj)
        msg_bg = NULL
        if random_msgs:
            msg_obj = _rng.stream(seed, t, _rng.MESSAGES)
            msg_bg = _ptr(msg_obj)
        with nogil:
            _noise(silent_bg, v_silent, z0)
            if l > 0:
                _fill_chips(chip_bg, words)
            _fill_messages(msg_bg, msg, l)
            _noise(noise_bg, v_willie, z1)
            _superpose(z1, words, width, msg, l, amp, g)
            counts[0] += _energy(z0) > energy_threshold
            counts[1] += not (_energy(z1) > energy_threshold)
            counts[2] += _llr(z0, lw, mu, mix_var, v_ref, buf) > 0.0
            counts[3] += not (_llr(z1, lw, mu, mix_var, v_ref, buf) > 0.0)
    return counts_arr
