"""Monte Carlo estimates of Bob's decoding success and Willie's detection errors."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import bounds, kernels, numerics
from ._kernels_py import mixture_llr
from .params import ChannelParams, ProtocolConfig, Scenario, scaling_family

CHUNK_TRIALS = 64
Z95 = 1.959963984540054

SWEEP_COLUMNS = (
    "n", "m", "l", "t_n", "beta_n", "p_lb", "mc_success", "mc_ci", "kl_acs", "kl_nm",
    "kl_numeric", "tv_pinsker", "tv_numeric", "eps_sum_energy", "eps_sum_lrt",
)


class Decision(enum.IntEnum):
    SILENT = 0
    COMMUNICATING = 1


@dataclass(frozen=True)
class TrialPlan:
    """What to simulate and with which master seed.

    ``silent_variance`` is the noise variance of Willie's silent world; by
    default the moment-matched v_W + v', pulled inside the variance interval.
    """

    trials: int
    master_seed: int
    scenario: Scenario
    message_mode: str = "uniform"
    threshold: float | None = None
    silent_variance: float | None = None
    false_alarm_target: float = 0.05

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if self.message_mode not in ("uniform", "fixed"):
            raise ValueError(f"message_mode must be 'uniform' or 'fixed', got {self.message_mode!r}")


@dataclass(frozen=True)
class DecodeEstimate:
    success_rate: float
    ci_halfwidth: float
    successes: int
    trials: int
    confusion: np.ndarray

    @property
    def sender_error_rates(self) -> np.ndarray:
        """Per-sender fraction of trials decoded wrongly."""
        diag = np.trace(self.confusion, axis1=1, axis2=2)
        return 1.0 - diag / self.trials


@dataclass(frozen=True)
class DetectionResult:
    eps1: float
    eps2: float
    ci_halfwidth: float
    detector_id: str
    tv_lifted: float = 1.0

    @property
    def error_sum(self) -> float:
        return self.eps1 + self.eps2

    def consistent_with_tv(self, slack: float = 3.0) -> bool:
        """Whether eps1 + eps2 >= 1 - d_V - slack * ci holds for the estimate."""
        return self.error_sum >= 1.0 - self.tv_lifted - slack * self.ci_halfwidth


def binomial_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval; Clopper-Pearson when either count is below 5."""
    p = successes / trials
    if min(successes, trials - successes) < 5:
        alpha = 1.0 - level
        lo = stats.beta.ppf(alpha / 2, successes, trials - successes + 1) if successes else 0.0
        hi = stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes) \
            if successes < trials else 1.0
        return float(lo), float(hi)
    z = stats.norm.ppf(0.5 + level / 2)
    half = z * math.sqrt(p * (1 - p) / trials)
    return p - half, p + half


def ci_halfwidth(successes: int, trials: int, level: float = 0.95) -> float:
    lo, hi = binomial_ci(successes, trials, level)
    p = successes / trials
    return max(p - lo, hi - p)


def expand_multibit(proto: ProtocolConfig, channel: ChannelParams) -> tuple[ProtocolConfig, ChannelParams]:
    """Map u bits per sender onto u virtual single-bit senders sharing that sender's gains."""
    u = proto.bits_per_sender
    if u == 1:
        return proto, channel
    rep = lambda g: tuple(np.repeat(np.asarray(g[:proto.m], dtype=float), u))
    virt = ProtocolConfig(n=proto.n, m=proto.m * u, l=proto.l * u, t_n=proto.t_n)
    ch = ChannelParams(rep(channel.bob_gains), rep(channel.willie_gains), channel.v_bob,
                       channel.v_willie, channel.willie_variance_interval)
    return virt, ch


def _chunks(trials: int, size: int = CHUNK_TRIALS):
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


def _map_chunks(work: Callable, trials: int, threads: int):
    spans = _chunks(trials)
    if threads <= 1 or len(spans) == 1:
        return [work(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda span: work(*span), spans))


def estimate_decode_success(plan: TrialPlan, threads: int = 1, backend: str | None = None) -> DecodeEstimate:
    """Fraction of trials in which every sender's verdict (bit or silent) is right.

    The first ``l`` senders are active. Counts do not depend on ``threads``.
    """
    proto, channel = expand_multibit(plan.scenario.proto, plan.scenario.channel)
    kern = kernels.get_backend(backend)
    theta = proto.threshold(channel.a_min) if plan.threshold is None else plan.threshold
    gains = np.asarray(channel.bob_gains[:proto.m], dtype=float)
    random_msgs = plan.message_mode == "uniform"

    def work(a, b):
        return kern.decode_chunk(plan.master_seed, a, b, proto.n, proto.m, proto.l,
                                 proto.amplitude, gains, channel.v_bob, theta, random_msgs)

    parts = _map_chunks(work, plan.trials, threads)
    ok = sum(p[0] for p in parts)
    confusion = np.sum([p[1] for p in parts], axis=0)
    return DecodeEstimate(ok / plan.trials, ci_halfwidth(ok, plan.trials), ok, plan.trials, confusion)


def energy_gamma(n: int, target: float = 0.05) -> float:
    """Margin gamma with P(mean(z^2) > v (1 + gamma sqrt(2/n))) = target under N(0, v)."""
    return (stats.chi2.isf(target, n) / n - 1.0) / math.sqrt(2.0 / n)


def energy_threshold(n: int, interval: tuple[float, float], gamma: float) -> float:
    return interval[1] * (1.0 + gamma * math.sqrt(2.0 / n))


def willie_energy_detector(samples, interval: tuple[float, float], gamma: float | None = None,
                           target: float = 0.05) -> Decision:
    """Communicating when the mean energy exceeds the largest plausible noise variance by a margin."""
    z = np.asarray(samples, dtype=float)
    g = energy_gamma(z.size, target) if gamma is None else gamma
    return Decision(float(np.dot(z, z)) / z.size > energy_threshold(z.size, interval, g))


def willie_lrt_detector(samples, mixture: numerics.GaussianMixture, v_ref: float) -> Decision:
    """Genie likelihood-ratio test: i.i.d. ``mixture`` against N(0, v_ref)."""
    z = np.asarray(samples, dtype=float)
    return Decision(mixture_llr(z, mixture._logw, mixture.means, mixture.variance, v_ref) > 0.0)


def default_silent_variance(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """v_W + v' clamped into the open variance interval."""
    lo, hi = channel.willie_variance_interval
    eps = 1e-6 * (hi - lo)
    return min(max(channel.v_willie + bounds.v_prime(proto, channel), lo + eps), hi - eps)


def _error_sum_halfwidth(c1: int, c2: int, trials: int) -> float:
    if min(c1, trials - c1, c2, trials - c2) < 5:
        return ci_halfwidth(c1, trials) + ci_halfwidth(c2, trials)
    p1, p2 = c1 / trials, c2 / trials
    return Z95 * math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / trials)


def estimate_detection(plan: TrialPlan, threads: int = 1, backend: str | None = None,
                       tv_lifted: float | None = None) -> dict[str, DetectionResult]:
    """Paired silent/communicating trials scored by the energy and LRT detectors.

    ``tv_lifted`` defaults to min(1, n * per-symbol TV) against the silent law.
    """
    proto, channel = expand_multibit(plan.scenario.proto, plan.scenario.channel)
    kern = kernels.get_backend(backend)
    mix = numerics.willie_symbol_mixture(proto, channel)
    v_silent = plan.silent_variance or default_silent_variance(proto, channel)
    thr = energy_threshold(proto.n, channel.willie_variance_interval,
                           energy_gamma(proto.n, plan.false_alarm_target))
    gains = np.asarray(channel.willie_gains[:proto.l], dtype=float)
    random_msgs = plan.message_mode == "uniform"

    def work(a, b):
        return kern.detect_chunk(plan.master_seed, a, b, proto.n, proto.l, proto.amplitude, gains,
                                 channel.v_willie, v_silent, mix._logw, mix.means, mix.variance,
                                 v_silent, thr, random_msgs)

    counts = np.sum(_map_chunks(work, plan.trials, threads), axis=0)
    if tv_lifted is None:
        tv_lifted = min(1.0, proto.n * numerics.tv_quadrature(mix, v_silent))
    n_t = plan.trials
    out = {}
    for name, (fa, miss) in (("energy", counts[0:2]), ("lrt", counts[2:4])):
        out[name] = DetectionResult(int(fa) / n_t, int(miss) / n_t, _error_sum_halfwidth(int(fa), int(miss), n_t),
                                    name, tv_lifted)
    return out


def estimate_detection_error_sum(plan: TrialPlan, detector: str = "lrt", threads: int = 1,
                                 backend: str | None = None) -> DetectionResult:
    results = estimate_detection(plan, threads, backend)
    if detector not in results:
        raise ValueError(f"unknown detector {detector!r}")
    return results[detector]


def sweep_row(proto: ProtocolConfig, channel: ChannelParams, trials: int, master_seed: int,
              threads: int = 1, detection: bool = True) -> dict:
    """One line of a scaling sweep: bounds, numeric divergences and Monte Carlo columns."""
    channel = channel.for_senders(proto.m)
    report, _ = bounds.bound_report(proto, channel)
    scenario = Scenario(proto, channel, master_seed)
    plan = TrialPlan(trials, master_seed, scenario)
    dec = estimate_decode_success(plan, threads)
    mix = numerics.willie_symbol_mixture(proto, channel)
    v_silent = default_silent_variance(proto, channel)
    kl_sym = numerics.kl_mixture_vs_gaussian(mix, channel.v_willie + report.v_prime)
    tv_num = min(1.0, proto.n * numerics.tv_quadrature(mix, v_silent))
    row = {
        "n": proto.n, "m": proto.m, "l": proto.l, "t_n": proto.t_n,
        "beta_n": report.beta_n, "p_lb": report.p_correct_lb,
        "mc_success": dec.success_rate, "mc_ci": dec.ci_halfwidth,
        "kl_acs": math.nan if report.kl_equal_fading is None else report.kl_equal_fading,
        "kl_nm": report.kl_unequal_fading, "kl_numeric": proto.n * kl_sym,
        "tv_pinsker": report.tv_pinsker, "tv_numeric": tv_num,
        "eps_sum_energy": math.nan, "eps_sum_lrt": math.nan,
    }
    if detection:
        det = estimate_detection(plan, threads, tv_lifted=tv_num)
        row["eps_sum_energy"] = det["energy"].error_sum
        row["eps_sum_lrt"] = det["lrt"].error_sum
    return row


def run_sweep(n_grid: Sequence[int], c: float, channel: ChannelParams, trials: int, master_seed: int,
              m: int | None = None, mode: str = "inverse_log", threads: int = 1,
              detection: bool = True) -> list[dict]:
    """Scaling-family sweep with l = c n / log n and t_n = n / l."""
    return [sweep_row(scaling_family(n, c, m, mode), channel, trials, master_seed, threads, detection)
            for n in n_grid]


def with_trials(plan: TrialPlan, trials: int) -> TrialPlan:
    return replace(plan, trials=trials)
