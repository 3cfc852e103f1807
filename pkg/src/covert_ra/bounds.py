"""Reliability and covertness bounds.

Reliability: Chernoff exponent of the despreading noise and the resulting
lower bound on the probability that Bob decodes every sender correctly.

Covertness: KL bounds on Willie's block observation against the closest
Gaussian silent hypothesis, and the Pinsker conversion to total variation.

The KL formulas are written for the normalisation in which a sender with
Willie gain ``b`` contributes ``b / sqrt(n)`` per chip. The encoder sends
``sqrt(t_n / n)`` per chip, so the (proto, channel) entry points pass
effective gains ``b * sqrt(t_n)``; see :func:`willie_effective_gains`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .params import ChannelParams, ProtocolConfig

LOG2 = math.log(2.0)


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundReport:
    beta_n: float
    beta_n_leading: float
    p_correct_lb: float
    log_log_bound: float
    v_prime: float
    alpha4: float
    chi2_exact: float
    kl_equal_fading: float | None
    kl_unequal_fading: float
    tv_pinsker: float
    poincare_lb: float

    def to_dict(self) -> dict:
        return asdict(self)


# -- cumulant generating functions ------------------------------------------

def cumulant_binary(s):
    """log cosh(s): log1p(2 sinh^2(s/2)) near zero, |s| - log 2 + log1p(exp(-2|s|)) beyond."""
    a = np.abs(np.asarray(s, dtype=float))
    small = a <= 1.0
    out = np.where(small, np.log1p(2.0 * np.sinh(np.where(small, a, 0.0) / 2.0) ** 2),
                   a - LOG2 + np.log1p(np.exp(-2.0 * a)))
    return float(out) if out.ndim == 0 else out


def cumulant_gauss(s, v: float):
    out = v * np.square(np.asarray(s, dtype=float)) / 2.0
    return float(out) if out.ndim == 0 else out


def phi_n(s, proto: ProtocolConfig, channel: ChannelParams):
    """Cumulant bound of the despread noise: Gaussian part plus ``l`` BPSK interferers at gain a_max."""
    gauss = cumulant_gauss(s, proto.n * channel.v_bob)
    if proto.l == 0:
        return gauss
    x = channel.a_max * np.asarray(s, dtype=float) * proto.amplitude
    return gauss + proto.l * proto.n * cumulant_binary(x)


# -- reliability -------------------------------------------------------------

def _beta_objective(proto: ProtocolConfig, channel: ChannelParams):
    theta = proto.threshold(channel.a_min)
    return lambda s: theta * s - phi_n(s, proto, channel)


def beta_n(proto: ProtocolConfig, channel: ChannelParams, tol: float = 1e-10) -> float:
    """sup_s [s theta - phi_n(s)] by golden-section search on a bracket grown from the Gaussian maximiser."""
    obj = _beta_objective(proto, channel)
    theta = proto.threshold(channel.a_min)
    curvature = proto.n * channel.v_bob + proto.l * channel.a_max**2 * proto.t_n
    s_mid = theta / curvature
    f_mid = obj(s_mid)
    s_hi = 2.0 * s_mid
    for _ in range(200):
        if obj(s_hi) < f_mid:
            break
        s_mid, f_mid, s_hi = s_hi, obj(s_hi), 2.0 * s_hi
    else:
        raise OptimizerError("could not bracket the Chernoff exponent maximiser")
    res = optimize.minimize_scalar(lambda s: -obj(s), bracket=(0.0, s_mid, s_hi),
                                   method="golden", tol=tol)
    if not res.success:
        raise OptimizerError(f"golden-section search failed: {res.message}")
    return max(float(-res.fun), f_mid, 0.0)


def beta_n_leading(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """Leading term t_n a_min^2 / (8 (v_B + a_max^2)), exact when l t_n = n and BPSK is replaced by Gaussian."""
    return proto.t_n * channel.a_min**2 / (8.0 * (channel.v_bob + channel.a_max**2))


def beta_n_gaussian(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """Quadratic-cumulant exponent theta^2 / (2 (n v_B + l a_max^2 t_n)) for any l."""
    theta = proto.threshold(channel.a_min)
    return theta**2 / (2.0 * (proto.n * channel.v_bob + proto.l * channel.a_max**2 * proto.t_n))


def p_correct_from_beta(beta: float, m: int) -> tuple[float, bool]:
    """(1 - 2 e^-beta)^m and a flag set when 2 e^-beta >= 1 makes the bound vacuous."""
    q = 2.0 * math.exp(-beta)
    if q >= 1.0:
        return 0.0, True
    return min(1.0, max(0.0, math.exp(m * math.log1p(-q)))), False


def p_correct_lower_bound(proto: ProtocolConfig, channel: ChannelParams) -> float:
    return p_correct_from_beta(beta_n(proto, channel), proto.m)[0]


def log_log_bound(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """Leading part of the bound on log(-log P_n)."""
    exponent = proto.n * channel.a_min**2 / (8.0 * proto.l * (channel.v_bob + channel.a_max**2))
    return -exponent + math.log(proto.m) + LOG2


# -- single-sender divergences ----------------------------------------------

def chi2_binary_gauss_exact(v: float, vp: float) -> float:
    """chi^2 between the unit-variance BPSK-plus-noise law P_{v,v'} and N(0, 1).

    Closed form (v+v')(e^{v'/(v+2v')} + e^{-v'/v}) / (2 sqrt(v(v+2v'))) - 1,
    rearranged so that the O(1) and O(v'/v) parts cancel analytically.
    """
    if not v > 0 or vp < 0:
        raise ValueError(f"need v > 0 and vp >= 0, got v={v}, vp={vp}")
    if vp == 0:
        return 0.0
    root = math.sqrt(v * (v + 2.0 * vp))
    half = (v + vp) / (2.0 * root)
    # 2*half - 1 without cancellation
    excess = vp * vp / (root * ((v + vp) + root))
    a = vp / (v + 2.0 * vp)
    b = vp / v
    a_minus_b = -2.0 * vp * vp / (v * (v + 2.0 * vp))
    tails = _expm1_minus_x(a) + _expm1_minus_x(-b)
    return max(0.0, half * (a_minus_b + tails) + excess)


def _expm1_minus_x(x: float) -> float:
    if abs(x) >= 0.1:
        return math.expm1(x) - x
    term, total = x * x / 2.0, 0.0
    for k in range(3, 30):
        total += term
        term *= x / k
        if abs(term) < 1e-18 * abs(total):
            break
    return total


def chi2_taylor_leading(v: float, vp: float) -> float:
    """(1/6)(v'/v)^3, the small-ratio term as stated in the source derivation.

    The true expansion of :func:`chi2_binary_gauss_exact` starts at
    (1/6)(v'/v)^4; see :func:`chi2_taylor_quartic`.
    """
    return (vp / v) ** 3 / 6.0


def chi2_taylor_quartic(v: float, vp: float) -> float:
    """(1/6)(v'/v)^4, the actual leading term (kappa_4^2 / 24 with kappa_4 = -2 (v'/(v+v'))^2)."""
    return (vp / v) ** 4 / 6.0


class DivergenceChain(NamedTuple):
    kl_upper: float
    renyi2: float
    log1p_chi2: float
    chi2: float


def divergence_chain(v: float, vp: float) -> DivergenceChain:
    """D <= D_2 = log(1 + chi^2) <= chi^2 for P_{v,v'} against N(0, 1)."""
    chi2 = chi2_binary_gauss_exact(v, vp)
    d2 = math.log1p(chi2)
    if d2 > chi2:
        raise ArithmeticError("log1p(chi2) exceeded chi2")
    return DivergenceChain(d2, d2, d2, chi2)


def alpha4(v_w: float, vp: float) -> float:
    """Fourth moment of the standardised per-sender symbol: 3 - 2 v'^2 / (v_W + v')^2."""
    return 3.0 - 2.0 * vp**2 / (v_w + vp) ** 2


def poincare_lower_bound(v: float, vp: float) -> float:
    """Lower bound exp(-(v' + v) / (2 v)) on the Poincare constant of P_{v,v'}."""
    return math.exp(-(vp + v) / (2.0 * v))


# -- block covertness bounds -------------------------------------------------

def kl_block_bound_equal_fading(n: int, t_n: float, b: float, v_w: float) -> float:
    """Leading term b^8 / (6 n t_n^2 (v_W + b^2/t_n)^4); omits O(t_n^3 / n^2)."""
    return b**8 / (6.0 * n * t_n**2 * (v_w + b**2 / t_n) ** 4)


def kl_block_bound_unequal_fading(b_list: Sequence[float], n: int, v_w: float) -> float:
    """Poincare-constant bound on the block KL for arbitrary gains, with v' = sum b^2 / n."""
    b = np.asarray(b_list, dtype=float)
    if b.size == 0 or not np.all(b > 0):
        raise ValueError("gains must be non-empty and strictly positive")
    if not v_w > 0:
        raise ValueError(f"v_w must be positive, got {v_w}")
    vp = float(np.sum(b**2)) / n
    s4 = float(np.sum(b**4))
    chi2 = chi2_binary_gauss_exact(v_w, vp)
    c = poincare_lower_bound(v_w, vp)
    num = s4 / (n * vp**2) * chi2
    den = c / 2.0 + (1.0 - c / 2.0) * s4 / (n**2 * vp**2)
    return num / den


def kl_weighted_sum_bound(alpha_list: Sequence[float], kl_single: float, poincare_c: float) -> float:
    """KL of sum alpha_i U_i against N(0,1) given KL of U and a Poincare constant lower bound."""
    a = np.asarray(alpha_list, dtype=float)
    if abs(float(np.sum(a**2)) - 1.0) > 1e-12:
        raise ValueError("weights must satisfy sum alpha^2 = 1")
    lam = float(np.sum(a**4))
    return lam / (poincare_c / 2.0 + (1.0 - poincare_c / 2.0) * lam) * kl_single


def tv_from_kl(kl: float) -> float:
    """Pinsker: d_V <= sqrt(D / 2)."""
    return math.sqrt(max(kl, 0.0) / 2.0)


def willie_effective_gains(proto: ProtocolConfig, channel: ChannelParams) -> np.ndarray:
    """Active senders' Willie gains rescaled so that b_eff / sqrt(n) is the per-chip amplitude."""
    return np.asarray(channel.willie_gains[:proto.l], dtype=float) * math.sqrt(proto.t_n)


def v_prime(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """Signal variance at Willie per channel use, sum_k b_k^2 t_n / n."""
    return float(np.sum(willie_effective_gains(proto, channel) ** 2)) / proto.n


def is_equal_fading(proto: ProtocolConfig, channel: ChannelParams) -> bool:
    active = channel.willie_gains[:proto.l]
    return min(active) == max(active)


def kl_equal_fading_for(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """Equal-gain block KL leading term for the actual encoder.

    Equals n (alpha4 - 3)^2 / (24 l^2); coincides with the textbook form when l t_n = n.
    """
    b_eff = float(willie_effective_gains(proto, channel)[0])
    return kl_block_bound_equal_fading(proto.n, proto.n / proto.l, b_eff, channel.v_willie)


def kl_unequal_fading_for(proto: ProtocolConfig, channel: ChannelParams) -> float:
    return kl_block_bound_unequal_fading(willie_effective_gains(proto, channel), proto.n,
                                         channel.v_willie)


def covertness_kl_bound(proto: ProtocolConfig, channel: ChannelParams) -> float:
    if is_equal_fading(proto, channel):
        return kl_equal_fading_for(proto, channel)
    return kl_unequal_fading_for(proto, channel)


def covertness_tv_bound(proto: ProtocolConfig, channel: ChannelParams) -> float:
    """Pinsker bound on min_v d_V(P_{Z,M}, G_v^n x P_M).

    The message-secrecy term d_V(P_{Z,M}, P_Z x P_M) is identically zero because
    the chips one-time-pad every message bit, so only the Gaussian-fit term remains.
    """
    return tv_from_kl(covertness_kl_bound(proto, channel))


def bound_report(proto: ProtocolConfig, channel: ChannelParams) -> tuple[BoundReport, dict]:
    """All analytic quantities for one configuration plus diagnostic flags."""
    beta = beta_n(proto, channel)
    p_lb, vacuous = p_correct_from_beta(beta, proto.m)
    vp = v_prime(proto, channel)
    equal = is_equal_fading(proto, channel)
    kl_eq = kl_equal_fading_for(proto, channel) if equal else None
    kl_uneq = kl_unequal_fading_for(proto, channel)
    report = BoundReport(
        beta_n=beta,
        beta_n_leading=beta_n_leading(proto, channel),
        p_correct_lb=p_lb,
        log_log_bound=log_log_bound(proto, channel),
        v_prime=vp,
        alpha4=alpha4(channel.v_willie, vp),
        chi2_exact=chi2_binary_gauss_exact(channel.v_willie, vp),
        kl_equal_fading=kl_eq,
        kl_unequal_fading=kl_uneq,
        tv_pinsker=tv_from_kl(kl_eq if equal else kl_uneq),
        poincare_lb=poincare_lower_bound(channel.v_willie, vp),
    )
    lo, hi = channel.willie_variance_interval
    flags = {
        "p_correct_vacuous": vacuous,
        "kl_path": "equal_fading" if equal else "unequal_fading",
        "beta_n_gaussian": beta_n_gaussian(proto, channel),
        "matched_variance_in_interval": lo < channel.v_willie + vp < hi,
    }
    return report, flags
