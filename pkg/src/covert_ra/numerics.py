"""Willie's per-symbol output law and numerically integrated divergences."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .params import ChannelParams, ProtocolConfig

MAX_ENUMERATED_SENDERS = 20
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of Gaussians sharing one variance."""

    weights: np.ndarray
    means: np.ndarray
    variance: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        mu = np.asarray(self.means, dtype=float).reshape(-1)
        if w.shape != mu.shape or w.size == 0:
            raise ValueError("weights and means must be non-empty and of equal length")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("weights must be a probability vector")
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "_logw", np.log(w, where=w > 0, out=np.full_like(w, -np.inf)))

    @property
    def mean(self) -> float:
        return math.fsum(self.weights * self.means)

    @property
    def total_variance(self) -> float:
        return self.variance + math.fsum(self.weights * self.means**2) - self.mean**2

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        d = x[..., None] - self.means
        terms = self._logw - d * d / (2.0 * self.variance)
        return special.logsumexp(terms, axis=-1) - _HALF_LOG_2PI - 0.5 * math.log(self.variance)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def span(self) -> tuple[float, float]:
        return float(self.means.min()), float(self.means.max())


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration window half-width in standard deviations and tolerances."""

    width: float = 12.0
    epsabs: float = 1e-18
    epsrel: float = 1e-10
    limit: int = 200

    def __post_init__(self):
        if not (self.width > 0 and self.epsabs > 0 and self.epsrel > 0 and self.limit > 0):
            raise ValueError("quadrature tolerances and width must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


def symbol_mixture(amplitudes: Sequence[float], variance: float) -> GaussianMixture:
    """Law of N(0, variance) + sum_k a_k s_k with independent uniform signs s_k.

    Identical amplitudes collapse to a binomial; otherwise all 2^l sign
    patterns are enumerated and only bit-identical means are merged.
    """
    amps = np.asarray(amplitudes, dtype=float)
    l = amps.size
    if l == 0:
        return GaussianMixture(np.ones(1), np.zeros(1), variance)
    if np.all(amps == amps[0]):
        k = np.arange(l + 1)
        weights = np.exp(special.gammaln(l + 1) - special.gammaln(k + 1)
                         - special.gammaln(l - k + 1) - l * math.log(2.0))
        weights /= math.fsum(weights)
        return GaussianMixture(weights, amps[0] * (l - 2.0 * k), variance)
    if l > MAX_ENUMERATED_SENDERS:
        raise ValueError(f"{l} unequal gains exceed the enumeration limit {MAX_ENUMERATED_SENDERS}")
    means = np.zeros(1)
    for a in amps:
        means = np.concatenate([means + a, means - a])
    uniq, counts = np.unique(means, return_counts=True)
    return GaussianMixture(counts / float(2**l), uniq, variance)


def willie_symbol_mixture(proto: ProtocolConfig, channel: ChannelParams) -> GaussianMixture:
    """Per-use law of Z_j: active senders' b_k sqrt(t_n/n) signs plus N(0, v_W)."""
    amps = np.asarray(channel.willie_gains[:proto.l], dtype=float) * proto.amplitude
    return symbol_mixture(amps, channel.v_willie)


def p_vv_mixture(v: float, vp: float) -> GaussianMixture:
    """Unit-variance law of sqrt(v'/(v'+v)) ((-1)^X + sqrt(v/v') N)."""
    if not v > 0 or vp < 0:
        raise ValueError(f"need v > 0 and vp >= 0, got v={v}, vp={vp}")
    mu = math.sqrt(vp / (vp + v))
    return GaussianMixture(np.array([0.5, 0.5]), np.array([-mu, mu]), v / (v + vp))


def density_p_vv(x, v: float, vp: float):
    return p_vv_mixture(v, vp).pdf(x)


def _gauss_logpdf(x, v: float):
    return -np.square(x) / (2.0 * v) - _HALF_LOG_2PI - 0.5 * math.log(v)


def _kl_kernel(u: float) -> float:
    """u e^u - (e^u - 1), the KL integrand divided by the reference density."""
    if abs(u) < 1e-3:
        return u * u * (0.5 + u * (1.0 / 3.0 + u * (0.125 + u / 30.0)))
    return u * math.exp(u) - math.expm1(u)


def _integrate(func, mix: GaussianMixture, v_ref: float, spec: QuadratureSpec) -> float:
    sigma = math.sqrt(mix.variance)
    lo, hi = mix.span()
    left = min(lo - spec.width * sigma, -spec.width * math.sqrt(v_ref))
    right = max(hi + spec.width * sigma, spec.width * math.sqrt(v_ref))
    step = 2.0 * min(sigma, math.sqrt(v_ref))
    edges = np.linspace(left, right, max(2, int(math.ceil((right - left) / step))) + 1)
    parts = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            val, _, info, *rest = integrate.quad(func, a, b, epsabs=spec.epsabs,
                                                 epsrel=spec.epsrel, limit=spec.limit,
                                                 full_output=1)
            if info.get("last", 0) >= spec.limit and rest and "maximum number" in str(rest[0]):
                raise QuadratureError(f"quadrature did not converge on [{a}, {b}]")
            parts.append(val)
    return math.fsum(parts)


def _log_terms(mix: GaussianMixture, v_ref: float):
    """Scalar (log p(x), log g(x)) without the array overhead of ``logpdf``."""
    means, logw = mix.means, mix._logw
    inv_mix = 0.5 / mix.variance
    c_mix = -_HALF_LOG_2PI - 0.5 * math.log(mix.variance)
    c_ref = -_HALF_LOG_2PI - 0.5 * math.log(v_ref)
    inv_ref = 0.5 / v_ref
    single = means.size == 1

    def terms(x: float):
        if single:
            d = x - means[0]
            lp = c_mix - d * d * inv_mix
        else:
            t = logw - np.square(x - means) * inv_mix
            peak = t.max()
            lp = c_mix + float(peak) + math.log(float(np.exp(t - peak).sum()))
        return lp, c_ref - x * x * inv_ref
    return terms


def kl_mixture_vs_gaussian(mix: GaussianMixture, v_ref: float,
                           spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """D(mix || N(0, v_ref)) by adaptive quadrature."""
    if not v_ref > 0:
        raise ValueError(f"v_ref must be positive, got {v_ref}")
    terms = _log_terms(mix, v_ref)

    def integrand(x):
        lp, lg = terms(x)
        return math.exp(lg) * _kl_kernel(lp - lg) if lp - lg < 700 else math.exp(lp) * (lp - lg)

    return _integrate(integrand, mix, v_ref, spec)


def chi2_quadrature(mix: GaussianMixture, v_ref: float,
                    spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """int (p - g)^2 / g."""
    if not v_ref > 0:
        raise ValueError(f"v_ref must be positive, got {v_ref}")
    terms = _log_terms(mix, v_ref)

    def integrand(x):
        lp, lg = terms(x)
        r = math.expm1(lp - lg) if lp - lg < 700 else math.inf
        if r == 0.0:
            return 0.0
        return math.exp(lg + 2.0 * math.log(abs(r))) if math.isfinite(r) else math.exp(2 * lp - lg)

    return _integrate(integrand, mix, v_ref, spec)


def tv_quadrature(mix: GaussianMixture, v_ref: float,
                  spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """(1/2) int |p - g|."""
    if not v_ref > 0:
        raise ValueError(f"v_ref must be positive, got {v_ref}")
    terms = _log_terms(mix, v_ref)

    def integrand(x):
        lp, lg = terms(x)
        return 0.5 * abs(math.exp(lp) - math.exp(lg)) if abs(lp - lg) > 1e-3 else \
            0.5 * math.exp(lg) * abs(math.expm1(lp - lg))

    return min(1.0, _integrate(integrand, mix, v_ref, spec))


def min_tv_over_gaussian(mix: GaussianMixture, interval: tuple[float, float],
                         spec: QuadratureSpec = DEFAULT_QUADRATURE) -> tuple[float, float]:
    """argmin and min over v in the open interval of d_V(mix, N(0, v)).

    The moment-matched variance is always tried as a candidate, so the result
    never exceeds its TV when it lies inside the interval.
    """
    lo, hi = interval
    if not hi > lo:
        raise ValueError(f"empty variance interval ({lo}, {hi})")
    eps = 1e-6 * (hi - lo)
    a, b = lo + eps, hi - eps
    res = optimize.minimize_scalar(lambda v: tv_quadrature(mix, v, spec), bounds=(a, b),
                                   method="bounded", options={"xatol": 1e-9 * (b - a)})
    best = (float(res.x), float(res.fun))
    matched = mix.total_variance
    if a <= matched <= b:
        tv_matched = tv_quadrature(mix, matched, spec)
        if tv_matched <= best[1]:
            best = (matched, tv_matched)
    return best


class RatioExtrema(NamedTuple):
    f_min: float
    f_max: float
    x_argmax: float


def density_ratio(x, v: float, vp: float):
    """p_{v,v'}(x) / phi(x) with phi the standard normal density."""
    x = np.asarray(x, dtype=float)
    return np.exp(p_vv_mixture(v, vp).logpdf(x) - _gauss_logpdf(x, 1.0))


def density_ratio_extrema(v: float, vp: float, grid_points: int = 20001) -> RatioExtrema:
    """Extrema of p_{v,v'}/phi on x >= 0.

    The ratio rises from x = 0 to a single interior maximum and then decays to
    zero, so ``f_min`` is the minimum over [0, x_argmax] (attained at 0).
    """
    if vp == 0:
        return RatioExtrema(1.0, 1.0, 0.0)
    reach = math.sqrt((vp + v) / vp)
    xs = np.linspace(0.0, reach, grid_points)
    fs = density_ratio(xs, v, vp)
    interior = np.flatnonzero((fs[1:-1] > fs[:-2]) & (fs[1:-1] >= fs[2:])) + 1
    if interior.size != 1:
        raise RuntimeError(f"expected one interior maximum of the density ratio, found {interior.size}")
    k = int(interior[0])
    res = optimize.minimize_scalar(lambda x: -float(density_ratio(x, v, vp)),
                                   bounds=(xs[k - 1], xs[k + 1]), method="bounded",
                                   options={"xatol": 1e-12})
    if not res.success:
        raise RuntimeError(f"density ratio maximisation failed: {res.message}")
    f_min = float(fs[: k + 1].min())
    return RatioExtrema(f_min, float(-res.fun), float(res.x))


def density_ratio_at_zero(v: float, vp: float) -> float:
    """Closed form sqrt((v'+v)/v) e^{-v'/(2v)}."""
    return math.sqrt((vp + v) / v) * math.exp(-vp / (2.0 * v))


def density_ratio_max_bound(v: float, vp: float) -> float:
    return math.sqrt((vp + v) / v) * math.exp(0.5)
