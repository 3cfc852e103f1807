"""Self-contained oracle checks: closed forms against quadrature, grids and enumeration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds, kernels, numerics, simulation
from .params import ChannelParams, ProtocolConfig, Scenario, scaling_family


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: observed={self.observed:.17g} tolerance={self.tolerance:.17g}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


class _Checks:
    """Each check returns (observed error, tolerance); passing means observed <= tolerance."""

    def __init__(self, perturb: dict[str, float]):
        self.perturb = perturb

    def chi2(self, v: float, vp: float) -> float:
        return bounds.chi2_binary_gauss_exact(v, vp) * (1.0 + self.perturb.get("chi2", 0.0))

    def chi2_closed_vs_quadrature(self):
        err = max(_rel(self.chi2(v, vp), numerics.chi2_quadrature(numerics.symbol_mixture([math.sqrt(vp)], v), v + vp))
                  for v, vp in ((1.0, 0.1), (2.0, 0.5)))
        return err, 1e-6

    def chi2_closed_vs_direct(self):
        v, vp = 1.0, 0.5
        root = math.sqrt(v * (v + 2 * vp))
        direct = (v + vp) * (math.exp(vp / (v + 2 * vp)) + math.exp(-vp / v)) / (2 * root) - 1.0
        return _rel(self.chi2(v, vp), direct), 1e-12

    def divergence_chain(self):
        v, vp = 1.0, 0.3
        kl = numerics.kl_mixture_vs_gaussian(numerics.p_vv_mixture(v, vp), 1.0)
        c = self.chi2(v, vp)
        return max(kl - math.log1p(c), math.log1p(c) - c, 0.0), 1e-9

    def beta_optimizer_vs_grid(self):
        proto = ProtocolConfig(n=4096, m=8, l=4, t_n=1024.0)
        ch = ChannelParams((1.0,) * 8, (1.0,) * 8, 1.0, 1.0, (0.5, 2.0))
        beta = bounds.beta_n(proto, ch)
        s_star = proto.threshold(1.0) / (proto.n * 1.0 + proto.l * proto.t_n)
        grid = np.linspace(0.0, 4.0 * s_star, 1_000_001)
        best = float(np.max(grid * proto.threshold(1.0) - bounds.phi_n(grid, proto, ch)))
        return _rel(beta, best), 1e-8

    def beta_above_leading(self):
        proto = scaling_family(4096, 0.25)
        ch = ChannelParams((1.0,), (1.0,), 1.0, 1.0, (0.5, 2.0)).for_senders(proto.m)
        shortfall = 0.9 * bounds.beta_n_leading(proto, ch) - bounds.beta_n(proto, ch)
        return max(shortfall, 0.0), 0.0

    def alpha4_vs_mixture_moments(self):
        v_w, vp = 1.0, 0.4
        mix = numerics.symbol_mixture([math.sqrt(vp)], v_w)
        m2 = mix.variance + float(np.sum(mix.weights * mix.means**2))
        m4 = float(np.sum(mix.weights * (mix.means**4 + 6 * mix.means**2 * mix.variance))) + 3 * mix.variance**2
        return _rel(bounds.alpha4(v_w, vp), m4 / m2**2), 1e-12

    def equal_fading_asymptotic(self):
        l, vp, v_w = 128, 0.5, 1.0
        mix = numerics.symbol_mixture(np.full(l, math.sqrt(vp / l)), v_w)
        chi2 = numerics.chi2_quadrature(mix, v_w + vp)
        ratio = chi2 * 24 * l**2 / (bounds.alpha4(v_w, vp) - 3) ** 2
        return abs(ratio - 1.0), 0.1

    def unequal_fading_soundness(self):
        gains = np.array([0.6, 0.9, 1.1, 1.4, 0.8])
        n = 1024
        mix = numerics.symbol_mixture(gains / math.sqrt(n), 1.0)
        kl = n * numerics.kl_mixture_vs_gaussian(mix, mix.total_variance)
        return max(kl - bounds.kl_block_bound_unequal_fading(gains, n, 1.0), 0.0), 0.0

    def density_ratio_at_zero(self):
        v, vp = 1.0, 0.2
        return _rel(float(numerics.density_ratio(0.0, v, vp)), numerics.density_ratio_at_zero(v, vp)), 1e-8

    def density_ratio_max(self):
        v, vp = 2.0, 0.5
        ext = numerics.density_ratio_extrema(v, vp)
        return max(ext.f_max - numerics.density_ratio_max_bound(v, vp), 0.0), 0.0

    def binomial_collapse_vs_enumeration(self):
        amps = np.full(6, 0.3)
        collapsed = numerics.symbol_mixture(amps, 1.0)
        signs = 1 - 2 * ((np.arange(64)[:, None] >> np.arange(6)) & 1)
        brute_means, counts = np.unique(np.round(signs @ amps, 12), return_counts=True)
        order = np.argsort(collapsed.means)
        err = max(np.max(np.abs(collapsed.means[order] - brute_means)),
                  np.max(np.abs(collapsed.weights[order] - counts / 64.0)))
        return float(err), 1e-12

    def pinsker_ordering(self):
        mix = numerics.p_vv_mixture(1.0, 0.5)
        tv = numerics.tv_quadrature(mix, 1.0)
        kl = numerics.kl_mixture_vs_gaussian(mix, 1.0)
        return max(tv - bounds.tv_from_kl(kl), 0.0), 0.0

    def backend_agreement(self):
        ch = ChannelParams((1.0,) * 4, (1.0,) * 4, 1.0, 1.0, (0.5, 2.0))
        plan = simulation.TrialPlan(40, 11, Scenario(ProtocolConfig(n=512, m=4, l=2, t_n=256.0), ch))
        names = ["python"] + (["cython"] if kernels.compiled_available() else [])
        outs = [simulation.estimate_decode_success(plan, backend=b).confusion for b in names]
        return float(max(np.abs(o - outs[0]).max() for o in outs)), 0.0


CHECK_NAMES = (
    "chi2_closed_vs_quadrature", "chi2_closed_vs_direct", "divergence_chain",
    "beta_optimizer_vs_grid", "beta_above_leading", "alpha4_vs_mixture_moments",
    "equal_fading_asymptotic", "unequal_fading_soundness", "density_ratio_at_zero",
    "density_ratio_max", "binomial_collapse_vs_enumeration", "pinsker_ordering",
    "backend_agreement",
)


def run_checks(perturb: dict[str, float] | None = None,
               on_result: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    checks = _Checks(perturb or {})
    results = []
    for name in CHECK_NAMES:
        observed, tol = getattr(checks, name)()
        res = CheckResult(name, float(observed), float(tol), bool(observed <= tol))
        results.append(res)
        if on_result is not None:
            on_result(res)
    return results
