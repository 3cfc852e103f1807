import numpy as np
import pytest

from covert_ra import _kernels_py, kernels
from covert_ra import numerics as N
from covert_ra.params import ChannelParams, ProtocolConfig, Scenario
from covert_ra import simulation as S

needs_compiled = pytest.mark.skipif(not kernels.compiled_available(), reason="extension not built")


def test_backend_lookup():
    assert kernels.get_backend("python") is _kernels_py
    assert kernels.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("n, m, l, mode", [(100, 3, 2, "uniform"), (257, 5, 5, "fixed"), (1024, 6, 0, "uniform")])
def test_decode_backends_agree(n, m, l, mode):
    gains = tuple(np.linspace(0.8, 1.2, m))
    ch = ChannelParams(gains, gains, 1.0, 1.0, (0.5, 2.0))
    p = S.TrialPlan(130, 9, Scenario(ProtocolConfig(n=n, m=m, l=l, t_n=n / max(l, 1) / 2), ch),
                    message_mode=mode)
    a = S.estimate_decode_success(p, backend="python")
    b = S.estimate_decode_success(p, backend="cython")
    assert np.array_equal(a.confusion, b.confusion) and a.successes == b.successes


@needs_compiled
def test_noise_bit_identical_across_backends():
    # zero threshold and no signal: verdict signs expose the raw despread noise
    ch = ChannelParams((1.0,) * 2, (1.0,) * 2, 1.0, 1.0, (0.5, 2.0))
    args = (3, 0, 5, 64, 2, 0, 0.1, np.ones(2), 1.0, 0.0, True)
    assert np.array_equal(_kernels_py.decode_chunk(*args)[1], kernels.get_backend("cython").decode_chunk(*args)[1])


@needs_compiled
@pytest.mark.parametrize("amps", [[0.5, 0.5, 0.5], [0.3, 0.9]])
def test_detect_backends_agree(amps):
    l = len(amps)
    gains = tuple(amps) + (1.0,)
    ch = ChannelParams(gains, gains, 1.0, 1.0, (0.5, 2.0))
    p = S.TrialPlan(150, 2, Scenario(ProtocolConfig(n=512, m=l + 1, l=l, t_n=64.0), ch))
    a = S.estimate_detection(p, backend="python", tv_lifted=1.0)
    b = S.estimate_detection(p, backend="cython", tv_lifted=1.0)
    assert a == b


def test_python_llr_matches_mixture_logpdf():
    mix = N.symbol_mixture([0.2, 0.7], 1.3)
    z = np.linspace(-3, 3, 17)
    llr = _kernels_py.mixture_llr(z, mix._logw, mix.means, mix.variance, 2.0)
    ref = np.sum(mix.logpdf(z) + z * z / 4.0 + 0.5 * np.log(2 * np.pi * 2.0))
    assert llr == pytest.approx(ref, rel=1e-12)


def test_env_forces_pure_python():
    import os
    import subprocess
    import sys
    env = dict(os.environ, COVERT_RA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from covert_ra import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
