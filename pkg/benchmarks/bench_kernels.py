"""Compare the compiled and pure-Python trial kernels on identical workloads.

Run: python benchmarks/bench_kernels.py [--trials N]
"""
import argparse
import time

import numpy as np

from covert_ra import kernels, simulation
from covert_ra.params import ChannelParams, ProtocolConfig, Scenario

CASES = {
    "decode n=4096 m=8 l=4": (ProtocolConfig(n=4096, m=8, l=4, t_n=1024.0), "decode"),
    "decode n=16384 m=16 l=8": (ProtocolConfig(n=16384, m=16, l=8, t_n=2048.0), "decode"),
    "detect n=4096 l=4": (ProtocolConfig(n=4096, m=8, l=4, t_n=1024.0), "detect"),
    "detect n=4096 l=16": (ProtocolConfig(n=4096, m=16, l=16, t_n=256.0), "detect"),
}


def _time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=500)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if kernels.compiled_available() else [])
    print(f"{'case':28s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup  same")
    for name, (proto, kind) in CASES.items():
        ch = ChannelParams((1.0,) * proto.m, (1.0,) * proto.m, 1.0, 1.0, (0.5, 2.0))
        plan = simulation.TrialPlan(args.trials, 5, Scenario(proto, ch), silent_variance=1.5)
        times, outs = [], []
        for b in backends:
            if kind == "decode":
                fn = lambda: simulation.estimate_decode_success(plan, backend=b).confusion
            else:
                fn = lambda: [r.eps1 + r.eps2 for r in
                              simulation.estimate_detection(plan, backend=b, tv_lifted=1.0).values()]
            t, out = _time(fn)
            times.append(t)
            outs.append(np.asarray(out))
        speed = times[0] / times[-1]
        same = all(np.array_equal(o, outs[0]) for o in outs)
        print(f"{name:28s} " + " ".join(f"{t:9.3f}s" for t in times) + f"  {speed:7.2f}x  {same}")


if __name__ == "__main__":
    main()
