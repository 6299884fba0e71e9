"""Time the compiled and pure-Python angular-flow kernels on the same revolutions.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import time

import numpy as np

from closedtraj import Params
from closedtraj.averaging import design_perturbation, target_from_roots
from closedtraj.integrator import _kernels_py

try:
    from closedtraj.integrator import _kernels
except ImportError:
    _kernels = None

CASES = [
    ("cubic, eps=1e-2", [1.0], 1e-2, 1.0),
    ("quintic, eps=1e-2", [1.0, 2.0], 1e-2, 2.0),
    ("quintic, eps=3e-2", [1.0, 2.0], 3e-2, 1.2),
]


def time_kernel(mod, args, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = mod.theta_flow(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    prm = Params(1.0, 0.0, 1.0)
    theta_end = -2 * math.pi
    print(f"{'case':<20} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>10} {'steps':>6}")
    for name, roots, eps, r0 in CASES:
        F = design_perturbation(prm, target_from_roots(roots))
        kargs = (prm.a, prm.b, eps, F.exponents(), F.coefficients(), r0, 0.0, theta_end,
                 1e-12, 1e-14, 2 * math.pi / 20, 200_000)
        tp, outp = time_kernel(_kernels_py, kargs, args.repeat)
        if _kernels is None:
            print(f"{name:<20} {tp * 1e3:10.2f} {'n/a':>10} {'':>8} {'':>10} {outp[4]:6d}")
            continue
        tc, outc = time_kernel(_kernels, kargs, args.repeat)
        diff = float(np.max(np.abs(np.subtract(outp[1:4], outc[1:4]))))
        print(f"{name:<20} {tp * 1e3:10.2f} {tc * 1e3:10.3f} {tp / tc:8.0f} {diff:10.1e} {outc[4]:6d}")


if __name__ == "__main__":
    main()
