"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-n time of each backend, the
speedup, and the largest difference between their outputs.
"""

import argparse
import time

import numpy as np

from ratiodensity import kernels
from ratiodensity.euler import primes_upto


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    p3, lp3 = primes_upto(3000)
    p7, lp7 = primes_upto(10**7)
    p3, p7 = p3.astype(float), p7.astype(float)
    u = 0.05 + 1j * np.linspace(-200.0, 200.0, 2000)
    return {
        "kloosterman_enum c=1e6": lambda b: b.kloosterman_enum(3, 7, 1_000_003),
        "kloosterman_table c=2003 (40x40)": lambda b: b.kloosterman_table(2003, 40, 40),
        "residual_product 2000 u x 430 p": lambda b: b.residual_product(u, p3, lp3, 1),
        "chi_direct_product p<=1e7": lambda b: b.chi_direct_product(1.5, 1.0, p7, lp7),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; only the numpy fallback is available")
    names = [n for n in ("compiled", "python") if n in kernels.BACKENDS]
    print(f"{'kernel':36s} " + " ".join(f"{n:>10s}" for n in names) + "   speedup   max|diff|")
    for label, fn in cases().items():
        times, outs = [], []
        for n in names:
            t, out = _best(lambda: fn(kernels.BACKENDS[n]), args.repeat)
            times.append(t)
            outs.append(np.asarray(out, dtype=complex))
        speed = times[-1] / times[0] if len(times) == 2 else 1.0
        diff = float(np.max(np.abs(outs[0] - outs[-1])))
        cols = " ".join(f"{t * 1e3:8.2f}ms" for t in times)
        print(f"{label:36s} {cols}   {speed:6.1f}x   {diff:.1e}")


if __name__ == "__main__":
    main()
