"""Compiled vs pure-Python kernels.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``. Prints the best
wall time per kernel and backend, and the speedup.
"""
import argparse
import importlib
import timeit

import numpy as np

from fsoacq import _kernels_py


def cases():
    rng = np.random.default_rng(0)
    a = rng.uniform(1.0, 200.0, 20_000)
    x = rng.uniform(0.0, 300.0, 20_000)
    return {
        "gammaincc (20k pairs)": lambda k: k.gammaincc(a, x),
        "gammainc (20k pairs)": lambda k: k.gammainc(a, x),
        "spiral_angles (Ru=50, rho=0.2)": lambda k: k.spiral_angles(0.4 / (2 * np.pi), 0.4, 50.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = {"python": _kernels_py}
    try:
        backends["cython"] = importlib.import_module("fsoacq._kernels")
    except ImportError:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in cases().items():
        times = {b: min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        speed = f"{times['python'] / times['cython']:10.1f}x" if "cython" in times else ""
        print(f"{name:34s}" + "".join(f"{t:11.4f}s" for t in times.values()) + "  " + speed)


if __name__ == "__main__":
    main()
