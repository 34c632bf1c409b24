"""Timing of the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--sizes 200,800,1421] [--repeat 3]

Prints one line per (kernel, size, backend) with the best wall time and
the speed-up of the compiled kernels over the numpy ones, after checking
that both backends agree.
"""
import argparse
import time

import numpy as np

from rabi_lab._backend import available_backends
from rabi_lab.rabi import ModelParams, parity_sector_hamiltonian


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def cases(size):
    tri = parity_sector_hamiltonian(ModelParams(1.0, 0.1, size - 1), 1)
    return {
        "tridiag_ql (values)": lambda k: k.tridiag_ql(tri.diag, tri.offdiag, False, 50)[0],
        "tridiag_ql (vectors)": lambda k: k.tridiag_ql(tri.diag, tri.offdiag, True, 50)[0],
        "displacement_matrix": lambda k: k.displacement_matrix(0.2, size),
        "bessel_sequence": lambda k: k.bessel_sequence(size, 0.4 * np.sqrt(size)),
        "laguerre": lambda k: k.laguerre(size, 3, 0.04),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,800,1421")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; timing the numpy backend only")
    for size in (int(s) for s in args.sizes.split(",")):
        for name, call in cases(size).items():
            timings = {}
            outputs = {}
            for label, mod in backends.items():
                timings[label], outputs[label] = best_time(lambda: call(mod), args.repeat)
            if len(outputs) == 2:
                a = np.sort(np.atleast_1d(outputs["python"]).ravel())
                b = np.sort(np.atleast_1d(outputs["cython"]).ravel())
                err = float(np.max(np.abs(a - b)))
                speed = timings["python"] / timings["cython"]
                print(f"{name:22s} n={size:5d}  python {timings['python']:9.4f} s  "
                      f"cython {timings['cython']:9.4f} s  speed-up {speed:7.1f}x  max diff {err:.1e}")
            else:
                print(f"{name:22s} n={size:5d}  python {timings['python']:9.4f} s")


if __name__ == "__main__":
    main()
