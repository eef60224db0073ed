"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --tables 2000 --repeat 5
"""

import argparse
import timeit

import numpy as np

from ctsmooth import _kernels_py

try:
    from ctsmooth import _ckernels
except ImportError:
    _ckernels = None


def stack(m, r, c, seed=0):
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(r * c), size=m).reshape(m, r, c)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tables", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args(argv)

    backends = [("python", _kernels_py)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    cases = [
        ("cramer_v_values 4x5", lambda k, P: k.cramer_v_values(P, args.lam), stack(args.tables, 4, 5)),
        ("symmetry_phi_values 4x4", lambda k, P: k.symmetry_phi_values(P, args.lam), stack(args.tables, 4, 4)),
        ("mse_coefficients V 4x5", lambda k, P: k.mse_coefficients_batch(0, P, args.lam), stack(args.tables, 4, 5)),
        ("mse_coefficients Phi 4x4", lambda k, P: k.mse_coefficients_batch(1, P, args.lam), stack(args.tables, 4, 4)),
    ]
    print(f"{'kernel':28s}" + "".join(f"{name:>14s}" for name, _ in backends) + ("    speedup" if len(backends) > 1 else ""))
    for label, fn, P in cases:
        times = []
        for _, mod in backends:
            fn(mod, P)
            times.append(min(timeit.repeat(lambda: fn(mod, P), number=1, repeat=args.repeat)))
        row = f"{label:28s}" + "".join(f"{t * 1e3:11.2f} ms" for t in times)
        if len(times) > 1:
            row += f"  {times[0] / times[1]:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
