"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 7]

Prints the best-of-``repeat`` wall time per kernel and backend plus the
speedup of the compiled version. Both backends see identical inputs.
"""

import argparse
import timeit

import numpy as np

from glfs import _kernels_py

try:
    from glfs import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    P = np.ascontiguousarray(rng.normal(size=(1500, 20)))
    D = _kernels_py.sq_dists(P)
    X = np.ascontiguousarray(rng.normal(size=(20000, 200)))
    G = rng.normal(size=(200, 200))
    G = np.ascontiguousarray(G + G.T)
    Q = np.ascontiguousarray(rng.normal(size=(5000, 10)))
    C = np.ascontiguousarray(Q[:8])
    return [
        ("sq_dists n=1500 dim=20", "sq_dists", (P,)),
        ("knn_mask n=1500 k=5", "knn_mask", (D, 5)),
        ("nearest_other n=1500", "nearest_other", (D,)),
        ("row_quadratic_forms d=20000 n=200", "row_quadratic_forms", (X, G)),
        ("assign_nearest n=5000 k=8", "assign_nearest", (Q, C)),
    ]


def best_time(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<38}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for label, name, inputs in cases(rng):
        t_py = best_time(getattr(_kernels_py, name), inputs, args.repeat)
        if _kernels is None:
            print(f"{label:<38}{t_py * 1e3:>12.2f}{'n/a':>13}{'':>9}")
            continue
        t_cy = best_time(getattr(_kernels, name), inputs, args.repeat)
        print(f"{label:<38}{t_py * 1e3:>12.2f}{t_cy * 1e3:>13.2f}{t_py / t_cy:>8.2f}x")


if __name__ == "__main__":
    main()
