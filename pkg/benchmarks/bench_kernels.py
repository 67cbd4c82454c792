"""Benchmark the numba kernels against the pure-numpy fallback.

Times sector enumeration and the Hamiltonian matvec on both backends and
prints the speedup.  Run from the repository root:

    python benchmarks/bench_kernels.py --sites 16,20,24 --repeat 5
"""

import argparse
import time

import numpy as np

from spinfid import build_sector_basis
from spinfid import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sites", default="16,20,24")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--lam", type=float, default=0.2411)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sites.split(",")]

    if not kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy path can be timed")

    print(f"{'L':>3} {'dim':>10} {'fill np':>10} {'fill nb':>10} "
          f"{'matvec np':>11} {'matvec nb':>11} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for L in sizes:
        n_up = L // 2
        basis = build_sector_basis(L, n_up)
        dim = basis.dim
        v = rng.standard_normal(dim)
        out = np.empty(dim)

        t_fill_np = best_of(lambda: kernels.fill_states_numpy(L, n_up, dim),
                            args.repeat)
        args_mv = (basis.states, basis.offsets, basis.low_rank, basis.low_bits,
                   L, 1.0, args.lam, v, out)
        t_mv_np = best_of(lambda: kernels.apply_bonds_numpy(*args_mv), args.repeat)

        if kernels.HAVE_NUMBA:
            kernels.fill_states_numba(L, n_up, dim)      # compile
            kernels.apply_bonds_numba(*args_mv)          # compile
            t_fill_nb = best_of(lambda: kernels.fill_states_numba(L, n_up, dim),
                                args.repeat)
            t_mv_nb = best_of(lambda: kernels.apply_bonds_numba(*args_mv),
                              args.repeat)
            out_np = np.empty(dim)
            kernels.apply_bonds_numpy(basis.states, basis.offsets, basis.low_rank,
                                      basis.low_bits, L, 1.0, args.lam, v, out_np)
            kernels.apply_bonds_numba(*args_mv)
            assert np.array_equal(out, out_np), "backends disagree"
            print(f"{L:>3} {dim:>10} {t_fill_np:>10.4f} {t_fill_nb:>10.4f} "
                  f"{t_mv_np:>11.4f} {t_mv_nb:>11.4f} {t_mv_np / t_mv_nb:>7.1f}x")
        else:
            print(f"{L:>3} {dim:>10} {t_fill_np:>10.4f} {'-':>10} "
                  f"{t_mv_np:>11.4f} {'-':>11} {'-':>8}")


if __name__ == "__main__":
    main()
