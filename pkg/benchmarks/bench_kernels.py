"""Time the numba and numpy kernel paths against each other.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. The numba
functions are warmed up once before timing so compilation is excluded.
The solver rows switch ``entgroup._kernels.USE_NUMBA`` in process, which is
what the ``ENTGROUP_DISABLE_NUMBA`` flag sets at import time.
"""
import argparse
import timeit

import numpy as np

from entgroup import PartitionSpec, _kernels, analyze_mixed, analyze_pure, random_state
from entgroup.catalog import random_density
from entgroup.tensor_core import hermitian_basis


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_cases(rng):
    for L, d, R in [(1, 2, 4), (4, 3, 4), (8, 4, 8), (2, 10, 1)]:
        ops = np.ascontiguousarray(hermitian_basis(d), dtype=complex)
        psi3 = rng.standard_normal((L, d, R)) + 1j * rng.standard_normal((L, d, R))
        yield f"mode_columns L={L} d={d} R={R}", _kernels.mode_columns_numpy, _kernels.mode_columns_numba, (ops, psi3)
    for L, d, R in [(1, 2, 2), (2, 2, 2), (4, 2, 1), (2, 3, 2)]:
        ops = np.ascontiguousarray(hermitian_basis(d), dtype=complex)
        n = L * d * R
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rho6 = np.ascontiguousarray((m @ m.conj().T).reshape(L, d, R, L, d, R))
        yield (f"commutator_columns L={L} d={d} R={R}", _kernels.commutator_columns_numpy,
               _kernels.commutator_columns_numba, (ops, rho6))


def solver_cases():
    psi = random_state(PartitionSpec.of(2, 2, 2, 2), 0)
    rho = random_density(PartitionSpec.of(2, 2, 3), 0, rank=3)
    yield "analyze_pure 2x2x2x2", lambda: analyze_pure(psi, exp_checks=False)
    yield "analyze_mixed 2x2x3", lambda: analyze_mixed(rho, exp_checks=False)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args(argv)
    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'case':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, f_np, f_nb, fargs in kernel_cases(rng):
        assert np.allclose(f_np(*fargs), f_nb(*fargs))  # also warms the jit
        t_np = _best(lambda: f_np(*fargs), args.repeat, args.number)
        t_nb = _best(lambda: f_nb(*fargs), args.repeat, args.number)
        print(f"{name:40s} {1e3 * t_np:12.4f} {1e3 * t_nb:12.4f} {t_np / t_nb:8.2f}")

    saved = _kernels.USE_NUMBA
    try:
        for name, fn in solver_cases():
            times = {}
            for flag in (False, True):
                _kernels.USE_NUMBA = flag
                fn()
                times[flag] = _best(fn, args.repeat, max(1, args.number // 10))
            print(f"{name:40s} {1e3 * times[False]:12.4f} {1e3 * times[True]:12.4f} "
                  f"{times[False] / times[True]:8.2f}")
    finally:
        _kernels.USE_NUMBA = saved


if __name__ == "__main__":
    main()
