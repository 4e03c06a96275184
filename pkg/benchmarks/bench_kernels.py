"""Compare the compiled and numpy barrier kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the barrier gradient/Hessian, one subproblem solve and a full SCA run
for a few problem shapes, for every available backend.
"""

import argparse
import time

from mimo_cc_lab._kernels import available_backends, get_backend
from mimo_cc_lab.channel import sample_channels
from mimo_cc_lab.multicast import (
    CovarianceSet,
    MulticastProblem,
    SCAConfig,
    build_sca_subproblem,
    sca_solve,
    solve_subproblem,
)

SHAPES = [  # (L, G, omega, t, snr_db)
    (2, 2, 3, 1, 20.0),
    (3, 2, 3, 0, 20.0),
    (4, 2, 3, 1, 20.0),
]


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        n = fn()
        best = min(best, (time.perf_counter() - t0) / n)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'shape (L,G,omega,t)':<22}{'kernel':<10}{'derivs':>12}{'solve':>12}{'sca':>12}")
    for L, G, omega, t, snr in SHAPES:
        channels = sample_channels(G, L, list(range(1, omega + 1)), seed=7)
        problem = MulticastProblem.from_channels(channels, t, 1.0, 10 ** (snr / 10))
        sub = build_sca_subproblem(problem, CovarianceSet.isotropic(problem))
        K = 0.9 * sub.prev.K  # strictly inside the power budget
        R = sub.objective(CovarianceSet(K)) - 0.1
        timings = {}
        for name in backends:
            kern = get_backend(name)

            def derivs(n=200):
                for _ in range(n):
                    kern.barrier_derivs(sub.data, K, R, 10.0)
                return n

            def solve(n=5):
                for _ in range(n):
                    solve_subproblem(sub, backend=name)
                return n

            def sca():
                sca_solve(problem, SCAConfig(max_iter=50), backend=name)
                return 1

            timings[name] = [_best_of(f, args.repeat) for f in (derivs, solve, sca)]
            d, s, c = timings[name]
            print(f"{str((L, G, omega, t)):<22}{name:<10}{d * 1e6:>10.1f}us{s * 1e3:>10.2f}ms{c * 1e3:>10.1f}ms")
        if len(timings) == 2:
            ratios = [p / c for p, c in zip(timings["python"], timings["cython"])]
            print(f"{'':<22}{'speedup':<10}" + "".join(f"{r:>11.1f}x" for r in ratios))


if __name__ == "__main__":
    main()
