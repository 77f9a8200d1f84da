"""Time the hot kernels on the compiled and the pure-numpy backend.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""
import argparse
import time

import numpy as np

from hnoma_sim import _backend, polar
from hnoma_sim.scma import build_factor_graph, generate_codebook


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def mpa_case(J, batch, rng):
    cb = generate_codebook(build_factor_graph(J, 4, 2), 4)
    g = cb.graph
    y = rng.standard_normal((batch, 4)) + 1j * rng.standard_normal((batch, 4))
    h = (rng.standard_normal((batch, J)) + 1j * rng.standard_normal((batch, J))) / np.sqrt(2)
    nv = np.full((batch, 4), 0.2)
    args = (y, h, nv, cb.codewords, g.resource_users, g.user_resources, g.user_slots, 10)
    return f"mpa {J}x4 M=4 T=10", batch, lambda k: k.mpa_batch(*args)


def scl_case(n, L, batch, rng):
    spec = polar.make_polar_spec(n, 0.5, L, trials=5000)
    llr = 2.0 + 2.0 * rng.standard_normal((batch, n))
    return f"scl n={n} L={L}", batch, lambda k: k.scl_batch(llr, spec.info_mask, L)


def genie_case(n, batch, rng):
    llr = np.ascontiguousarray(4.0 + 2.0 * rng.standard_normal((batch, n)))
    return f"genie-sc n={n}", batch, lambda k: k.genie_sc_errors(llr)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller batches")
    args = ap.parse_args()
    scale = 0.1 if args.quick else 1.0
    rng = np.random.default_rng(0)
    b = lambda x: max(1, int(x * scale))
    cases = [
        mpa_case(6, b(2000), rng),
        mpa_case(8, b(500), rng),
        scl_case(64, 1, b(500), rng),
        scl_case(64, 4, b(500), rng),
        scl_case(256, 4, b(200), rng),
        genie_case(256, b(2000), rng),
    ]
    names = _backend.available()
    print(f"{'kernel':<22}{'batch':>7}" + "".join(f"{n + ' us/item':>18}" for n in names) + f"{'speed-up':>10}")
    for label, batch, run in cases:
        per_item = {}
        for name in names:
            kernels = _backend.get(name)
            run(kernels)  # warm-up
            per_item[name] = best_of(lambda: run(kernels), args.repeat) / batch * 1e6
        row = f"{label:<22}{batch:>7}" + "".join(f"{per_item[n]:>18.2f}" for n in names)
        if len(names) == 2:
            row += f"{per_item['python'] / per_item['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
