"""Time the numba-compiled kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Both variants are called directly, so the comparison works whatever
QPIR_DISABLE_NUMBA says; with numba missing the loop variants run as plain
Python and the table shows that instead. A second section times an
end-to-end audit in subprocesses with and without the flag.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qpir import _accel, kernels
from qpir.finite_field import field


def cases():
    rng = np.random.default_rng(0)
    f16, f4 = field(2), field(1)
    mul16, mul4 = np.asarray(f16.mul_table), np.asarray(f4.mul_table)
    A, B = f16.random(rng, (64, 64)), f16.random(rng, (64, 64))
    G = f16.random(rng, (4, 12))
    cols = f16.random(rng, (2, 3))
    state = rng.normal(size=1 << 12) + 1j * rng.normal(size=1 << 12)
    U = np.array([[0, 1], [1, 0]], dtype=complex)
    yield "gf_matmul 64x64 GF(16)", (A, B, mul16), kernels.gf_matmul_loop, kernels.gf_matmul_numpy
    yield "min_weight [12,4] GF(16)", (G, mul16, 16), kernels.min_weight_loop, kernels.min_weight_numpy
    yield "masked_queries m=2 t=2 GF(16)", (cols, 2, mul16, 16), kernels.masked_queries_loop, kernels.masked_queries_numpy
    yield "masked_queries m=2 t=2 GF(4)", (f4.random(rng, (2, 2)), 2, mul4, 4), kernels.masked_queries_loop, kernels.masked_queries_numpy
    yield "apply_1q 12 qubits", (state, 12, 5, U), kernels.apply_1q_loop, kernels.apply_1q_numpy


def best(fn, args, repeat):
    fn(*args)  # compile / warm caches
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


AUDIT = (
    "from qpir.codes import grs_generator; from qpir.finite_field import field; "
    "from qpir.protocol import DssConfig; from qpir.privacy_audit import audit_user_privacy, all_sets; "
    "cfg = DssConfig(grs_generator(field(2), 6, 4), m=2); "
    "[audit_user_privacy(cfg, T) for T in all_sets(6, 2)]"
)


def end_to_end(disable):
    env = dict(os.environ, QPIR_DISABLE_NUMBA="1" if disable else "0")
    code = f"import time; t = time.perf_counter(); {AUDIT}; print(time.perf_counter() - t)"
    # run twice so the numba on-disk cache is warm for the timed run
    subprocess.run([sys.executable, "-c", AUDIT], env=env, check=True)
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"active backend: {_accel.backend_name()}")
    print(f"{'kernel':32} {'loop (s)':>12} {'numpy (s)':>12} {'numpy/loop':>11}")
    for name, fargs, loop, vec in cases():
        a, b = loop(*fargs), vec(*fargs)
        if not np.allclose(a, b):
            raise SystemExit(f"{name}: variants disagree")
        tl, tv = best(loop, fargs, args.repeat), best(vec, fargs, args.repeat)
        print(f"{name:32} {tl:12.2e} {tv:12.2e} {tv / tl:11.2f}")
    print()
    on, off = end_to_end(False), end_to_end(True)
    print(f"exhaustive audit, [6,4] over GF(16), all |T|<=2: numba {on:.3f} s, numpy {off:.3f} s")


if __name__ == "__main__":
    main()
