import os
import subprocess
import sys

import numpy as np
from hypothesis import given, strategies as st

from qpir import kernels
from qpir.finite_field import field

seeds = st.integers(0, 2**32 - 1)


@given(st.integers(1, 3), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), seeds)
def test_matmul_twins_agree(L, r, inner, c, seed):
    spec = field(L)
    rng = np.random.default_rng(seed)
    A, B = spec.random(rng, (r, inner)), spec.random(rng, (inner, c))
    mul = np.asarray(spec.mul_table)
    assert np.array_equal(kernels.gf_matmul_numpy(A, B, mul), kernels.gf_matmul_loop(A, B, mul))


@given(st.integers(1, 2), st.integers(1, 3), st.integers(1, 6), seeds)
def test_min_weight_twins_agree(L, k, n, seed):
    spec = field(L)
    G = spec.random(np.random.default_rng(seed), (k, n))
    mul = np.asarray(spec.mul_table)
    assert kernels.min_weight_numpy(G, mul, spec.q, chunk=7) == kernels.min_weight_loop(G, mul, spec.q)


@given(st.integers(1, 2), st.integers(1, 2), st.integers(1, 2), st.integers(0, 3), seeds)
def test_masked_query_twins_agree(L, m, r, width, seed):
    spec = field(L)
    cols = spec.random(np.random.default_rng(seed), (r, width))
    mul = np.asarray(spec.mul_table)
    a = kernels.masked_queries_numpy(cols, m, mul, spec.q)
    b = kernels.masked_queries_loop(cols, m, mul, spec.q)
    assert a.shape == (spec.q ** (m * r), m * width)
    assert np.array_equal(a, b)


def test_masked_queries_digit_order():
    spec = field(1)
    mul = np.asarray(spec.mul_table)
    out = kernels.masked_queries_numpy(np.array([[1, 2]]), 2, mul, 4)
    # z = 1 sets the first file's mask digit to 1, z = 4 the second file's
    assert out[1].tolist() == [1, 2, 0, 0]
    assert out[4].tolist() == [0, 0, 1, 2]


@given(st.integers(1, 5), st.data())
def test_single_qubit_gate_twins_agree(nq, data):
    axis = data.draw(st.integers(0, nq - 1))
    rng = np.random.default_rng(data.draw(seeds))
    state = rng.normal(size=2**nq) + 1j * rng.normal(size=2**nq)
    U = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    a = kernels.apply_1q_numpy(state, nq, axis, U)
    b = kernels.apply_1q_loop(state, nq, axis, U)
    assert np.allclose(a, b)
    full = np.kron(np.kron(np.eye(2**axis), U), np.eye(2 ** (nq - axis - 1)))
    assert np.allclose(a, full @ state)


def test_disable_flag_selects_numpy_path():
    env = dict(os.environ, QPIR_DISABLE_NUMBA="1")
    code = "from qpir import kernels, _accel; print(_accel.backend_name(), kernels.gf_matmul is kernels.gf_matmul_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]
