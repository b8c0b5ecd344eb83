"""Hot inner loops.

Every kernel exists twice: an explicit-loop version compiled with numba
(``*_loop``) and a vectorised numpy version (``*_numpy``). The public names
bind to the loop versions when numba is active and to the numpy versions
otherwise, see :mod:`qpir._accel`. Both must return identical results; the
test-suite checks this on every kernel.

Field elements are ``int64`` integers in ``[0, q)``, addition is XOR and
multiplication goes through a dense ``(q, q)`` lookup table.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

# ---------------------------------------------------------------------------
# matrix product over GF(q)
# ---------------------------------------------------------------------------


def gf_matmul_numpy(A, B, mul):
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for j in range(A.shape[1]):
        out ^= mul[A[:, j][:, None], B[j][None, :]]
    return out


@njit
def gf_matmul_loop(A, B, mul):
    rows, inner = A.shape
    cols = B.shape[1]
    out = np.zeros((rows, cols), dtype=np.int64)
    for i in range(rows):
        for j in range(inner):
            a = A[i, j]
            if a == 0:
                continue
            for c in range(cols):
                out[i, c] ^= mul[a, B[j, c]]
    return out


# ---------------------------------------------------------------------------
# minimum Hamming weight by exhaustive enumeration of messages
# ---------------------------------------------------------------------------


def min_weight_numpy(G, mul, q, chunk=1 << 15):
    k, n = G.shape
    total = q**k
    best = n + 1
    powers = q ** np.arange(k, dtype=np.int64)
    for start in range(1, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        cw = np.zeros((idx.size, n), dtype=np.int64)
        for i in range(k):
            digits = (idx // powers[i]) % q
            cw ^= mul[digits[:, None], G[i][None, :]]
        w = int(np.count_nonzero(cw, axis=1).min())
        if w < best:
            best = w
    return best


@njit
def min_weight_loop(G, mul, q):
    # Odometer over message digits; only the changed digits touch the codeword.
    k, n = G.shape
    digits = np.zeros(k, dtype=np.int64)
    cw = np.zeros(n, dtype=np.int64)
    best = n + 1
    total = 1
    for _ in range(k):
        total *= q
    for _ in range(1, total):
        i = 0
        while True:
            old = digits[i]
            new = old + 1
            if new == q:
                new = 0
            for c in range(n):
                cw[c] ^= mul[old, G[i, c]] ^ mul[new, G[i, c]]
            digits[i] = new
            if new != 0:
                break
            i += 1
        w = 0
        for c in range(n):
            if cw[c] != 0:
                w += 1
        if w < best:
            best = w
    return best


# ---------------------------------------------------------------------------
# enumeration of masked queries Z . Gd restricted to a column set
# ---------------------------------------------------------------------------


def masked_queries_numpy(Gd_cols, m, mul, q):
    """All values of ``Z @ Gd_cols`` for ``Z`` ranging over ``F_q^{m x r}``.

    Row ``z`` of the result is the flattened ``m x |T|`` query block for the
    ``z``-th ``Z`` in little-endian digit order.
    """
    r, width = Gd_cols.shape
    total = q ** (m * r)
    idx = np.arange(total, dtype=np.int64)
    out = np.zeros((total, m, width), dtype=np.int64)
    for i in range(m):
        for j in range(r):
            digits = (idx // q ** (i * r + j)) % q
            out[:, i, :] ^= mul[digits[:, None], Gd_cols[j][None, :]]
    return out.reshape(total, m * width)


@njit
def masked_queries_loop(Gd_cols, m, mul, q):
    r, width = Gd_cols.shape
    total = 1
    for _ in range(m * r):
        total *= q
    out = np.zeros((total, m * width), dtype=np.int64)
    digits = np.zeros(m * r, dtype=np.int64)
    for z in range(total):
        rem = z
        for d in range(m * r):
            digits[d] = rem % q
            rem //= q
        for i in range(m):
            for j in range(r):
                a = digits[i * r + j]
                if a == 0:
                    continue
                for c in range(width):
                    out[z, i * width + c] ^= mul[a, Gd_cols[j, c]]
    return out


# ---------------------------------------------------------------------------
# single-qubit gate on a flat state vector
# ---------------------------------------------------------------------------


def apply_1q_numpy(state, nqubits, axis, U):
    view = state.reshape(1 << axis, 2, 1 << (nqubits - axis - 1))
    return np.einsum("ij,ajb->aib", U, view).reshape(-1)


@njit
def apply_1q_loop(state, nqubits, axis, U):
    out = np.empty_like(state)
    stride = 1 << (nqubits - axis - 1)
    for base in range(state.size):
        if base & stride:
            continue
        a0 = state[base]
        a1 = state[base | stride]
        out[base] = U[0, 0] * a0 + U[0, 1] * a1
        out[base | stride] = U[1, 0] * a0 + U[1, 1] * a1
    return out


if HAVE_NUMBA:
    gf_matmul = gf_matmul_loop
    min_weight = min_weight_loop
    masked_queries = masked_queries_loop
    apply_1q = apply_1q_loop
else:
    gf_matmul = gf_matmul_numpy
    min_weight = min_weight_numpy
    masked_queries = masked_queries_numpy
    apply_1q = apply_1q_numpy
