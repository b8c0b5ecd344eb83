"""Slow, independent reference implementations used as test oracles.

Nothing here imports the arithmetic under test: field elements are lists of
GF(4) coefficient pairs multiplied schoolbook-style, linear algebra is plain
Gaussian elimination on those, and the quantum reference is a full state
vector built with Kronecker products.
"""
from itertools import product

import numpy as np

# x^L = sum_i c_i x^i, GF(4) symbols as ints c0 + 2*c1 (the packed convention)
ORACLE_MODULI = {1: (), 2: (2, 1), 3: (2, 1, 1), 4: (2, 0, 1, 1)}


# ---------------------------------------------------------------------------
# GF(4) and GF(4^L) by hand
# ---------------------------------------------------------------------------


def gf4_pair(s):
    return (s & 1, (s >> 1) & 1)


def gf4_int(p):
    return p[0] | (p[1] << 1)


def gf4_add(x, y):
    return (x[0] ^ y[0], x[1] ^ y[1])


def gf4_mul(x, y):
    # (a0 + a1 t)(b0 + b1 t) with t^2 = t + 1
    a0, a1 = x
    b0, b1 = y
    c0 = (a0 & b0) ^ (a1 & b1)
    c1 = (a0 & b1) ^ (a1 & b0) ^ (a1 & b1)
    return (c0, c1)


def to_poly(v, L):
    return [gf4_pair((v >> (2 * j)) & 3) for j in range(L)]


def from_poly(poly):
    return sum(gf4_int(c) << (2 * j) for j, c in enumerate(poly))


def poly_mul(a, b, L):
    """Multiply two packed GF(4^L) elements: schoolbook product, then reduce."""
    pa, pb = to_poly(a, L), to_poly(b, L)
    prod = [(0, 0)] * (2 * L - 1)
    for i, x in enumerate(pa):
        for j, y in enumerate(pb):
            prod[i + j] = gf4_add(prod[i + j], gf4_mul(x, y))
    mod = [gf4_pair(c) for c in ORACLE_MODULI[L]]
    for d in range(2 * L - 2, L - 1, -1):
        top = prod[d]
        prod[d] = (0, 0)
        if top == (0, 0):
            continue
        for i, c in enumerate(mod):
            prod[d - L + i] = gf4_add(prod[d - L + i], gf4_mul(top, c))
    return from_poly(prod[:L])


def brute_inverse(a, L):
    for y in range(1, 4**L):
        if poly_mul(a, y, L) == 1:
            return y
    raise ZeroDivisionError


def mat_mul(A, B, L):
    A, B = np.asarray(A), np.asarray(B)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            acc = 0
            for t in range(A.shape[1]):
                acc ^= poly_mul(int(A[i, t]), int(B[t, j]), L)
            out[i, j] = acc
    return out


def oracle_rank(M, L):
    M = [list(map(int, row)) for row in np.asarray(M)]
    rank, cols = 0, (len(M[0]) if M else 0)
    for c in range(cols):
        piv = next((r for r in range(rank, len(M)) if M[r][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = brute_inverse(M[rank][c], L)
        M[rank] = [poly_mul(inv, v, L) for v in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][c]:
                f = M[r][c]
                M[r] = [v ^ poly_mul(f, w, L) for v, w in zip(M[r], M[rank])]
        rank += 1
    return rank


def brute_min_distance(G, L):
    G = np.asarray(G)
    k, n = G.shape
    best = n + 1
    for msg in product(range(4**L), repeat=k):
        if not any(msg):
            continue
        cw = [0] * n
        for i, m in enumerate(msg):
            if m:
                for j in range(n):
                    cw[j] ^= poly_mul(m, int(G[i, j]), L)
        best = min(best, sum(1 for c in cw if c))
    return best


# ---------------------------------------------------------------------------
# dense state-vector reference
# ---------------------------------------------------------------------------

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def weyl(a, b):
    return np.linalg.matrix_power(Z, a) @ np.linalg.matrix_power(X, b)


def bell(a, b):
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.kron(weyl(a, b), I2) @ phi


class DenseSim:
    """All qubits in one vector; qubit 0 is the most significant bit."""

    def __init__(self, nqubits):
        self.n = nqubits
        self.psi = np.zeros(2**nqubits, dtype=complex)
        self.psi[0] = 1

    def gate(self, q, U):
        ops = [U if i == q else I2 for i in range(self.n)]
        full = ops[0]
        for op in ops[1:]:
            full = np.kron(full, op)
        self.psi = full @ self.psi

    def bell_pair(self, q1, q2):
        # H on q1 then CNOT q1 -> q2 on |00>
        H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        self.gate(q1, H)
        idx = np.arange(2**self.n)
        b1 = (idx >> (self.n - 1 - q1)) & 1
        flipped = idx ^ (b1 << (self.n - 1 - q2))
        new = np.zeros_like(self.psi)
        new[flipped] = self.psi
        self.psi = new

    def bell_probs(self, q1, q2):
        """Outcome probabilities and post-measurement states over the 4 labels."""
        t = self.psi.reshape([2] * self.n)
        t = np.moveaxis(t, [q1, q2], [0, 1]).reshape(4, -1)
        out = []
        for s in range(4):
            a, b = s & 1, s >> 1
            amp = bell(a, b).conj() @ t
            out.append((float(np.vdot(amp, amp).real), amp))
        return out
