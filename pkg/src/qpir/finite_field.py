"""Arithmetic over GF(4) and its extensions GF(4^L), L <= 4.

Elements of GF(4^L) are stored as integers in ``[0, 4^L)``. Bits ``2j`` and
``2j+1`` hold the coefficient of ``x^j`` in the polynomial basis
``{1, x, ..., x^(L-1)}`` over GF(4), and each GF(4) coefficient ``c0 + c1*alpha``
is the bit pair ``(c0, c1)``. With this layout the map from a field element to
its L pairs in F_2^2 (:func:`phi`) is a pure bit view, and field addition is
XOR.

GF(4) itself uses ``alpha^2 = alpha + 1``. The extension moduli are fixed
primitive polynomials over GF(4), so ``x`` generates the multiplicative group:

====  =======================================
L     modulus
====  =======================================
1     (none, GF(4) itself; primitive ``alpha``)
2     x^2 + x + alpha
3     x^3 + x^2 + x + alpha
4     x^4 + x^3 + x^2 + alpha
====  =======================================
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import kernels

# GF(4) = {0, 1, alpha, alpha^2} as 0, 1, 2, 3.
GF4_MUL = np.array(
    [[0, 0, 0, 0],
     [0, 1, 2, 3],
     [0, 2, 3, 1],
     [0, 3, 1, 2]],
    dtype=np.int64,
)
ALPHA = 2
ALPHA2 = 3

# x^L = sum_i MODULI[L][i] * x^i  (characteristic two, so no sign flips).
MODULI = {
    1: (),
    2: (ALPHA, 1),
    3: (ALPHA, 1, 1),
    4: (ALPHA, 0, 1, 1),
}


class FieldMismatchError(ValueError):
    """Operands belong to different fields."""


@dataclass(frozen=True)
class FieldSpec:
    """The field GF(4^L) with its fixed modulus."""

    L: int

    def __post_init__(self):
        if self.L not in MODULI:
            raise ValueError(f"extension degree L={self.L} unsupported; choose from {sorted(MODULI)}")

    @property
    def modulus(self):
        return MODULI[self.L]

    @property
    def q(self):
        return 4**self.L

    @property
    def primitive(self):
        return ALPHA if self.L == 1 else 4

    def __repr__(self):
        return f"GF(4^{self.L})"

    # -- tables ------------------------------------------------------------

    def _times_x(self, v):
        L = self.L
        top = (v >> (2 * (L - 1))) & 3
        v = (v << 2) & (self.q - 1)
        if top:
            for i, c in enumerate(self.modulus):
                v ^= int(GF4_MUL[top, c]) << (2 * i)
        return v

    @cached_property
    def _exp_log(self):
        q = self.q
        exp = np.zeros(2 * q, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        v = 1
        for i in range(q - 1):
            exp[i] = v
            log[v] = i
            v = int(GF4_MUL[v, ALPHA]) if self.L == 1 else self._times_x(v)
        if v != 1 or np.count_nonzero(log >= 0) != q - 1:
            raise AssertionError(f"modulus for L={self.L} is not primitive")
        exp[q - 1:2 * q - 2] = exp[: q - 1]
        return exp, log

    @cached_property
    def mul_table(self):
        exp, log = self._exp_log
        q = self.q
        table = np.zeros((q, q), dtype=np.int64)
        nz = np.arange(1, q)
        table[1:, 1:] = exp[log[nz][:, None] + log[nz][None, :]]
        table.setflags(write=False)
        return table

    @cached_property
    def inv_table(self):
        exp, log = self._exp_log
        q = self.q
        table = np.zeros(q, dtype=np.int64)
        table[1:] = exp[(q - 1 - log[1:]) % (q - 1)]
        table.setflags(write=False)
        return table

    # -- scalar / array helpers -------------------------------------------

    def element(self, value):
        return FieldElement(self, int(value))

    def elements(self):
        return [FieldElement(self, v) for v in range(self.q)]

    def power(self, a, e):
        if e == 0:
            return 1
        if a == 0:
            return 0
        exp, log = self._exp_log
        return int(exp[(int(log[a]) * e) % (self.q - 1)])

    def mul(self, a, b):
        return self.mul_table[a, b]

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse")
        out = self.inv_table[a]
        return int(out) if out.ndim == 0 else out

    def matmul(self, A, B):
        A = np.ascontiguousarray(A, dtype=np.int64)
        B = np.ascontiguousarray(B, dtype=np.int64)
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
        if A.shape[1] == 0:
            return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        return kernels.gf_matmul(A, B, np.asarray(self.mul_table))

    def dot(self, u, v):
        prod = self.mul_table[np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64)]
        return int(np.bitwise_xor.reduce(prod)) if prod.size else 0

    def random(self, rng, size):
        return rng.integers(0, self.q, size=size, dtype=np.int64)


@lru_cache(maxsize=None)
def field(L):
    """Shared :class:`FieldSpec` instance for extension degree ``L``."""
    return FieldSpec(L)


def min_extension(n):
    """Smallest L with 4^L >= n."""
    L = 1
    while 4**L < n:
        L += 1
    return L


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.spec.q:
            raise ValueError(f"{self.value} is not an element of {self.spec!r}")

    @property
    def coeffs(self):
        return phi(self)

    def _check(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise FieldMismatchError(f"{self.spec!r} vs {other.spec!r}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.spec, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.spec, int(self.spec.mul_table[self.value, other.value]))

    def __truediv__(self, other):
        return self * inv(other)

    def __pow__(self, e):
        if e < 0:
            return inv(self) ** (-e)
        return FieldElement(self.spec, self.spec.power(self.value, e))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.spec!r}[{self.value:#x}]"


def add(a, b):
    return a + b


def mul(a, b):
    return a * b


def inv(a):
    if a.value == 0:
        raise ZeroDivisionError(f"zero has no inverse in {a.spec!r}")
    return FieldElement(a.spec, int(a.spec.inv_table[a.value]))


def symbol_to_pair(s):
    """GF(4) symbol ``c0 + c1*alpha`` -> bit pair ``(c0, c1)``."""
    return (s & 1, (s >> 1) & 1)


def pair_to_symbol(pair):
    a, b = pair
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"not a bit pair: {pair!r}")
    return a | (b << 1)


def phi(a):
    """The L bit pairs of ``a`` in the polynomial basis, lowest degree first."""
    return tuple(symbol_to_pair((a.value >> (2 * j)) & 3) for j in range(a.spec.L))


def phi_int(value, L):
    """:func:`phi` on a raw integer element, returning GF(4) symbols."""
    return tuple((value >> (2 * j)) & 3 for j in range(L))


def phi_inv(pairs, spec):
    pairs = tuple(pairs)
    if len(pairs) != spec.L:
        raise ValueError(f"expected {spec.L} pairs, got {len(pairs)}")
    value = 0
    for j, pair in enumerate(pairs):
        value |= pair_to_symbol(tuple(pair)) << (2 * j)
    return FieldElement(spec, value)


# ---------------------------------------------------------------------------
# linear algebra over GF(4^L)
# ---------------------------------------------------------------------------


def rref(spec, M):
    """Reduced row echelon form. Returns ``(R, pivots)``."""
    R = np.array(M, dtype=np.int64, copy=True)
    rows, cols = R.shape
    mul = spec.mul_table
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = mul[spec.inv_table[R[r, c]], R[r]]
        for i in range(rows):
            if i != r and R[i, c]:
                R[i] ^= mul[R[i, c], R[r]]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(spec, M):
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref(spec, M)[1])


def inverse(spec, M):
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError(f"matrix is not square: {M.shape}")
    R, pivots = rref(spec, np.hstack([M, np.eye(n, dtype=np.int64)]))
    if pivots[:n] != list(range(n)):
        raise np.linalg.LinAlgError("singular matrix over the field")
    return R[:, n:]


def nullspace(spec, M):
    """Basis of ``{v : M v^T = 0}`` as rows, in reduced echelon form."""
    M = np.asarray(M, dtype=np.int64)
    rows, n = M.shape
    if rows == 0:
        return np.eye(n, dtype=np.int64)
    R, pivots = rref(spec, M)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(pivots):
            basis[i, pc] = R[r, f]
    if basis.shape[0] == 0:
        return basis
    return rref(spec, basis)[0]
