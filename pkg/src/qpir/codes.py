"""Linear codes over GF(4^L).

Generator matrices are ``int64`` arrays of field elements (see
:mod:`qpir.finite_field` for the encoding). Codes are immutable; every
constructor returns a generator of full row rank.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import kernels
from .finite_field import FieldSpec, field, inverse, nullspace, rank, rref

# Exhaustive distance computations enumerate q**k messages.
DISTANCE_BUDGET = 1 << 24


class EnumerationBudgetError(ValueError):
    """An exhaustive enumeration would exceed its configured budget."""


@dataclass(frozen=True, eq=False)
class LinearCode:
    spec: FieldSpec
    G: np.ndarray

    def __post_init__(self):
        G = np.array(self.G, dtype=np.int64, copy=True)
        if G.ndim != 2:
            raise ValueError("generator must be a 2-d array")
        if G.size and (G.min() < 0 or G.max() >= self.spec.q):
            raise ValueError(f"generator entries outside {self.spec!r}")
        if rank(self.spec, G) != G.shape[0]:
            raise ValueError("generator rows are linearly dependent")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    @property
    def n(self):
        return self.G.shape[1]

    @property
    def k(self):
        return self.G.shape[0]

    def __repr__(self):
        return f"LinearCode([{self.n},{self.k}] over {self.spec!r})"

    def same_code(self, other):
        """True when both generators span the same row space."""
        if self.spec != other.spec or self.G.shape != other.G.shape:
            return False
        return np.array_equal(rref(self.spec, self.G)[0], rref(other.spec, other.G)[0])

    def systematic(self):
        return LinearCode(self.spec, rref(self.spec, self.G)[0])

    # -- text form --------------------------------------------------------

    def to_text(self):
        width = ceil(2 * self.spec.L / 4)
        lines = ["qpir-code v1", f"field L={self.spec.L}", f"length {self.n}", f"dimension {self.k}"]
        for row in self.G:
            lines.append("row " + " ".join(f"{int(v):0{width}x}" for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0] != "qpir-code v1":
            raise ValueError("missing 'qpir-code v1' header")
        spec = field(int(lines[1].split("=", 1)[1]))
        n = int(lines[2].split()[1])
        k = int(lines[3].split()[1])
        rows = [[int(tok, 16) for tok in ln.split()[1:]] for ln in lines[4:]]
        G = np.array(rows, dtype=np.int64).reshape(k, n)
        return cls(spec, G)


@dataclass(frozen=True)
class LrcProfile:
    r: int
    rho: int
    partition: tuple

    @property
    def mu(self):
        return len(self.partition)

    @property
    def group_size(self):
        return self.r + self.rho - 1


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def grs_generator(spec, n, k, eval_points=None, col_multipliers=None):
    """Generalized Reed-Solomon code: ``G[i, j] = v_j * a_j**i``.

    Evaluation points default to the field elements ``0, 1, ..., n-1`` and the
    column multipliers to all ones.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if n > spec.q:
        raise ValueError(f"length {n} exceeds field size {spec.q}")
    pts = list(range(n)) if eval_points is None else [int(a) for a in eval_points]
    mult = [1] * n if col_multipliers is None else [int(v) for v in col_multipliers]
    if len(pts) != n or len(mult) != n:
        raise ValueError("need exactly n evaluation points and n multipliers")
    if len(set(pts)) != n:
        raise ValueError("evaluation points must be distinct")
    if any(v == 0 for v in mult):
        raise ValueError("column multipliers must be nonzero")
    if any(not 0 <= a < spec.q for a in pts + mult):
        raise ValueError(f"points/multipliers outside {spec!r}")
    G = np.zeros((k, n), dtype=np.int64)
    for i in range(k):
        for j in range(n):
            G[i, j] = spec.mul_table[mult[j], spec.power(pts[j], i)]
    return LinearCode(spec, G)


def from_rows(spec, rows):
    return LinearCode(spec, np.asarray(rows, dtype=np.int64))


def dual(code):
    """The dual code, generated by the reduced-echelon nullspace basis."""
    return LinearCode(code.spec, nullspace(code.spec, code.G))


def encode(message, code):
    """``message @ G``; ``message`` may carry leading batch axes."""
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape[-1] != code.k:
        raise ValueError(f"message length {msg.shape[-1]} != k={code.k}")
    flat = msg.reshape(-1, code.k)
    out = code.spec.matmul(flat, code.G)
    return out.reshape(msg.shape[:-1] + (code.n,))


def min_distance(code):
    if code.k == 0:
        raise ValueError("the zero code has no nonzero codeword")
    total = code.spec.q**code.k
    if total > DISTANCE_BUDGET:
        raise EnumerationBudgetError(
            f"enumerating {code.spec.q}^{code.k} codewords exceeds budget {DISTANCE_BUDGET}"
        )
    return int(kernels.min_weight(np.ascontiguousarray(code.G), np.asarray(code.spec.mul_table), code.spec.q))


def _check_positions(code, positions):
    pos = [int(p) for p in positions]
    bad = [p for p in pos if not 0 <= p < code.n]
    if bad:
        raise IndexError(f"positions {bad} out of range for length {code.n}")
    if len(set(pos)) != len(pos):
        raise ValueError("positions repeat")
    return pos


def is_information_set(code, positions):
    pos = _check_positions(code, positions)
    if len(pos) != code.k:
        raise ValueError(f"information set needs exactly k={code.k} positions, got {len(pos)}")
    return rank(code.spec, code.G[:, pos]) == code.k


def restrict(code, positions):
    """Code on the selected columns; dimension is the column-submatrix rank."""
    pos = _check_positions(code, positions)
    R, pivots = rref(code.spec, code.G[:, pos])
    return LinearCode(code.spec, R[: len(pivots)])


def invert_on_information_set(code, positions):
    """``M`` with ``G[:, positions] @ M = I``, so ``x = y[positions] @ M``."""
    pos = _check_positions(code, positions)
    if len(pos) != code.k:
        raise ValueError(f"need exactly k={code.k} positions")
    return inverse(code.spec, code.G[:, pos])


def singleton_like_bound(n, k, r, rho):
    return n - k + 1 - (ceil(k / r) - 1) * (rho - 1)


def _coset_structure(spec, nu, mu):
    """``mu`` disjoint size-``nu`` point sets and a degree-``nu`` polynomial
    constant on each of them (distinct constants).

    Uses additive cosets of ``{0..nu-1}`` when ``nu`` is a power of two, else
    multiplicative cosets of the order-``nu`` subgroup.
    """
    q = spec.q
    mul = spec.mul_table
    if nu & (nu - 1) == 0 and mu * nu <= q:
        groups = [list(range(j * nu, (j + 1) * nu)) for j in range(mu)]
        sub = list(range(nu))

        def g(a):
            out = 1
            for v in sub:
                out = int(mul[out, a ^ v])
            return out

        return groups, g
    if (q - 1) % nu == 0 and mu * nu <= q - 1:
        step = (q - 1) // nu
        prim = spec.primitive
        groups = [[spec.power(prim, j + step * i) for i in range(nu)] for j in range(mu)]
        return groups, lambda a: spec.power(a, nu)
    raise ValueError(
        f"no coset partition of {spec!r} into {mu} groups of size {nu}; "
        "need a power-of-two group size or one dividing q-1"
    )


def lrc_generator(spec, n, k, r, rho):
    """Optimal LRC with disjoint ``[r+rho-1, r]`` MDS repair groups.

    Positions are ordered group by group. When the number of groups equals
    ``k/r`` the code is the direct sum of GRS local codes; otherwise it is
    the evaluation code of ``sum a_ij x^i g(x)^j`` with ``g`` constant on each
    group (Tamo-Barg).
    """
    if r < 1 or rho < 1:
        raise ValueError("need r >= 1 and rho >= 1")
    if k % r:
        raise ValueError(f"r={r} must divide k={k}")
    nu = r + rho - 1
    if n % nu:
        raise ValueError(f"group size r+rho-1={nu} must divide n={n}")
    mu = n // nu
    blocks = k // r
    if mu < blocks:
        raise ValueError(f"{mu} repair groups cannot carry k/r={blocks} message blocks")

    if mu == blocks:
        if nu > spec.q:
            raise ValueError(f"local length {nu} exceeds field size {spec.q}")
        local = grs_generator(spec, nu, r).G
        G = np.zeros((k, n), dtype=np.int64)
        for j in range(mu):
            G[j * r:(j + 1) * r, j * nu:(j + 1) * nu] = local
        partition = tuple(tuple(range(j * nu, (j + 1) * nu)) for j in range(mu))
    else:
        groups, g = _coset_structure(spec, nu, mu)
        points = [a for grp in groups for a in grp]
        gvals = [g(a) for a in points]
        G = np.zeros((k, n), dtype=np.int64)
        for j in range(blocks):
            for i in range(r):
                for s, (a, ga) in enumerate(zip(points, gvals)):
                    G[j * r + i, s] = spec.mul_table[spec.power(a, i), spec.power(ga, j)]
        partition = tuple(tuple(range(j * nu, (j + 1) * nu)) for j in range(mu))
    return LinearCode(spec, G), LrcProfile(r, rho, partition)


# ---------------------------------------------------------------------------
# named codes
# ---------------------------------------------------------------------------


def spc_3_2():
    """The [3,2] single parity check code over GF(4): ``(x1, x2, x1 + x2)``."""
    return from_rows(field(1), [[1, 0, 1], [0, 1, 1]])


def rs_4_2_self_dual():
    """Self-dual [4,2] Reed-Solomon code over GF(4), systematic form.

    ``G = [[1, 0, a^2, a], [0, 1, a, a^2]]``. Same row space as the default
    ``grs_generator(field(1), 4, 2)``.
    """
    return from_rows(field(1), [[1, 0, 3, 2], [0, 1, 2, 3]])
