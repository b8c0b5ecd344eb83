"""Qubit registers for the Weyl/Bell fragment used by the retrieval protocol.

Two interchangeable backends:

``ExactRegister``
    Complex amplitudes. The register is kept as a set of independent tensor
    factors (components); a two-qubit operation merges the two factors it
    touches and measured qubits are projected out, so chains of entanglement
    swaps never hold more than four live qubits in one factor.

``SymbolicRegister``
    Every live qubit sits in a Bell pair ``(-1)^s W_first(w) |Phi>`` or in a
    computational basis state ``(-1)^s |j>``. Operations update ``(w, s)``
    with the Weyl composition rules; nothing grows with the qubit count.

Both backends draw exactly one uniform number per measurement and map it to
an outcome through the inverse CDF of the Born probabilities (listed in
label-index order). Because the symbolic rules reproduce those probabilities
exactly, the two backends return the same outcomes for the same seed.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import kernels

MAX_COMPONENT_QUBITS = 22
_SNAP = (0.0, 0.25, 0.5, 1.0)


class RegisterError(ValueError):
    """Invalid register operation (unknown, duplicate or measured qubit)."""


class UnsupportedOperation(RegisterError):
    """The symbolic backend only models the Bell-pair/basis-state fragment."""


class BackendMismatchError(AssertionError):
    """Exact and symbolic backends disagreed on an outcome."""


class WeylLabel(NamedTuple):
    """``W(a, b) = Z^a X^b``."""

    a: int
    b: int

    @property
    def index(self):
        return self.a | (self.b << 1)

    @classmethod
    def from_index(cls, i):
        return cls(i & 1, (i >> 1) & 1)

    def __add__(self, other):
        return WeylLabel(self.a ^ other[0], self.b ^ other[1])

    def __repr__(self):
        return f"W({self.a},{self.b})"


LABELS = tuple(WeylLabel.from_index(i) for i in range(4))
IDENTITY = LABELS[0]


class PhasedLabel(NamedTuple):
    label: WeylLabel
    phase: int


def as_label(w):
    if isinstance(w, WeylLabel):
        return w
    if isinstance(w, (int, np.integer)):
        return WeylLabel.from_index(int(w))
    a, b = w
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"not a Weyl label: {w!r}")
    return WeylLabel(int(a), int(b))


def weyl_sum(w1, w2):
    """``W(w1) W(w2) = (-1)^sign W(w1 + w2)``; returns ``PhasedLabel``."""
    return PhasedLabel(w1 + w2, w2.a & w1.b)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PHI = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)


def weyl_matrix(w):
    w = as_label(w)
    return np.linalg.matrix_power(PAULI_Z, w.a) @ np.linalg.matrix_power(PAULI_X, w.b)


_WEYL = tuple(weyl_matrix(w) for w in LABELS)


def bell_vector(w):
    """``W_1(w) |Phi>`` in the basis ``|j1 j2>`` (index ``2*j1 + j2``)."""
    return np.kron(_WEYL[as_label(w).index], np.eye(2)) @ PHI


_BELL = np.array([bell_vector(w) for w in LABELS])


def bell_projector(w):
    v = bell_vector(w)
    return np.outer(v, v.conj())


def _snap(p):
    for t in _SNAP:
        if abs(p - t) < 1e-9:
            return t
    return p


def sample_index(probs, u):
    """Inverse-CDF sample; ``probs`` are snapped to quarter multiples first."""
    probs = [_snap(float(p)) for p in probs]
    cum = 0.0
    last = 0
    for i, p in enumerate(probs):
        if p > 0:
            last = i
        cum += p
        if u < cum:
            return i
    return last


def make_rng(seed):
    """The simulator's random source: numpy ``PCG64`` seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------------------
# register base
# ---------------------------------------------------------------------------


class QuantumRegister:
    backend = "abstract"

    def __init__(self, trace=False):
        self.qubits_prepared = 0
        self.pairs_prepared = 0
        self.trace = [] if trace else None

    def _log(self, op, qubits, label=None, outcome=None):
        if self.trace is not None:
            self.trace.append((op, tuple(qubits), label, outcome))

    def _require_new(self, *qs):
        if len(set(qs)) != len(qs):
            raise RegisterError(f"repeated qubit id in {qs!r}")
        for q in qs:
            if self.is_live(q):
                raise RegisterError(f"qubit {q!r} already allocated")

    def _require_live(self, *qs):
        if len(set(qs)) != len(qs):
            raise RegisterError(f"same qubit passed twice: {qs!r}")
        for q in qs:
            if not self.is_live(q):
                raise RegisterError(f"qubit {q!r} is not live")

    def new_bell_pair(self, q1, q2):
        self._require_new(q1, q2)
        self._new_pair(q1, q2)
        self.qubits_prepared += 2
        self.pairs_prepared += 1
        self._log("bell_pair", (q1, q2))

    def new_qubit(self, q):
        """Allocate ``q`` in ``|0>``."""
        self._require_new(q)
        self._new_single(q)
        self.qubits_prepared += 1
        self._log("qubit", (q,))

    def apply_weyl(self, q, w):
        self._require_live(q)
        w = as_label(w)
        self._apply(q, w)
        self._log("weyl", (q,), w)

    def bell_measure(self, q1, q2, rng):
        self._require_live(q1, q2)
        u = rng.random()
        g = self._bell(q1, q2, u)
        self._log("bell_measure", (q1, q2), outcome=g)
        return g

    def basis_measure(self, q, rng):
        self._require_live(q)
        u = rng.random()
        c = self._basis(q, u)
        self._log("basis_measure", (q,), outcome=c)
        return c

    # backend hooks
    def is_live(self, q):
        raise NotImplementedError

    def live_qubits(self):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# exact amplitudes
# ---------------------------------------------------------------------------


class _Component:
    __slots__ = ("qubits", "state")

    def __init__(self, qubits, state):
        self.qubits = list(qubits)
        self.state = state


class ExactRegister(QuantumRegister):
    backend = "exact"

    def __init__(self, trace=False):
        super().__init__(trace)
        self._where = {}

    def is_live(self, q):
        return q in self._where

    def live_qubits(self):
        return set(self._where)

    def components(self):
        seen = {}
        for comp in self._where.values():
            seen[id(comp)] = comp
        return list(seen.values())

    def _add(self, comp):
        for q in comp.qubits:
            self._where[q] = comp

    def _new_pair(self, q1, q2):
        self._add(_Component([q1, q2], PHI.copy()))

    def _new_single(self, q):
        self._add(_Component([q], np.array([1, 0], dtype=np.complex128)))

    def _merge(self, qa, qb):
        ca, cb = self._where[qa], self._where[qb]
        if ca is cb:
            return ca
        if len(ca.qubits) + len(cb.qubits) > MAX_COMPONENT_QUBITS:
            raise RegisterError(f"exact backend limited to {MAX_COMPONENT_QUBITS} entangled qubits")
        comp = _Component(ca.qubits + cb.qubits, np.kron(ca.state, cb.state))
        self._add(comp)
        return comp

    def _apply(self, q, w):
        self.apply_unitary(q, _WEYL[w.index])

    def apply_unitary(self, q, U):
        comp = self._where[q]
        axis = comp.qubits.index(q)
        comp.state = kernels.apply_1q(comp.state, len(comp.qubits), axis, np.ascontiguousarray(U, dtype=np.complex128))

    def _project(self, comp, qs, basis, u):
        """Measure ``qs`` of ``comp`` against the rows of ``basis``."""
        n = len(comp.qubits)
        axes = [comp.qubits.index(q) for q in qs]
        psi = np.moveaxis(comp.state.reshape((2,) * n), axes, range(len(qs)))
        M = psi.reshape(1 << len(qs), -1)
        amps = basis.conj() @ M
        probs = np.real(np.einsum("ij,ij->i", amps, amps.conj()))
        i = sample_index(probs, u)
        post = amps[i] / np.sqrt(probs[i])
        for q in qs:
            del self._where[q]
        rest = [q for q in comp.qubits if q not in qs]
        if rest:
            self._add(_Component(rest, np.ascontiguousarray(post)))
        return i

    def _bell(self, q1, q2, u):
        comp = self._merge(q1, q2)
        return LABELS[self._project(comp, (q1, q2), _BELL, u)]

    def _basis(self, q, u):
        return self._project(self._where[q], (q,), np.eye(2, dtype=np.complex128), u)

    def state_of(self, qubits):
        """Amplitudes of a whole component, axes ordered as ``qubits``."""
        comp = self._where[qubits[0]]
        if sorted(map(repr, comp.qubits)) != sorted(map(repr, qubits)):
            raise RegisterError("qubits do not form a complete component")
        n = len(comp.qubits)
        axes = [comp.qubits.index(q) for q in qubits]
        return np.moveaxis(comp.state.reshape((2,) * n), axes, range(n)).reshape(-1)

    def norm_error(self):
        return max((abs(np.vdot(c.state, c.state).real - 1.0) for c in self.components()), default=0.0)


# ---------------------------------------------------------------------------
# symbolic Weyl frame
# ---------------------------------------------------------------------------


class _Pair:
    __slots__ = ("first", "second", "label", "phase")

    def __init__(self, first, second, label=IDENTITY, phase=0):
        self.first = first
        self.second = second
        self.label = label
        self.phase = phase

    def partner(self, q):
        return self.second if q == self.first else self.first

    def oriented(self, q):
        """``(label, phase)`` with the Weyl operator moved onto ``q``."""
        w = self.label
        if q == self.first:
            return w, self.phase
        return w, self.phase ^ (w.a & w.b)


class SymbolicRegister(QuantumRegister):
    backend = "symbolic"

    def __init__(self, trace=False):
        super().__init__(trace)
        self._pairs = {}
        self._singles = {}

    def is_live(self, q):
        return q in self._pairs or q in self._singles

    def live_qubits(self):
        return set(self._pairs) | set(self._singles)

    def pair_state(self, q):
        """``(first, second, PhasedLabel)`` of the pair holding ``q``."""
        p = self._pairs[q]
        return p.first, p.second, PhasedLabel(p.label, p.phase)

    def single_state(self, q):
        return tuple(self._singles[q])

    def _new_pair(self, q1, q2):
        p = _Pair(q1, q2)
        self._pairs[q1] = p
        self._pairs[q2] = p

    def _new_single(self, q):
        self._singles[q] = [0, 0]

    def _apply(self, q, c):
        if q in self._singles:
            s = self._singles[q]
            s[0] ^= c.b
            s[1] ^= c.a & s[0]
            return
        p = self._pairs[q]
        w = p.label
        if q == p.first:
            p.phase ^= w.a & c.b
        else:
            p.phase ^= (c.a & c.b) ^ (c.a & w.b)
        p.label = w + c

    def _bell(self, q1, q2, u):
        if q1 in self._singles or q2 in self._singles:
            return self._bell_singles(q1, q2, u)
        P, Q = self._pairs[q1], self._pairs[q2]
        if P is Q:
            w = P.label
            sample_index([1.0 if g == w else 0.0 for g in LABELS], u)
            del self._pairs[q1], self._pairs[q2]
            return w
        # entanglement swap: outcome uniform, outer qubits re-paired
        g = LABELS[sample_index([0.25] * 4, u)]
        uu, s1 = P.oriented(q1)
        v, s2 = Q.oriented(q2)
        x, y = P.partner(q1), Q.partner(q2)
        h = g + uu
        phase = s1 ^ s2 ^ (g.a & g.b) ^ (uu.a & g.b) ^ (h.a & h.b) ^ (v.a & h.b)
        for q in (q1, q2, x, y):
            del self._pairs[q]
        pair = _Pair(x, y, h + v, phase)
        self._pairs[x] = pair
        self._pairs[y] = pair
        return g

    def _bell_singles(self, q1, q2, u):
        if not (q1 in self._singles and q2 in self._singles):
            raise UnsupportedOperation("Bell measurement of a basis-state qubit with half of a Bell pair")
        j1, j2 = self._singles.pop(q1)[0], self._singles.pop(q2)[0]
        gb = j1 ^ j2
        probs = [0.5 if (i >> 1) == gb else 0.0 for i in range(4)]
        return LABELS[sample_index(probs, u)]

    def _basis(self, q, u):
        if q in self._singles:
            j = self._singles[q][0]
            sample_index([1.0 - j, float(j)], u)
            del self._singles[q]
            return j
        p = self._pairs[q]
        w, s = p.oriented(q)
        c = sample_index([0.5, 0.5], u)
        other = p.partner(q)
        del self._pairs[q], self._pairs[other]
        self._singles[other] = [c ^ w.b, s ^ (w.a & c)]
        return c

    def state_of(self, qubits):
        """Amplitudes implied by the frame, for comparison with the exact backend."""
        qubits = list(qubits)
        if len(qubits) == 1 and qubits[0] in self._singles:
            j, s = self._singles[qubits[0]]
            v = np.zeros(2, dtype=np.complex128)
            v[j] = (-1) ** s
            return v
        first, second, (w, s) = self.pair_state(qubits[0])
        if set(qubits) != {first, second}:
            raise RegisterError("qubits do not form a Bell pair")
        v = (-1) ** s * bell_vector(w)
        if qubits[0] != first:
            v = v.reshape(2, 2).T.reshape(-1)
        return v


# ---------------------------------------------------------------------------
# lockstep cross-check
# ---------------------------------------------------------------------------


class CrossCheckRegister(QuantumRegister):
    """Runs the exact and symbolic backends side by side on shared randomness."""

    backend = "both"

    def __init__(self, trace=False):
        super().__init__(trace)
        self.exact = ExactRegister()
        self.symbolic = SymbolicRegister()

    def is_live(self, q):
        return self.exact.is_live(q)

    def live_qubits(self):
        return self.exact.live_qubits()

    def _new_pair(self, q1, q2):
        self.exact.new_bell_pair(q1, q2)
        self.symbolic.new_bell_pair(q1, q2)

    def _new_single(self, q):
        self.exact.new_qubit(q)
        self.symbolic.new_qubit(q)

    def _apply(self, q, w):
        self.exact.apply_weyl(q, w)
        self.symbolic.apply_weyl(q, w)

    def _bell(self, q1, q2, u):
        a = self.exact._bell(q1, q2, u)
        b = self.symbolic._bell(q1, q2, u)
        if a != b:
            raise BackendMismatchError(f"bell_measure({q1!r}, {q2!r}): exact {a} vs symbolic {b}")
        return a

    def _basis(self, q, u):
        a = self.exact._basis(q, u)
        b = self.symbolic._basis(q, u)
        if a != b:
            raise BackendMismatchError(f"basis_measure({q!r}): exact {a} vs symbolic {b}")
        return a


BACKENDS = {"exact": ExactRegister, "symbolic": SymbolicRegister, "both": CrossCheckRegister}


def make_register(backend="symbolic", trace=False):
    try:
        cls = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; choose from {sorted(BACKENDS)}") from None
    return cls(trace=trace)


def _check_fresh(reg, qa, qb):
    if isinstance(reg, CrossCheckRegister):
        _check_fresh(reg.symbolic, qa, qb)
        _check_fresh(reg.exact, qa, qb)
    elif isinstance(reg, SymbolicRegister):
        first, second, (w, s) = reg.pair_state(qa)
        if {first, second} != {qa, qb} or w != IDENTITY or s:
            raise RegisterError(f"({qa!r}, {qb!r}) is not a fresh |Phi> pair")
    elif isinstance(reg, ExactRegister):
        try:
            v = reg.state_of([qa, qb])
        except RegisterError:
            raise RegisterError(f"({qa!r}, {qb!r}) is not a fresh |Phi> pair") from None
        if not np.allclose(v, PHI, atol=1e-12):
            raise RegisterError(f"({qa!r}, {qb!r}) is not a fresh |Phi> pair")


def two_sum_transmit(reg, pair, a, b, rng):
    """Send ``a + b`` through a shared ``|Phi>``: Alice applies ``W(a)``, Bob
    ``W(b)``, the receiver Bell-measures both halves."""
    qa, qb = pair
    _check_fresh(reg, qa, qb)
    reg.apply_weyl(qa, a)
    reg.apply_weyl(qb, b)
    return reg.bell_measure(qa, qb, rng)
