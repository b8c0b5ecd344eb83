"""QPIR from [n,k]-MDS coded storage with t = n - k collusion.

One retrieval fetches the codeword symbol of the wanted file stored at each
of the first ``k`` working servers, stripe by stripe, then inverts the code on
those positions. For piece ``p``, stripe ``b`` and GF(4) component ``l``:

* servers ``1..n`` are linked by a chain of Bell pairs ``(R_s, L_{s+1})``;
* every server adds its answer ``H_s`` as a Weyl rotation; interior servers
  swap the chain onward with a Bell measurement (outcome ``G_s``) and push
  ``G_s`` into a cross pair ``(H_2c, H_2c+1)`` shared with their neighbour
  (or, for odd ``n``, into an auxiliary pair held by server ``n-1``);
* the user reads the cross pairs, which yields ``sum G_s``, undoes it on the
  last chain qubit and Bell-measures ``(H_1, H_n)``. The outcome is
  ``sum_s H_s``, which equals the wanted symbol because the masked queries
  cancel against the storage code.

Qubit ids are tuples ``(role, server, l, b, p)`` with 1-based indices; role
``"R"``/``"L"`` are chain halves, ``"H"`` the transmit qubit and ``"A"`` the
auxiliary qubit. ``H_1`` is the chain qubit ``R_1`` and ``H_n`` is ``L_n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .codes import LinearCode, dual, encode, invert_on_information_set, restrict
from .finite_field import FieldElement, min_extension, phi_int
from .quantum import IDENTITY, LABELS, WeylLabel, make_register, make_rng

ODD_MODES = ("quantum", "basis")


class ProtocolAssertionError(AssertionError):
    """A run-time invariant of the protocol failed."""


# ---------------------------------------------------------------------------
# configuration and data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DssConfig:
    """Storage system plus protocol parameters.

    ``code`` is the storage code over all physical servers. The protocol runs
    on ``servers`` (0-based physical indices, default the first ``k + t``);
    pieces are read from the first ``k`` of them.
    """

    code: LinearCode
    m: int
    beta: int = 1
    t: int | None = None
    servers: tuple | None = None
    odd_n_mode: str = "quantum"

    def __post_init__(self):
        code = self.code
        t = code.n - code.k if self.t is None else int(self.t)
        if t < 0 or code.k + t > code.n:
            raise ValueError(f"need 0 <= t <= n'-k, got t={t} for a [{code.n},{code.k}] code")
        servers = tuple(range(code.k + t)) if self.servers is None else tuple(int(s) for s in self.servers)
        if len(servers) != code.k + t:
            raise ValueError(f"exactly k+t={code.k + t} working servers required, got {len(servers)}")
        if len(set(servers)) != len(servers) or any(not 0 <= s < code.n for s in servers):
            raise ValueError(f"invalid working server set {servers}")
        if self.m < 1 or self.beta < 1:
            raise ValueError("need m >= 1 and beta >= 1")
        if self.odd_n_mode not in ODD_MODES:
            raise ValueError(f"odd_n_mode must be one of {ODD_MODES}")
        if 4**code.spec.L < code.n:
            raise ValueError(f"field {code.spec!r} too small for {code.n} servers")
        working = restrict(code, servers)
        if working.k != code.k:
            raise ValueError("working servers do not carry the full code dimension")
        if not _full_rank(code, servers[: code.k]):
            raise ValueError("first k working servers are not an information set")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "servers", servers)
        object.__setattr__(self, "_working", working)
        object.__setattr__(self, "_dual", dual(working))

    @property
    def spec(self):
        return self.code.spec

    @property
    def L(self):
        return self.code.spec.L

    @property
    def k(self):
        return self.code.k

    @property
    def n(self):
        """Number of servers taking part in the protocol (``k + t``)."""
        return self.k + self.t

    @property
    def n_total(self):
        return self.code.n

    @property
    def working_code(self):
        return self._working

    @property
    def dual_generator(self):
        return self._dual.G

    @property
    def minimal_field(self):
        return self.L == min_extension(self.n_total)


def _full_rank(code, cols):
    from .finite_field import rank

    return rank(code.spec, code.G[:, list(cols)]) == code.k


@dataclass(frozen=True)
class ResourceReport:
    q_in: int
    q_ent: int
    q_out: int
    file_bits: int
    upload_bits: int

    @property
    def rate(self):
        return Fraction(self.file_bits, self.q_out)

    def __add__(self, other):
        return ResourceReport(
            self.q_in + other.q_in,
            self.q_ent + other.q_ent,
            self.q_out + other.q_out,
            self.file_bits + other.file_bits,
            self.upload_bits + other.upload_bits,
        )


def expected_resources(n, k, L, beta, odd_n_mode="quantum"):
    """Closed-form ``(q_in, q_ent, q_out)`` for ``n`` working servers."""
    s = k * L * beta
    if n == 1:
        q_in, q_ent, q_out = 2 * s, s, 2 * s
    elif n % 2 == 0:
        q_in, q_ent, q_out = s * (3 * n - 4), s * (3 * n - 4) // 2, s * n
    else:
        q_in, q_ent, q_out = 3 * s * (n - 1), 3 * s * (n - 1) // 2, s * (n + 1)
    if n % 2 == 1 and odd_n_mode == "basis":
        q_ent -= s
    return q_in, q_ent, q_out


def rate(cfg_or_n):
    """Achieved rate: ``2/n`` for even ``n = k + t``, else ``2/(n+1)``."""
    n = cfg_or_n.n if isinstance(cfg_or_n, DssConfig) else int(cfg_or_n)
    return Fraction(2, n) if n % 2 == 0 else Fraction(2, n + 1)


@dataclass
class QuerySet:
    K: int
    Q: np.ndarray  # (k, n, m): piece p, working server s, file i
    Z: np.ndarray  # (k, m, t)


@dataclass
class RoundRecord:
    p: int
    b: int
    l: int
    H: tuple
    G: dict
    cross_sums: tuple
    aggregate: WeylLabel
    outcome: WeylLabel


@dataclass
class RetrievalTranscript:
    K: int
    seed: int | None
    backend: str
    queries: QuerySet
    H_values: np.ndarray  # (k, beta, n) field elements
    rounds: list = dc_field(default_factory=list)
    retrieved: np.ndarray | None = None  # (beta, k)
    decoded: np.ndarray | None = None  # (beta, k)
    resources: ResourceReport | None = None


# ---------------------------------------------------------------------------
# storage and queries
# ---------------------------------------------------------------------------


def encode_storage(cfg, files):
    """``files``: ``(m, beta, k)`` -> stored symbols ``(m, beta, n')``."""
    x = np.asarray(files, dtype=np.int64)
    if x.shape != (cfg.m, cfg.beta, cfg.k):
        raise ValueError(f"files must have shape (m, beta, k)={(cfg.m, cfg.beta, cfg.k)}, got {x.shape}")
    if x.size and (x.min() < 0 or x.max() >= cfg.spec.q):
        raise ValueError(f"file symbols outside {cfg.spec!r}")
    return encode(x, cfg.code)


def random_files(cfg, rng):
    return cfg.spec.random(rng, (cfg.m, cfg.beta, cfg.k))


def _check_K(cfg, K):
    if not 1 <= K <= cfg.m:
        raise ValueError(f"file index K={K} outside 1..{cfg.m}")


def generate_queries(cfg, K, rng, Z=None):
    """``[Q_1 .. Q_n] = [Z_1 .. Z_t] Gd + xi_{K,p}`` for every piece ``p``."""
    _check_K(cfg, K)
    k, n, m, t = cfg.k, cfg.n, cfg.m, cfg.t
    if Z is None:
        Z = np.stack([cfg.spec.random(rng, (m, t)) for _ in range(k)]) if k else np.zeros((0, m, t), np.int64)
    Z = np.asarray(Z, dtype=np.int64).reshape(k, m, t)
    Q = np.zeros((k, n, m), dtype=np.int64)
    for p in range(k):
        block = cfg.spec.matmul(Z[p], cfg.dual_generator) if t else np.zeros((m, n), np.int64)
        block[K - 1, p] ^= 1
        Q[p] = block.T
    return QuerySet(K, Q, Z)


def answer(cfg, Q_s, stored_s):
    """``H_s = <Q_s, (y^1_{b,s}, ..., y^m_{b,s})>``."""
    return cfg.spec.dot(Q_s, stored_s)


# ---------------------------------------------------------------------------
# entanglement layout
# ---------------------------------------------------------------------------


def qid(role, s, l, b, p):
    return (role, s, l, b, p)


def _end_qubit(cfg, s, l, b, p):
    if cfg.n == 1:
        return qid("H", 1, l, b, p)
    return qid("R", 1, l, b, p) if s == 1 else qid("L", cfg.n, l, b, p)


def _aux_server(cfg):
    if cfg.n == 1:
        return 1
    return cfg.n - 1 if cfg.n % 2 else None


@dataclass
class SliceLayout:
    chain: list
    cross: list
    aux: tuple | None
    shipped: list


def slice_layout(cfg, p, b, l):
    n = cfg.n
    chain = [(qid("R", s, l, b, p), qid("L", s + 1, l, b, p)) for s in range(1, n)]
    cross = [(qid("H", 2 * c, l, b, p), qid("H", 2 * c + 1, l, b, p)) for c in range(1, n // 2)]
    a = _aux_server(cfg)
    aux = (qid("H", a, l, b, p), qid("A", a, l, b, p)) if a is not None else None
    if n == 1:
        shipped = list(aux)
    else:
        shipped = [_end_qubit(cfg, 1, l, b, p)]
        shipped += [qid("H", s, l, b, p) for s in range(2, n)]
        shipped.append(_end_qubit(cfg, n, l, b, p))
        if aux is not None:
            shipped.append(aux[1])
    return SliceLayout(chain, cross, aux, shipped)


def prepare_entanglement(cfg, reg, rounds=None):
    """Allocate the qubits of the given ``(p, b)`` rounds (default: all).

    Returns ``(layout, report)`` where ``layout`` maps ``(p, b, l)`` to its
    :class:`SliceLayout` and ``report`` counts what was prepared.
    """
    if reg.live_qubits():
        raise ValueError("register must be empty before preparation")
    if rounds is None:
        rounds = [(p, b) for p in range(1, cfg.k + 1) for b in range(1, cfg.beta + 1)]
    start_in, start_ent = reg.qubits_prepared, reg.pairs_prepared
    layout = {}
    q_out = 0
    for p, b in rounds:
        for l in range(1, cfg.L + 1):
            sl = slice_layout(cfg, p, b, l)
            for pair in sl.chain + sl.cross:
                reg.new_bell_pair(*pair)
            if sl.aux is not None:
                if cfg.odd_n_mode == "basis":
                    reg.new_qubit(sl.aux[0])
                    reg.new_qubit(sl.aux[1])
                else:
                    reg.new_bell_pair(*sl.aux)
            layout[(p, b, l)] = sl
            q_out += len(sl.shipped)
    report = ResourceReport(
        q_in=reg.qubits_prepared - start_in,
        q_ent=reg.pairs_prepared - start_ent,
        q_out=q_out,
        file_bits=2 * cfg.L * len(rounds),
        upload_bits=0,
    )
    return layout, report


# ---------------------------------------------------------------------------
# server and user actions
# ---------------------------------------------------------------------------


def _labels(value, L):
    return [LABELS[sym] for sym in phi_int(value, L)]


def server_response(cfg, s, p, b, Q_s, storage, reg, rng):
    """Server ``s`` (1-based position among the working servers) answers round
    ``(p, b)``. ``storage`` is the ``(m, beta, n')`` array of stored symbols.

    Returns ``(H_s, G)`` where ``G`` lists the per-component Bell outcomes of an
    interior server and is ``None`` for the two end servers.
    """
    n = cfg.n
    phys = cfg.servers[s - 1]
    H = answer(cfg, Q_s, storage[:, b - 1, phys])
    labels = _labels(H, cfg.L)
    if n == 1:
        for l, h in enumerate(labels, 1):
            _push_aux(cfg, reg, h, l, b, p)
        return H, None
    if s in (1, n):
        for l, h in enumerate(labels, 1):
            reg.apply_weyl(_end_qubit(cfg, s, l, b, p), h)
        return H, None
    G = []
    for l, h in enumerate(labels, 1):
        left, right = qid("L", s, l, b, p), qid("R", s, l, b, p)
        reg.apply_weyl(left, h)
        g = reg.bell_measure(left, right, rng)
        G.append(g)
        if s == _aux_server(cfg):
            _push_aux(cfg, reg, g, l, b, p)
        else:
            reg.apply_weyl(qid("H", s, l, b, p), g)
    return H, G


def _push_aux(cfg, reg, g, l, b, p):
    s = _aux_server(cfg)
    hq, aq = qid("H", s, l, b, p), qid("A", s, l, b, p)
    if cfg.odd_n_mode == "basis":
        # basis state |g.a g.b>: X^a on the transmit qubit, X^b on the auxiliary one
        reg.apply_weyl(hq, WeylLabel(0, g.a))
        reg.apply_weyl(aq, WeylLabel(0, g.b))
    else:
        reg.apply_weyl(hq, g)
        reg.apply_weyl(aq, IDENTITY)


def _read_aux(cfg, reg, l, b, p, rng):
    s = _aux_server(cfg)
    hq, aq = qid("H", s, l, b, p), qid("A", s, l, b, p)
    if cfg.odd_n_mode == "basis":
        return WeylLabel(reg.basis_measure(hq, rng), reg.basis_measure(aq, rng))
    return reg.bell_measure(hq, aq, rng)


def user_decode(cfg, reg, p, b, rng, record=None):
    """Decode round ``(p, b)`` after all server responses.

    Returns the recovered symbol ``y^K_{b,p}`` as a :class:`FieldElement`.
    Per-component details are appended to ``record`` when given.
    """
    n = cfg.n
    outcomes = []
    for l in range(1, cfg.L + 1):
        if n == 1:
            out = _read_aux(cfg, reg, l, b, p, rng)
            cross, agg = (), IDENTITY
        else:
            cross = []
            for c in range(1, n // 2):
                cross.append(reg.bell_measure(qid("H", 2 * c, l, b, p), qid("H", 2 * c + 1, l, b, p), rng))
            if _aux_server(cfg) is not None:
                cross.append(_read_aux(cfg, reg, l, b, p, rng))
            agg = IDENTITY
            for g in cross:
                agg = agg + g
            first, last = _end_qubit(cfg, 1, l, b, p), _end_qubit(cfg, n, l, b, p)
            reg.apply_weyl(last, agg)
            out = reg.bell_measure(first, last, rng)
        outcomes.append(out)
        if record is not None:
            record.append({"l": l, "cross_sums": tuple(cross), "aggregate": agg, "outcome": out})
    value = 0
    for j, w in enumerate(outcomes):
        value |= w.index << (2 * j)
    return FieldElement(cfg.spec, value)


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


def retrieve_symbols(cfg, storage, K, rng, backend="symbolic"):
    """Fetch ``y^K_{b,p}`` for every stripe ``b`` and piece ``p``.

    Returns ``(retrieved, transcript)`` with ``retrieved`` of shape
    ``(beta, k)``. The file is not decoded here.
    """
    _check_K(cfg, K)
    storage = np.asarray(storage, dtype=np.int64)
    if storage.shape != (cfg.m, cfg.beta, cfg.n_total):
        raise ValueError(f"storage must have shape {(cfg.m, cfg.beta, cfg.n_total)}, got {storage.shape}")
    queries = generate_queries(cfg, K, rng)
    k, n, L = cfg.k, cfg.n, cfg.L
    H_values = np.zeros((k, cfg.beta, n), dtype=np.int64)
    retrieved = np.zeros((cfg.beta, k), dtype=np.int64)
    transcript = RetrievalTranscript(K=K, seed=None, backend=backend, queries=queries, H_values=H_values)
    total = None
    for p in range(1, k + 1):
        for b in range(1, cfg.beta + 1):
            reg = make_register(backend)
            _, report = prepare_entanglement(cfg, reg, rounds=[(p, b)])
            total = report if total is None else total + report
            G = {}
            for s in range(1, n + 1):
                H, g = server_response(cfg, s, p, b, queries.Q[p - 1, s - 1], storage, reg, rng)
                H_values[p - 1, b - 1, s - 1] = H
                if g is not None:
                    G[s] = g
            record = []
            y = user_decode(cfg, reg, p, b, rng, record=record)
            if reg.live_qubits():
                raise ProtocolAssertionError(f"qubits left unmeasured after round {(p, b)}")
            expected = int(storage[K - 1, b - 1, cfg.servers[p - 1]])
            telescoped = int(np.bitwise_xor.reduce(H_values[p - 1, b - 1]))
            if telescoped != expected:
                raise ProtocolAssertionError(f"sum of answers {telescoped:#x} != stored symbol {expected:#x}")
            if y.value != expected:
                raise ProtocolAssertionError(f"measured {y.value:#x} != stored symbol {expected:#x} in round {(p, b)}")
            retrieved[b - 1, p - 1] = y.value
            Hl = [_labels(int(h), L) for h in H_values[p - 1, b - 1]]
            for rec in record:
                l = rec["l"]
                transcript.rounds.append(
                    RoundRecord(
                        p=p,
                        b=b,
                        l=l,
                        H=tuple(h[l - 1] for h in Hl),
                        G={s: g[l - 1] for s, g in G.items()},
                        cross_sums=rec["cross_sums"],
                        aggregate=rec["aggregate"],
                        outcome=rec["outcome"],
                    )
                )
    upload = k * cfg.m * n * 2 * L
    transcript.resources = ResourceReport(total.q_in, total.q_ent, total.q_out, total.file_bits, upload)
    transcript.retrieved = retrieved
    return retrieved, transcript


def decode_file(cfg, retrieved):
    """Decode ``x^K = y^K_I M`` on the first ``k`` working servers."""
    M = invert_on_information_set(cfg.code, cfg.servers[: cfg.k])
    return cfg.spec.matmul(np.asarray(retrieved, dtype=np.int64), M)


def run_retrieval(cfg, files, K, seed, backend="symbolic"):
    """Store ``files`` (shape ``(m, beta, k)``), privately retrieve file ``K``
    (1-based) and return ``(x^K, transcript)``; ``x^K`` has shape ``(beta, k)``.
    """
    storage = encode_storage(cfg, files)
    rng = make_rng(seed)
    retrieved, transcript = retrieve_symbols(cfg, storage, K, rng, backend=backend)
    transcript.seed = seed
    transcript.decoded = decode_file(cfg, retrieved)
    return transcript.decoded, transcript
