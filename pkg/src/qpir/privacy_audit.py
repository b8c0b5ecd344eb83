"""Privacy checks.

User privacy is a statement about classical queries: the joint distribution
of ``{Q_s : s in T}`` must not depend on the wanted index ``K`` when
``|T| <= t``. The exhaustive audit enumerates every mask ``Z`` and compares the
resulting distributions with exact rational arithmetic; nothing is sampled.

Server privacy concerns what the user sees besides the wanted file. Paired
runs that differ only in the other files must give identical observations,
and the Bell outcomes must be uniform.

Server sets ``T`` are 1-based positions among the working servers.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product

import numpy as np
from scipy import stats

from . import kernels
from .codes import EnumerationBudgetError
from .protocol import run_retrieval
from .quantum import make_rng

EXHAUSTIVE_BUDGET = 1 << 20
SAMPLED_TV_THRESHOLD = 0.02
CHI2_ALPHA = 0.01
MIN_SERVER_TRIALS = 1000


@dataclass(frozen=True)
class DistributionTable:
    """Exact distribution of a flattened query block over ``q`` symbols.

    ``keys`` are the sorted base-``q`` encodings of the support rows and
    ``counts`` their multiplicities out of ``total`` equally likely masks.
    """

    q: int
    width: int
    keys: np.ndarray
    counts: np.ndarray
    total: int

    def __post_init__(self):
        if int(self.counts.sum()) != self.total:
            raise AssertionError("probabilities do not sum to one")

    @property
    def support(self):
        digits = self.keys[:, None] // (self.q ** np.arange(self.width, dtype=np.int64))[None, :]
        return digits % self.q

    @property
    def probabilities(self):
        return [Fraction(int(c), self.total) for c in self.counts]

    def as_dict(self):
        return {tuple(int(v) for v in row): Fraction(int(c), self.total) for row, c in zip(self.support, self.counts)}

    def is_uniform(self):
        return len(self.counts) == self.q**self.width and bool(np.all(self.counts == self.counts[0]))


def total_variation(a, b):
    """Exact total-variation distance between two tables."""
    union = np.union1d(a.keys, b.keys)
    ca = np.zeros(union.size, dtype=object)
    cb = np.zeros(union.size, dtype=object)
    ca[np.searchsorted(union, a.keys)] = [int(c) * b.total for c in a.counts]
    cb[np.searchsorted(union, b.keys)] = [int(c) * a.total for c in b.counts]
    return Fraction(int(np.abs(ca - cb).sum()), 2 * a.total * b.total)


def _table(rows, total, q):
    width = rows.shape[1]
    if q**width >= 1 << 62:
        raise EnumerationBudgetError(f"query block of {width} symbols is too wide to tabulate")
    keys = rows @ (q ** np.arange(width, dtype=np.int64))
    keys, counts = np.unique(keys, return_counts=True)
    return DistributionTable(q, width, keys, counts.astype(np.int64), total)


def _check_T(cfg, T):
    T = tuple(sorted(int(s) for s in T))
    if len(set(T)) != len(T) or any(not 1 <= s <= cfg.n for s in T):
        raise ValueError(f"server set {T} not within 1..{cfg.n}")
    return T


def query_distribution(cfg, K, p, T):
    """Exact joint distribution of ``(Q_s^{(p)})_{s in T}`` for file ``K``.

    Built from the dual generator by enumerating all ``q^(m t)`` masks; the
    query generator itself is not used.
    """
    T = _check_T(cfg, T)
    q, m, t = cfg.spec.q, cfg.m, cfg.t
    total = q ** (m * t)
    if total > EXHAUSTIVE_BUDGET:
        raise EnumerationBudgetError(f"{q}^{m * t} masks exceed the exhaustive budget {EXHAUSTIVE_BUDGET}")
    width = len(T)
    if width == 0:
        return DistributionTable(q, 0, np.zeros(1, np.int64), np.array([total]), total)
    cols = np.ascontiguousarray(cfg.dual_generator[:, [s - 1 for s in T]]) if t else np.zeros((0, width), np.int64)
    if t:
        rows = kernels.masked_queries(cols, m, np.asarray(cfg.spec.mul_table), q)
    else:
        rows = np.zeros((1, m * width), dtype=np.int64)
    if p in T:
        rows = rows.copy()
        rows[:, (K - 1) * width + T.index(p)] ^= 1
    return _table(rows, total, q)


def _sampled_distance(cfg, p, T, rng, samples):
    """Largest estimated TV between any two indices ``K``.

    The plug-in estimate is biased upwards by about ``0.4 sqrt(cells / N)``,
    so joint blocks are compared only with 2000 samples per cell and single
    query symbols otherwise.
    """
    q, m, t = cfg.spec.q, cfg.m, cfg.t
    width = len(T)
    cols = cfg.dual_generator[:, [s - 1 for s in T]]
    blocks = {}
    for K in range(1, m + 1):
        Z = cfg.spec.random(rng, (samples, m, t))
        rows = np.stack([cfg.spec.matmul(z, cols) for z in Z]).reshape(samples, m * width)
        if p in T:
            rows[:, (K - 1) * width + T.index(p)] ^= 1
        blocks[K] = rows
    joint = q ** (m * width) * 2000 <= samples

    def tv(a, b):
        if joint:
            ka = np.unique(a, axis=0, return_counts=True)
            kb = np.unique(b, axis=0, return_counts=True)
            pa = {tuple(r): c / samples for r, c in zip(*ka)}
            pb = {tuple(r): c / samples for r, c in zip(*kb)}
            return 0.5 * sum(abs(pa.get(x, 0) - pb.get(x, 0)) for x in pa.keys() | pb.keys())
        best = 0.0
        for c in range(a.shape[1]):
            ha = np.bincount(a[:, c], minlength=q) / samples
            hb = np.bincount(b[:, c], minlength=q) / samples
            best = max(best, 0.5 * float(np.abs(ha - hb).sum()))
        return best

    Ks = sorted(blocks)
    dist = max((tv(blocks[a], blocks[b]) for a, b in combinations(Ks, 2)), default=0.0)
    return dist, "joint" if joint else "marginal"


@dataclass
class PieceResult:
    p: int
    distance: Fraction | float
    uniform: bool | None


@dataclass
class UserPrivacyReport:
    T: tuple
    t: int
    mode: str
    pieces: list = dc_field(default_factory=list)
    conclusive: bool = True
    note: str = ""

    @property
    def max_distance(self):
        return max((pc.distance for pc in self.pieces), default=Fraction(0))

    @property
    def passed(self):
        if len(self.T) > self.t:
            return False
        if self.mode == "exhaustive":
            return all(pc.distance == 0 and pc.uniform for pc in self.pieces)
        return all(pc.distance < SAMPLED_TV_THRESHOLD for pc in self.pieces)

    def records(self):
        for pc in self.pieces:
            yield {
                "audit": "user_privacy",
                "T": list(self.T),
                "mode": self.mode,
                "p": pc.p,
                "distance": str(pc.distance) if isinstance(pc.distance, Fraction) else round(pc.distance, 6),
                "uniform": pc.uniform,
            }
        yield {
            "audit": "user_privacy",
            "T": list(self.T),
            "mode": self.mode,
            "summary": "PASS" if self.passed else "FAIL",
            "conclusive": self.conclusive,
            "note": self.note,
        }


def audit_user_privacy(cfg, T, mode="exhaustive", rng=None, samples=20000):
    """Compare the distributions of the queries seen by ``T`` across all ``K``.

    PASS needs ``|T| <= t``, zero distance between every pair of indices and,
    in exhaustive mode, an exactly uniform joint distribution for each ``K``.
    """
    T = _check_T(cfg, T)
    report = UserPrivacyReport(T=T, t=cfg.t, mode=mode)
    if mode == "exhaustive":
        for p in range(1, cfg.k + 1):
            tables = [query_distribution(cfg, K, p, T) for K in range(1, cfg.m + 1)]
            dist = max((total_variation(a, b) for a, b in combinations(tables, 2)), default=Fraction(0))
            uniform = all(tb.is_uniform() for tb in tables)
            report.pieces.append(PieceResult(p, dist, uniform))
    elif mode == "sampled":
        rng = make_rng(None) if rng is None else rng
        samples = max(samples, 2000 * cfg.spec.q)
        scope = set()
        for p in range(1, cfg.k + 1):
            dist, kind = _sampled_distance(cfg, p, T, rng, samples)
            scope.add(kind)
            report.pieces.append(PieceResult(p, dist, None))
        report.conclusive = False
        report.note = f"sampled estimate ({'/'.join(sorted(scope))}), threshold {SAMPLED_TV_THRESHOLD}"
    else:
        raise ValueError(f"unknown audit mode {mode!r}")
    return report


@dataclass
class CollusionReport:
    T: tuple
    pieces: list

    @property
    def leaks(self):
        return any(pc.distance > 0 for pc in self.pieces)

    def records(self):
        for pc in self.pieces:
            yield {"audit": "collusion_control", "T": list(self.T), "p": pc.p, "distance": str(pc.distance)}
        yield {"audit": "collusion_control", "T": list(self.T), "summary": "LEAKS" if self.leaks else "NO_LEAK"}


def audit_collusion_failure(cfg, T):
    """Negative control: a set of ``t + 1`` servers, reported per piece."""
    T = _check_T(cfg, T)
    if len(T) != cfg.t + 1:
        raise ValueError(f"negative control needs |T| = t+1 = {cfg.t + 1}, got {len(T)}")
    pieces = []
    for p in range(1, cfg.k + 1):
        tables = [query_distribution(cfg, K, p, T) for K in range(1, cfg.m + 1)]
        dist = max((total_variation(a, b) for a, b in combinations(tables, 2)), default=Fraction(0))
        pieces.append(PieceResult(p, dist, None))
    return CollusionReport(T, pieces)


def all_sets(n, max_size):
    for size in range(max_size + 1):
        yield from combinations(range(1, n + 1), size)


# ---------------------------------------------------------------------------
# LRC: colluders spread over several repair groups
# ---------------------------------------------------------------------------


@dataclass
class PatternReport:
    pattern: tuple
    distance: Fraction

    @property
    def passed(self):
        return self.distance == 0


def audit_lrc_pattern(plan, m, pattern):
    """Joint query distribution seen by colluders spread across groups.

    ``pattern[j]`` is a set of 1-based working positions inside queried group
    ``j``. Group masks are drawn independently, so the joint distribution over
    all groups is the product of the per-group joint distributions (over all
    pieces of the group).
    """
    if len(pattern) != len(plan.local_configs):
        raise ValueError("need one colluder set per queried group")
    per_K = []
    for K in range(1, m + 1):
        joint = {(): Fraction(1)}
        for cfg, T in zip(plan.local_configs, pattern):
            T = _check_T(cfg, T)
            group = {(): Fraction(1)}
            for p in range(1, cfg.k + 1):
                piece = query_distribution(cfg, K, p, T).as_dict()
                group = {a + b: pa * pb for (a, pa), (b, pb) in product(group.items(), piece.items())}
            if len(joint) * len(group) > EXHAUSTIVE_BUDGET:
                raise EnumerationBudgetError("joint collusion-pattern support exceeds the exhaustive budget")
            joint = {a + b: pa * pb for (a, pa), (b, pb) in product(joint.items(), group.items())}
        per_K.append(joint)
    dist = Fraction(0)
    for a, b in combinations(per_K, 2):
        d = sum((abs(a.get(x, 0) - b.get(x, 0)) for x in a.keys() | b.keys()), Fraction(0)) / 2
        dist = max(dist, d)
    return PatternReport(tuple(tuple(T) for T in pattern), dist)


# ---------------------------------------------------------------------------
# server privacy
# ---------------------------------------------------------------------------


def _observations(transcript):
    """Every Bell outcome the protocol produced, in transcript order."""
    obs = []
    for rec in transcript.rounds:
        obs.extend(w.index for _, w in sorted(rec.G.items()))
    return obs


def _user_view(transcript):
    return [(rec.p, rec.b, rec.l, rec.cross_sums, rec.aggregate, rec.outcome) for rec in transcript.rounds]


@dataclass
class ServerPrivacyReport:
    trials: int
    paired_mismatches: int
    decode_failures: int
    chi2_pvalue: float
    chi2_kind: str
    vacuous: bool = False

    @property
    def passed(self):
        if self.vacuous:
            return True
        return self.paired_mismatches == 0 and self.decode_failures == 0 and self.chi2_pvalue > CHI2_ALPHA

    def records(self):
        yield {
            "audit": "server_privacy",
            "trials": self.trials,
            "paired_mismatches": self.paired_mismatches,
            "decode_failures": self.decode_failures,
            "chi2_pvalue": round(self.chi2_pvalue, 6),
            "chi2_kind": self.chi2_kind,
            "vacuous": self.vacuous,
            "summary": "PASS" if self.passed else "FAIL",
        }


def audit_server_privacy(cfg, trials, seed, K=1, backend="symbolic"):
    """Paired runs differing only in the files other than ``K``.

    Each trial shares one seed between the two runs, so masks and measurement
    randomness coincide. The user's observations must then agree exactly and
    the decoded file must be ``x^K`` in both. Bell outcomes collected over the
    trials are tested for uniformity with a chi-squared test.
    """
    if trials < MIN_SERVER_TRIALS:
        raise ValueError(f"need at least {MIN_SERVER_TRIALS} trials, got {trials}")
    if cfg.m == 1:
        return ServerPrivacyReport(trials, 0, 0, 1.0, "none", vacuous=True)
    master = np.random.SeedSequence(seed)
    mismatches = failures = 0
    samples = []
    for child in master.spawn(trials):
        run_seed = int(child.generate_state(1, np.uint64)[0])
        data_rng = make_rng(child.spawn(1)[0])
        files_a = cfg.spec.random(data_rng, (cfg.m, cfg.beta, cfg.k))
        files_b = files_a.copy()
        others = [i for i in range(cfg.m) if i != K - 1]
        files_b[others] = cfg.spec.random(data_rng, (len(others), cfg.beta, cfg.k))
        xa, ta = run_retrieval(cfg, files_a, K, run_seed, backend)
        xb, tb = run_retrieval(cfg, files_b, K, run_seed, backend)
        failures += int(not np.array_equal(xa, files_a[K - 1])) + int(not np.array_equal(xb, files_b[K - 1]))
        mismatches += int(_user_view(ta) != _user_view(tb) or _observations(ta) != _observations(tb))
        samples.append(_observations(ta))
    pvalue, kind = _uniformity(np.array(samples, dtype=np.int64), trials)
    return ServerPrivacyReport(trials, mismatches, failures, pvalue, kind)


def _uniformity(samples, trials):
    count = samples.shape[1] if samples.ndim == 2 else 0
    if count == 0:
        return 1.0, "none"
    if 4**count * 5 <= trials:
        codes = np.zeros(trials, dtype=np.int64)
        for j in range(count):
            codes = codes * 4 + samples[:, j]
        observed = np.bincount(codes, minlength=4**count)
        return float(stats.chisquare(observed).pvalue), "joint"
    # Too many cells for a joint test: sum the per-position statistics.
    chi = 0.0
    for j in range(count):
        observed = np.bincount(samples[:, j], minlength=4)
        chi += float(stats.chisquare(observed).statistic)
    return float(stats.chi2.sf(chi, 3 * count)), "per-position"


def verify_query_construction(cfg, queries):
    """Check ``[Q_1 .. Q_n] = Z Gd + xi_{K,p}`` from the retained masks."""
    for p in range(cfg.k):
        block = cfg.spec.matmul(queries.Z[p], cfg.dual_generator) if cfg.t else np.zeros((cfg.m, cfg.n), np.int64)
        block[queries.K - 1, p] ^= 1
        if not np.array_equal(block.T, queries.Q[p]):
            return False
    return True
