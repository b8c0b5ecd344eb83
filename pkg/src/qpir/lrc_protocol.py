"""QPIR over locally repairable storage.

Each of the ``k/r`` selected repair groups is a local ``[r+rho-1, r]`` MDS
code, so the MDS scheme runs inside the group on its first ``r + t`` servers
and returns the wanted file's symbols at ``r`` positions. Together those
positions form an information set of the global code, which the user inverts.
The download cost therefore depends on ``r + t`` only, not on ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .codes import LinearCode, LrcProfile, encode, invert_on_information_set, is_information_set, restrict
from .protocol import DssConfig, expected_resources, rate, retrieve_symbols
from .quantum import make_rng


@dataclass(frozen=True, eq=False)
class LrcConfig:
    code: LinearCode
    profile: LrcProfile
    m: int
    t: int
    beta: int = 1
    odd_n_mode: str = "quantum"

    def __post_init__(self):
        if not 0 <= self.t < self.profile.rho:
            raise ValueError(f"need 0 <= t < rho={self.profile.rho}, got t={self.t}")
        if self.m < 1 or self.beta < 1:
            raise ValueError("need m >= 1 and beta >= 1")

    @property
    def spec(self):
        return self.code.spec

    @property
    def k(self):
        return self.code.k


@dataclass(frozen=True, eq=False)
class LrcRetrievalPlan:
    """Which repair groups are queried and which of their positions are read.

    ``groups`` holds indices into ``profile.partition``; ``servers[j]`` lists the
    ``r + t`` global positions working in group ``j`` and ``targets[j]`` the
    first ``r`` of them. ``local_configs[j]`` runs over the group's local code
    with positions numbered inside the group.
    """

    groups: tuple
    servers: tuple
    targets: tuple
    local_configs: tuple

    @property
    def information_set(self):
        return tuple(p for tg in self.targets for p in tg)


def plan_lrc_retrieval(code, profile, t, m=1, beta=1, odd_n_mode="quantum"):
    r, rho = profile.r, profile.rho
    if not 0 <= t < rho:
        raise ValueError(f"need 0 <= t < rho={rho}, got t={t}")
    if sorted(p for grp in profile.partition for p in grp) != list(range(code.n)):
        raise ValueError(f"profile partition does not cover the {code.n} positions of the code")
    blocks = code.k // r
    if blocks * r != code.k or blocks > profile.mu:
        raise ValueError(f"profile r={r} does not fit a code of dimension {code.k}")

    # Prefer the first k/r groups read at their leading positions; otherwise
    # search group subsets, then position choices, for an information set.
    def candidates():
        for groups in combinations(range(profile.mu), blocks):
            lead = [profile.partition[g][: r + t] for g in groups]
            yield groups, lead
            for picks in product(*(combinations(profile.partition[g], r + t) for g in groups)):
                yield groups, [list(p) for p in picks]

    for groups, working in candidates():
        info = [p for w in working for p in w[:r]]
        if is_information_set(code, info):
            break
    else:
        raise ValueError("no choice of repair groups yields an information set")

    local_configs = []
    for g, w in zip(groups, working):
        part = list(profile.partition[g])
        local = restrict(code, part)
        if local.k != r:
            raise ValueError(f"repair group {g} has local dimension {local.k} != r={r}")
        local_configs.append(
            DssConfig(local, m=m, beta=beta, t=t, servers=tuple(part.index(p) for p in w), odd_n_mode=odd_n_mode)
        )
    return LrcRetrievalPlan(
        groups=tuple(groups),
        servers=tuple(tuple(w) for w in working),
        targets=tuple(tuple(w[:r]) for w in working),
        local_configs=tuple(local_configs),
    )


def lrc_rate(r, t):
    """``2/(r+t)`` for even ``r + t``, else ``2/(r+t+1)``."""
    return rate(r + t)


def run_lrc_retrieval(cfg, files, K, seed, backend="symbolic", plan=None):
    """Retrieve file ``K`` from LRC storage.

    Returns ``(x^K, transcripts, report)`` with one transcript per queried
    group. Each group draws from its own child of ``SeedSequence(seed)``.
    """
    if plan is None:
        plan = plan_lrc_retrieval(cfg.code, cfg.profile, cfg.t, cfg.m, cfg.beta, cfg.odd_n_mode)
    x = np.asarray(files, dtype=np.int64)
    if x.shape != (cfg.m, cfg.beta, cfg.k):
        raise ValueError(f"files must have shape {(cfg.m, cfg.beta, cfg.k)}, got {x.shape}")
    storage = encode(x, cfg.code)
    streams = np.random.SeedSequence(seed).spawn(len(plan.groups))
    retrieved = np.zeros((cfg.beta, cfg.k), dtype=np.int64)
    transcripts = []
    report = None
    col = 0
    for g, local, stream in zip(plan.groups, plan.local_configs, streams):
        part = list(cfg.profile.partition[g])
        y, tr = retrieve_symbols(local, storage[:, :, part], K, make_rng(stream), backend=backend)
        tr.seed = seed
        transcripts.append(tr)
        retrieved[:, col:col + local.k] = y
        col += local.k
        report = tr.resources if report is None else report + tr.resources
    M = invert_on_information_set(cfg.code, plan.information_set)
    decoded = cfg.spec.matmul(retrieved, M)
    return decoded, transcripts, report


def lrc_resources(cfg):
    """Closed-form totals: ``k/r`` local runs on ``r + t`` servers each."""
    blocks = cfg.k // cfg.profile.r
    q_in, q_ent, q_out = expected_resources(cfg.profile.r + cfg.t, cfg.profile.r, cfg.spec.L, cfg.beta, cfg.odd_n_mode)
    return blocks * q_in, blocks * q_ent, blocks * q_out


__all__ = [
    "LrcConfig",
    "LrcRetrievalPlan",
    "lrc_rate",
    "lrc_resources",
    "plan_lrc_retrieval",
    "run_lrc_retrieval",
]
