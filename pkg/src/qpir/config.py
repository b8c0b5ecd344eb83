"""Experiment configuration files (YAML).

Example::

    scheme: mds          # or lrc
    code: rs-4-2-self-dual   # named code, {n: 4, k: 2}, {rows: [[...]]} or {n, k, r, rho}
    field: 1             # extension degree L; defaults to the smallest that fits
    m: 2                 # number of files
    beta: 1              # stripes per file
    K: 1                 # wanted file, 1-based
    t: 2                 # collusion level; defaults to n - k (mds) or rho - 1 (lrc)
    servers: [1, 2, 3, 4]  # 1-based working servers (mds only)
    seed: 7
    backend: symbolic    # exact | symbolic | both
    odd_n_mode: quantum  # quantum | basis
    audits: [user_privacy, collusion_control]

Validation errors carry the line of the offending key.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from importlib import resources

import numpy as np
import yaml

from .codes import from_rows, grs_generator, lrc_generator, rs_4_2_self_dual, spc_3_2
from .finite_field import MODULI, field, min_extension
from .lrc_protocol import LrcConfig, plan_lrc_retrieval
from .protocol import ODD_MODES, DssConfig
from .quantum import BACKENDS

NAMED_CODES = {"spc-3-2": spc_3_2, "rs-4-2-self-dual": rs_4_2_self_dual}
AUDIT_KINDS = {
    "mds": ("user_privacy", "collusion_control", "server_privacy"),
    "lrc": ("lrc_groups", "lrc_pattern"),
}
KEYS = {"name", "scheme", "code", "field", "m", "beta", "K", "t", "servers", "seed", "backend", "odd_n_mode", "audits", "files"}
SEED_MAX = (1 << 64) - 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    code: object
    L: int
    m: int
    beta: int
    K: int
    t: int | None
    servers: tuple | None
    seed: int | None
    backend: str
    odd_n_mode: str
    audits: tuple
    files: tuple | None = None
    name: str = ""
    source: str = "<config>"
    lines: dict = dc_field(default_factory=dict, compare=False, repr=False)

    def error(self, key, msg):
        line = self.lines.get(key)
        where = f"{self.source}:{line}" if line else self.source
        return ConfigError(f"{where}: {msg}")

    def build(self):
        """The protocol configuration: a ``DssConfig`` or ``(LrcConfig, plan)``."""
        spec = field(self.L)
        try:
            if self.scheme == "lrc":
                code, profile = lrc_generator(spec, self.code["n"], self.code["k"], self.code["r"], self.code["rho"])
                t = profile.rho - 1 if self.t is None else self.t
                cfg = LrcConfig(code, profile, m=self.m, t=t, beta=self.beta, odd_n_mode=self.odd_n_mode)
                return cfg, plan_lrc_retrieval(code, profile, t, self.m, self.beta, self.odd_n_mode)
            if isinstance(self.code, str):
                code = NAMED_CODES[self.code]()
                if code.spec != spec:
                    raise ValueError(f"named code {self.code} lives over {code.spec!r}, not {spec!r}")
            elif "rows" in self.code:
                code = from_rows(spec, self.code["rows"])
            else:
                code = grs_generator(spec, self.code["n"], self.code["k"])
            servers = None if self.servers is None else tuple(s - 1 for s in self.servers)
            return DssConfig(code, m=self.m, beta=self.beta, t=self.t, servers=servers, odd_n_mode=self.odd_n_mode)
        except ValueError as exc:
            raise self.error("code", str(exc)) from None

    def files_array(self, k):
        if self.files is None:
            return None
        arr = np.asarray(self.files, dtype=np.int64)
        if arr.shape != (self.m, self.beta, k):
            raise self.error("files", f"files must be m={self.m} lists of beta={self.beta} stripes of k={k} symbols")
        if arr.min() < 0 or arr.max() >= 4**self.L:
            raise self.error("files", f"file symbols must lie in 0..{4**self.L - 1}")
        return arr

    def with_overrides(self, seed=None, backend=None):
        return replace(
            self,
            seed=self.seed if seed is None else seed,
            backend=self.backend if backend is None else backend,
        )


def _line_map(text):
    """1-based line of each top-level key."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


def _int(data, key, err, lo=None, hi=None, default=None):
    v = data.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise err(key, f"'{key}' must be an integer, got {v!r}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise err(key, f"'{key}'={v} outside {lo}..{hi if hi is not None else 'inf'}")
    return v


def _audits(raw, scheme, err):
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise err("audits", "'audits' must be a list")
    out = []
    for item in raw:
        if isinstance(item, str):
            kind, opts = item, {}
        elif isinstance(item, dict) and len(item) == 1:
            kind, opts = next(iter(item.items()))
            opts = opts or {}
            if not isinstance(opts, dict):
                raise err("audits", f"options of audit '{kind}' must be a mapping")
        else:
            raise err("audits", f"cannot read audit entry {item!r}")
        if kind not in AUDIT_KINDS[scheme]:
            raise err("audits", f"audit '{kind}' not available for scheme '{scheme}'; choose from {AUDIT_KINDS[scheme]}")
        out.append((kind, tuple(sorted(opts.items()))))
    return tuple(out)


def parse_config(text, source="<config>"):
    lines = _line_map(text)

    def err(key, msg):
        line = lines.get(key)
        return ConfigError(f"{source}:{line}: {msg}" if line else f"{source}: {msg}")

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"{where}: malformed YAML: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: expected a mapping of settings")
    for key in data:
        if key not in KEYS:
            raise err(key, f"unknown key '{key}'; known keys: {', '.join(sorted(KEYS))}")

    scheme = data.get("scheme", "mds")
    if scheme not in AUDIT_KINDS:
        raise err("scheme", f"'scheme' must be mds or lrc, got {scheme!r}")
    if "code" not in data:
        raise ConfigError(f"{source}: missing required key 'code'")
    code = data["code"]
    if scheme == "lrc":
        if not isinstance(code, dict) or set(code) != {"n", "k", "r", "rho"}:
            raise err("code", "lrc 'code' must be a mapping with exactly n, k, r, rho")
        n_phys = code["n"]
    elif isinstance(code, str):
        if code not in NAMED_CODES:
            raise err("code", f"unknown named code {code!r}; choose from {sorted(NAMED_CODES)}")
        n_phys = NAMED_CODES[code]().n
    elif isinstance(code, dict) and set(code) == {"n", "k"}:
        n_phys = code["n"]
    elif isinstance(code, dict) and set(code) == {"rows"}:
        rows = code["rows"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise err("code", "'rows' must be a non-empty list of lists")
        n_phys = len(rows[0])
    else:
        raise err("code", "'code' must be a named code, {n, k}, {rows} or (lrc) {n, k, r, rho}")
    if isinstance(code, dict):
        for key, v in code.items():
            if key != "rows" and (isinstance(v, bool) or not isinstance(v, int) or v < 1):
                raise err("code", f"code parameter '{key}' must be a positive integer")
    if not isinstance(n_phys, int) or n_phys < 1:
        raise err("code", "code length must be a positive integer")

    default_L = 1 if isinstance(code, str) else min_extension(n_phys)
    L = _int(data, "field", err, lo=min(MODULI), hi=max(MODULI), default=default_L)
    m = _int(data, "m", err, lo=1, default=1)
    beta = _int(data, "beta", err, lo=1, default=1)
    K = _int(data, "K", err, lo=1, hi=m, default=1)
    t = _int(data, "t", err, lo=0)
    seed = _int(data, "seed", err, lo=0, hi=SEED_MAX)
    servers = data.get("servers")
    if servers is not None:
        if scheme == "lrc":
            raise err("servers", "'servers' applies to the mds scheme only")
        if not isinstance(servers, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in servers):
            raise err("servers", "'servers' must be a list of 1-based server indices")
        servers = tuple(servers)
    backend = data.get("backend", "symbolic")
    if backend not in BACKENDS:
        raise err("backend", f"'backend' must be one of {sorted(BACKENDS)}, got {backend!r}")
    odd = data.get("odd_n_mode", "quantum")
    if odd not in ODD_MODES:
        raise err("odd_n_mode", f"'odd_n_mode' must be one of {ODD_MODES}, got {odd!r}")
    files = data.get("files")
    if files is not None:
        try:
            files = tuple(tuple(tuple(int(v) for v in stripe) for stripe in f) for f in files)
        except (TypeError, ValueError):
            raise err("files", "'files' must list m files, each a list of stripes of integers") from None
    name = data.get("name", "")
    if not isinstance(name, str):
        raise err("name", "'name' must be a string")

    cfg = ExperimentConfig(
        scheme=scheme,
        code=code,
        L=L,
        m=m,
        beta=beta,
        K=K,
        t=t,
        servers=servers,
        seed=seed,
        backend=backend,
        odd_n_mode=odd,
        audits=_audits(data.get("audits"), scheme, err),
        files=files,
        name=name,
        source=source,
        lines=lines,
    )
    cfg.build()
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def preset_names():
    root = resources.files("qpir") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_preset(name):
    root = resources.files("qpir") / "presets"
    path = root / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return parse_config(path.read_text(encoding="utf-8"), source=f"preset:{name}")
