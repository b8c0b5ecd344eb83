"""Command line runner: ``qpir run | trials | audit | rate-table | presets``.

Exit codes: 0 success, 1 invalid input, 2 audit failure, 3 internal
assertion (a protocol invariant or backend cross-check failed).
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path

import numpy as np

from . import report as rpt
from .codes import grs_generator, lrc_generator
from .config import SEED_MAX, ConfigError, load_config, load_preset, preset_names
from .finite_field import field, min_extension
from .lrc_protocol import LrcConfig, lrc_rate, plan_lrc_retrieval, run_lrc_retrieval
from .privacy_audit import (
    all_sets,
    audit_collusion_failure,
    audit_lrc_pattern,
    audit_server_privacy,
    audit_user_privacy,
)
from .protocol import DssConfig, ProtocolAssertionError, decode_file, encode_storage, rate, retrieve_symbols
from .quantum import BACKENDS, BackendMismatchError, make_rng

EXIT_OK, EXIT_INVALID, EXIT_AUDIT_FAIL, EXIT_INTERNAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {v}")
    return v


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _experiments(args):
    exps = [load_config(p) for p in (args.config or [])]
    exps += [load_preset(name) for name in (args.preset or [])]
    if not exps:
        raise ConfigError("give --config PATH or --preset NAME")
    seed = args.seed
    if seed is None and os.environ.get("QPIR_SEED"):
        try:
            env_seed = _u64(os.environ["QPIR_SEED"])
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(f"QPIR_SEED: {exc}") from None
    else:
        env_seed = None
    out = []
    for exp in exps:
        s = seed if seed is not None else exp.seed if exp.seed is not None else env_seed if env_seed is not None else 0
        out.append(exp.with_overrides(seed=s, backend=args.backend))
    return out


def _data_rng(seed):
    # Files come from their own stream so they do not shift the protocol's.
    return make_rng(np.random.SeedSequence([seed, 1]))


def _files(exp, k, seed):
    files = exp.files_array(k)
    if files is None:
        files = field(exp.L).random(_data_rng(seed), (exp.m, exp.beta, k))
    return files


def execute(exp, seed=None):
    """One retrieval: ``(files, decoded, body_records, resources, closed_form_rate, spec)``."""
    seed = exp.seed if seed is None else seed
    built = exp.build()
    if exp.scheme == "lrc":
        cfg, plan = built
        files = _files(exp, cfg.k, seed)
        decoded, transcripts, resources = run_lrc_retrieval(cfg, files, exp.K, seed, exp.backend, plan=plan)
        body = [{"type": "plan", "groups": list(plan.groups), "servers": plan.servers, "targets": plan.targets}]
        for j, tr in enumerate(transcripts, 1):
            body += rpt.transcript_records(tr, cfg.spec, group=j)
        body.append({**rpt.resource_record(resources), "scope": "total"})
        body.append({"type": "decoded", "x": rpt.hex_array(decoded, cfg.spec)})
        return files, decoded, body, resources, lrc_rate(cfg.profile.r, cfg.t), cfg.spec
    cfg = built
    files = _files(exp, cfg.k, seed)
    storage = encode_storage(cfg, files)
    retrieved, tr = retrieve_symbols(cfg, storage, exp.K, make_rng(seed), backend=exp.backend)
    tr.seed = seed
    tr.decoded = decode_file(cfg, retrieved)
    return files, tr.decoded, rpt.transcript_records(tr, cfg.spec), tr.resources, rate(cfg), cfg.spec


def _describe(exp):
    built = exp.build()
    if exp.scheme == "lrc":
        cfg, plan = built
        p = cfg.profile
        return (
            f"lrc, [{cfg.code.n},{cfg.k}] over {cfg.spec!r}, r={p.r}, rho={p.rho}, t={cfg.t}, "
            f"groups {[g + 1 for g in plan.groups]} with {p.r + cfg.t} working servers each"
        )
    cfg = built
    return f"mds, [{cfg.n_total},{cfg.k}] over {cfg.spec!r}, t={cfg.t}, working servers {[s + 1 for s in cfg.servers]}"


def _emit(args, name, text):
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")


def _header(exp, kind):
    return rpt.header(
        kind,
        name=exp.name,
        scheme=exp.scheme,
        seed=exp.seed,
        backend=exp.backend,
        K=exp.K,
        m=exp.m,
        beta=exp.beta,
        odd_n_mode=exp.odd_n_mode,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args):
    (exp,) = _experiments(args)[:1]
    files, decoded, body, res, formula, spec = execute(exp)
    ok = np.array_equal(decoded, files[exp.K - 1])
    lines = [
        f"run {exp.name or '(unnamed)'}: {_describe(exp)}",
        f"backend {exp.backend}, seed {exp.seed}, K={exp.K}, m={exp.m}, beta={exp.beta}, odd_n_mode={exp.odd_n_mode}",
        "decoded x^K: " + " | ".join(" ".join(row) for row in rpt.hex_array(decoded, spec)),
        f"matches stored file: {'yes' if ok else 'NO'}",
        f"q_in {res.q_in}  q_ent {res.q_ent}  q_out {res.q_out}",
        f"rate {res.rate} (closed form {formula})",
        f"upload bits {res.upload_bits}, file bits {res.file_bits}",
    ]
    summary = "\n".join(lines) + "\n"
    print(summary, end="")
    _emit(args, "transcript.jsonl", rpt.dumps([_header(exp, "transcript")] + body))
    _emit(args, "summary.txt", summary)
    if not ok or res.rate != formula:
        raise ProtocolAssertionError("retrieval or rate check failed")
    return EXIT_OK


def _g_histogram(body):
    hist = {}
    for rec in body:
        if rec.get("type") != "round":
            continue
        for s, g in rec["G"].items():
            key = f"{rec.get('group', 0)}:{s}" if "group" in rec else s
            hist.setdefault(key, [0, 0, 0, 0])[int(g[0]) | int(g[1]) << 1] += 1
    return hist


def cmd_trials(args):
    exps = _experiments(args)
    records = [rpt.header("trials", trials=args.trials)]
    lines = []
    failed_any = False
    for exp in exps:
        seeds = np.random.SeedSequence(exp.seed).generate_state(args.trials, np.uint64)
        ok = 0
        hist = {}
        for s in seeds:
            files, decoded, body, res, formula, _ = execute(exp, seed=int(s))
            ok += int(np.array_equal(decoded, files[exp.K - 1]))
            for key, counts in _g_histogram(body).items():
                acc = hist.setdefault(key, [0, 0, 0, 0])
                for i, c in enumerate(counts):
                    acc[i] += c
        frac = Fraction(ok, args.trials)
        failed_any |= ok != args.trials
        records.append(
            {
                "name": exp.name,
                "scheme": exp.scheme,
                "seed": exp.seed,
                "backend": exp.backend,
                "successes": ok,
                "trials": args.trials,
                "success_fraction": str(frac),
                "rate": str(res.rate),
                "G_histogram": hist,
            }
        )
        lines.append(f"{exp.name or '(unnamed)'}: {ok}/{args.trials} exact retrievals (fraction {frac}), rate {res.rate}")
        for key in sorted(hist, key=lambda k: [int(x) for x in k.split(":")]):
            counts = hist[key]
            lines.append(f"  G at server {key}: 00={counts[0]} 10={counts[1]} 01={counts[2]} 11={counts[3]}")
    summary = "\n".join(lines) + "\n"
    print(summary, end="")
    _emit(args, "trials.jsonl", rpt.dumps(records))
    _emit(args, "summary.txt", summary)
    if failed_any:
        raise ProtocolAssertionError("some trials did not retrieve the wanted file")
    return EXIT_OK


def _sets_option(opts, default):
    sets = opts.get("sets", "all")
    if sets == "all":
        return list(default)
    return [tuple(T) for T in sets]


def run_audits(exp):
    """Yield ``(passed, line, records)`` for every audit of ``exp``."""
    built = exp.build()
    audits = exp.audits or (
        (("lrc_groups", ()),) if exp.scheme == "lrc" else (("user_privacy", ()), ("collusion_control", ()))
    )
    for kind, opts in audits:
        opts = dict(opts)
        if kind == "user_privacy":
            cfg = built
            mode = opts.get("mode", "exhaustive")
            rng = make_rng(exp.seed)
            for T in _sets_option(opts, all_sets(cfg.n, cfg.t)):
                rep = audit_user_privacy(cfg, T, mode=mode, rng=rng)
                verdict = "PASS" if rep.passed else "FAIL"
                yield rep.passed, f"user_privacy T={list(rep.T)} {mode}: {verdict} (max distance {rep.max_distance})", list(rep.records())
        elif kind == "collusion_control":
            cfg = built
            leaks = []
            recs = []
            for T in _sets_option(opts, combinations(range(1, cfg.n + 1), cfg.t + 1)):
                rep = audit_collusion_failure(cfg, T)
                leaks.append(rep.leaks)
                recs += list(rep.records())
            ok = any(leaks)
            yield ok, f"collusion_control |T|=t+1={cfg.t + 1}: {sum(leaks)}/{len(leaks)} sets leak -> {'PASS' if ok else 'FAIL'}", recs
        elif kind == "server_privacy":
            cfg = built
            trials = int(opts.get("trials", 1000))
            rep = audit_server_privacy(cfg, trials, exp.seed, K=exp.K, backend=exp.backend)
            line = (
                f"server_privacy {trials} paired trials: mismatches {rep.paired_mismatches}, "
                f"decode failures {rep.decode_failures}, chi2 p={rep.chi2_pvalue:.4f} ({rep.chi2_kind}) -> "
                f"{'PASS' if rep.passed else 'FAIL'}"
            )
            yield rep.passed, line, list(rep.records())
        elif kind == "lrc_groups":
            cfg, plan = built
            for j, local in enumerate(plan.local_configs, 1):
                reps = [audit_user_privacy(local, T) for T in all_sets(local.n, local.t)]
                ok = all(r.passed for r in reps)
                recs = [dict(r, group=j) for rep in reps for r in rep.records()]
                yield ok, f"lrc_groups group {j}: {len(reps)} sets with |T|<={local.t}: {'PASS' if ok else 'FAIL'}", recs
        elif kind == "lrc_pattern":
            cfg, plan = built
            if "patterns" in opts:
                patterns = [tuple(tuple(T) for T in pat) for pat in opts["patterns"]]
            else:
                patterns = list(product(*(combinations(range(1, c.n + 1), c.t) for c in plan.local_configs)))
            for pat in patterns:
                rep = audit_lrc_pattern(plan, cfg.m, pat)
                limit_ok = all(len(T) <= c.t for T, c in zip(pat, plan.local_configs))
                ok = rep.passed if limit_ok else not rep.passed
                rec = {"audit": "lrc_pattern", "pattern": [list(T) for T in pat], "distance": str(rep.distance),
                       "summary": "PASS" if ok else "FAIL"}
                yield ok, f"lrc_pattern {[list(T) for T in pat]}: distance {rep.distance} -> {'PASS' if ok else 'FAIL'}", [rec]


def cmd_audit(args):
    exps = _experiments(args)
    records = []
    lines = []
    all_ok = True
    for exp in exps:
        records.append(_header(exp, "audit"))
        lines.append(f"audit {exp.name or '(unnamed)'}: {_describe(exp)}")
        for ok, line, recs in run_audits(exp):
            all_ok &= ok
            lines.append("  " + line)
            records += recs
        lines.append(f"overall: {'PASS' if all_ok else 'FAIL'}")
    summary = "\n".join(lines) + "\n"
    print(summary, end="")
    _emit(args, "audit.jsonl", rpt.dumps(records))
    _emit(args, "summary.txt", summary)
    return EXIT_OK if all_ok else EXIT_AUDIT_FAIL


def _classical(n, k, t):
    if k == 1 and t == 1:
        return Fraction(n - 1, n), "1-1/n", "literature: replicated, no collusion"
    if k == 1:
        return Fraction(n - t, n), "1-t/n", "literature: replicated, t-collusion"
    return Fraction(n - k - t + 1, n), "1-(k+t-1)/n", "literature: MDS coded, t-collusion (conjectured)"


def _quantum_literature(k, t):
    if k == 1:
        return Fraction(2, t + 2), ">= 2/(t+2)", "literature: replicated, t-collusion"
    return None, "-", "no prior quantum result"


def rate_table(max_n=8, seed=0):
    rows = []
    for n in range(2, max_n + 1):
        for k in range(1, n):
            t = n - k
            cfg = DssConfig(grs_generator(field(min_extension(n)), n, k), m=1)
            files = cfg.spec.random(_data_rng(seed), (1, 1, k))
            storage = encode_storage(cfg, files)
            _, tr = retrieve_symbols(cfg, storage, 1, make_rng(seed))
            c_val, c_form, c_src = _classical(n, k, t)
            q_val, q_form, q_src = _quantum_literature(k, t)
            rows.append(
                {
                    "scheme": "mds",
                    "n": n,
                    "k": k,
                    "t": t,
                    "qpir_simulated": str(tr.resources.rate),
                    "qpir_closed_form": str(rate(cfg)),
                    "classical_pir": str(c_val),
                    "classical_formula": c_form,
                    "classical_provenance": c_src,
                    "quantum_literature": None if q_val is None else str(q_val),
                    "quantum_literature_formula": q_form,
                    "quantum_literature_provenance": q_src,
                }
            )
    for r, rho, t in ((2, 3, 2), (2, 3, 1)):
        for mu in (2, 3):
            n, k = mu * (r + rho - 1), 2 * r
            spec = field(min_extension(n))
            code, profile = lrc_generator(spec, n, k, r, rho)
            cfg = LrcConfig(code, profile, m=1, t=t)
            files = spec.random(_data_rng(seed), (1, 1, k))
            _, _, res = run_lrc_retrieval(cfg, files, 1, seed, plan=plan_lrc_retrieval(code, profile, t))
            rows.append(
                {
                    "scheme": "lrc",
                    "n": n,
                    "k": k,
                    "r": r,
                    "rho": rho,
                    "t": t,
                    "qpir_simulated": str(res.rate),
                    "qpir_closed_form": str(lrc_rate(r, t)),
                    "mds_baseline_same_n": str(rate(n)),
                    "classical_pir": None,
                    "classical_formula": "-",
                    "classical_provenance": "no entry",
                    "quantum_literature": None,
                    "quantum_literature_formula": "-",
                    "quantum_literature_provenance": "no prior quantum result",
                }
            )
    return rows


def _format_table(rows):
    head = ("scheme", "n", "k", "t", "QPIR (simulated)", "closed form", "classical PIR [lit.]", "prior QPIR [lit.]")
    body = []
    for r in rows:
        params = r["scheme"] if r["scheme"] == "mds" else f"lrc r={r['r']} rho={r['rho']}"
        classical = "-" if r["classical_pir"] is None else f"{r['classical_formula']} = {r['classical_pir']}"
        quantum = "-" if r["quantum_literature"] is None else f"{r['quantum_literature_formula']} = {r['quantum_literature']}"
        body.append((params, str(r["n"]), str(r["k"]), str(r["t"]), r["qpir_simulated"], r["qpir_closed_form"], classical, quantum))
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    out += [fmt.format(*row) for row in body]
    out.append("")
    out.append("simulated: rate 2kLbeta/q_out measured from a protocol transcript; [lit.]: published constants, not reproduced here")
    return "\n".join(out) + "\n"


def cmd_rate_table(args):
    seed = args.seed if args.seed is not None else int(os.environ.get("QPIR_SEED", "0") or 0)
    rows = rate_table(args.max_n, seed)
    text = _format_table(rows)
    print(text, end="")
    _emit(args, "rate_table.jsonl", rpt.dumps([rpt.header("rate-table", max_n=args.max_n, seed=seed)] + rows))
    _emit(args, "rate_table.txt", text)
    return EXIT_OK


def cmd_presets(args):
    for name in preset_names():
        print(f"{name}: {_describe(load_preset(name))}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", metavar="PATH", help="YAML experiment file (repeatable for trials/audit)")
    common.add_argument("--preset", action="append", metavar="NAME", help="bundled experiment, see 'qpir presets'")
    common.add_argument("--seed", type=_u64, metavar="U64", help="overrides the config seed; falls back to $QPIR_SEED, then 0")
    common.add_argument("--backend", choices=sorted(BACKENDS), help="quantum backend (overrides the config)")
    common.add_argument("--out", metavar="DIR", help="write JSON Lines output and a summary here")

    parser = argparse.ArgumentParser(
        prog="qpir",
        description="Quantum private information retrieval from coded storage: simulator and audits.",
        epilog="Exit codes: 0 ok, 1 invalid input, 2 audit failure, 3 internal assertion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="one retrieval, writes a transcript")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("trials", parents=[common], help="many seeded retrievals, success rate and G histograms")
    p.add_argument("--trials", type=_positive, default=1000, metavar="N", help="number of runs per config (default 1000)")
    p.set_defaults(func=cmd_trials)
    p = sub.add_parser("audit", parents=[common], help="privacy audits listed in the config")
    p.set_defaults(func=cmd_audit)
    p = sub.add_parser("rate-table", help="achieved rates next to literature constants")
    p.add_argument("--max-n", type=_positive, default=8, help="largest number of servers in the MDS rows (default 8)")
    p.add_argument("--seed", type=_u64, metavar="U64")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_rate_table)
    p = sub.add_parser("presets", help="list bundled presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProtocolAssertionError, BackendMismatchError) as exc:
        print(f"internal assertion: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AssertionError as exc:
        print(f"internal assertion: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
