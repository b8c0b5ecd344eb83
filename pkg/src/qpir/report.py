"""Line-oriented documents: one JSON object per line behind a version header.

Keys are sorted and separators fixed, so equal inputs give byte-identical
files. Field elements are written as hex strings and Weyl labels as the two
bits ``"ab"``.
"""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .quantum import WeylLabel

VERSION = 1


def label_text(w):
    return f"{w.a}{w.b}"


def hex_width(spec):
    return max(1, (2 * spec.L + 3) // 4)


def hex_array(values, spec):
    width = hex_width(spec)
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim == 0:
        return f"{int(arr):0{width}x}"
    return [hex_array(v, spec) for v in arr]


def _default(obj):
    if isinstance(obj, WeylLabel):
        return label_text(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def header(kind, **extra):
    return {"format": f"qpir-{kind}", "version": VERSION, **extra}


def dumps(records):
    lines = []
    for rec in records:
        if isinstance(rec, dict):
            rec = {str(k): (label_text(v) if isinstance(v, WeylLabel) else v) for k, v in rec.items()}
        lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":"), default=_default))
    return "\n".join(lines) + "\n"


def loads(text, kind=None):
    records = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
    if not records or "format" not in records[0]:
        raise ValueError("document has no header line")
    head = records[0]
    if head.get("version") != VERSION:
        raise ValueError(f"unsupported document version {head.get('version')!r}")
    if kind is not None and head["format"] != f"qpir-{kind}":
        raise ValueError(f"expected a qpir-{kind} document, got {head['format']!r}")
    return records


def resource_record(report):
    return {
        "type": "resources",
        "q_in": report.q_in,
        "q_ent": report.q_ent,
        "q_out": report.q_out,
        "file_bits": report.file_bits,
        "upload_bits": report.upload_bits,
        "rate": str(report.rate),
    }


def transcript_records(transcript, spec, group=None):
    """Body records of one retrieval transcript (no header)."""
    tag = {} if group is None else {"group": group}
    out = []
    qs = transcript.queries
    for p in range(qs.Q.shape[0]):
        out.append({"type": "query", "p": p + 1, "Q": hex_array(qs.Q[p], spec), "Z": hex_array(qs.Z[p], spec), **tag})
    for rec in transcript.rounds:
        out.append(
            {
                "type": "round",
                "p": rec.p,
                "b": rec.b,
                "l": rec.l,
                "H": [label_text(h) for h in rec.H],
                "G": {str(s): label_text(g) for s, g in rec.G.items()},
                "cross": [label_text(g) for g in rec.cross_sums],
                "aggregate": label_text(rec.aggregate),
                "outcome": label_text(rec.outcome),
                **tag,
            }
        )
    out.append({"type": "answers", "H": hex_array(transcript.H_values, spec), **tag})
    out.append({"type": "retrieved", "y": hex_array(transcript.retrieved, spec), **tag})
    if transcript.decoded is not None:
        out.append({"type": "decoded", "x": hex_array(transcript.decoded, spec), **tag})
    out.append({**resource_record(transcript.resources), **tag})
    return out
