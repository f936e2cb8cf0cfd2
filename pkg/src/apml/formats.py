"""Text and JSON formats for histograms, fingerprints, and fit results.

Histogram files are tab-separated ``symbol<TAB>count`` lines; sample files
hold one token per line.  Raw tokens are interned to integer ids in first
appearance order, so the core stays format-agnostic.

Fingerprint JSON: {"n": 7, "F": {"1": 1, "2": 1, "4": 1}, "F0": null};
the D-dimensional variant joins count-vector keys with commas, e.g.
{"ns": [400, 400], "F": {"3,1": 2, "0,2": 5}, "F0": 0}.

Fit result JSON: {"logVbar": ..., "support": {"kind": "finite", "K": 2},
"clumps": [{"size": 2, "total": 4, "mass": 0.5}]}; a continuous-part result
reports {"kind": "continuous", "continuousMass": ...} instead.
"""

from __future__ import annotations

import json
from typing import Iterable, TextIO

from .apml1d import ApmlResult, FiniteSupport
from .apmldd import PartitionD
from .core import Fingerprint, FingerprintD, Histogram, build_histogram

__all__ = [
    "read_histogram",
    "write_histogram",
    "read_samples",
    "fingerprint_to_json",
    "fingerprint_from_json",
    "fingerprint_dd_to_json",
    "fingerprint_dd_from_json",
    "result_to_json",
    "partition_dd_to_json",
]


def _intern(tokens: Iterable[str]) -> Iterable[int]:
    ids: dict[str, int] = {}
    for tok in tokens:
        yield ids.setdefault(tok, len(ids))


def read_histogram(fh: TextIO) -> Histogram:
    """Parse symbol<TAB>count lines; repeated symbols accumulate."""
    counts: dict[int, int] = {}
    ids: dict[str, int] = {}
    n = 0
    for line in fh:
        line = line.strip()
        if not line:
            continue
        sym, _, cnt = line.partition("\t")
        c = int(cnt)
        if c < 1:
            raise ValueError(f"count must be positive: {line!r}")
        sid = ids.setdefault(sym, len(ids))
        counts[sid] = counts.get(sid, 0) + c
        n += c
    if not counts:
        raise ValueError("empty sample")
    return Histogram(counts=counts, n=n)


def write_histogram(h: Histogram, fh: TextIO):
    for sym in sorted(h.counts):
        fh.write(f"{sym}\t{h.counts[sym]}\n")


def read_samples(fh: TextIO) -> Histogram:
    """One token per line; tokens become ids in first-appearance order."""
    tokens = [line.strip() for line in fh if line.strip()]
    return build_histogram(_intern(tokens))


def fingerprint_to_json(f: Fingerprint, n: int) -> str:
    payload = {
        "n": n,
        "F": {str(i): fi for i, fi in sorted(f.entries.items())},
        "F0": f.f0,
    }
    return json.dumps(payload)


def fingerprint_from_json(text: str) -> tuple[Fingerprint, int]:
    payload = json.loads(text)
    entries = {int(i): int(fi) for i, fi in payload["F"].items()}
    f0 = payload.get("F0")
    f = Fingerprint(entries=entries, f0=None if f0 is None else int(f0))
    n = int(payload["n"]) if "n" in payload else f.n
    if f.n != n:
        raise ValueError("inconsistent fingerprint")
    return f, n


def fingerprint_dd_to_json(f: FingerprintD) -> str:
    payload = {
        "ns": list(f.ns),
        "F": {
            ",".join(map(str, vec)): mult
            for vec, mult in sorted(f.entries.items())
        },
        "F0": f.f0,
    }
    return json.dumps(payload)


def fingerprint_dd_from_json(text: str) -> FingerprintD:
    payload = json.loads(text)
    entries = {
        tuple(int(x) for x in key.split(",")): int(mult)
        for key, mult in payload["F"].items()
    }
    dims = len(next(iter(entries)))
    if any(len(vec) != dims for vec in entries):
        raise ValueError("inconsistent count-vector keys")
    f0 = payload.get("F0")
    return FingerprintD(
        dims=dims,
        entries=entries,
        ns=tuple(int(x) for x in payload["ns"]),
        f0=None if f0 is None else int(f0),
    )


def _support_payload(support) -> dict:
    if isinstance(support, FiniteSupport):
        return {"kind": "finite", "K": support.k}
    return {
        "kind": "continuous",
        "continuousMass": support.continuous_mass,
        "discreteMass": support.discrete_mass,
    }


def result_to_json(r: ApmlResult) -> str:
    masses = r.partition.masses()
    payload = {
        "logVbar": r.log_vbar,
        "support": _support_payload(r.support),
        "clumps": [
            {"size": c.size, "total": c.total, "mass": float(masses[i])}
            for i, c in enumerate(r.partition.clumps)
        ],
    }
    return json.dumps(payload)


def partition_dd_to_json(part: PartitionD) -> str:
    masses = part.masses()
    payload = {
        "logVbar": part.log_vbar,
        "ns": list(part.ns),
        "K": part.support(),
        "clumps": [
            {
                "size": c.size,
                "totals": list(c.totals),
                "masses": [float(x) for x in masses[i]],
            }
            for i, c in enumerate(part.clumps)
        ],
    }
    return json.dumps(payload)
