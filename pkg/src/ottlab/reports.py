"""Artifact emission: JSON reports, JSONL transcripts, CSV scans, figures.

Everything written here is byte-deterministic for a fixed seed: dict keys
are sorted, floats use shortest round-trip repr, and figures are rendered
with a pinned style and stripped metadata.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Iterable, Sequence

import numpy as np

from .factory import ReductionTrialStats
from .lab import TradeoffPoint
from .protocols import AliceView, BobView, OneTimeTable, join_views

TRANSCRIPT_HEADER = "# ottlab transcripts v1; one JSON record per line; see docs/transcript_schema.json"


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    return obj


def dump_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dump_json(obj))


def write_jsonl(path, records: Iterable, header: str = TRANSCRIPT_HEADER) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for rec in records:
            fh.write(json.dumps(to_jsonable(rec), sort_keys=True,
                                separators=(",", ":")) + "\n")


def read_jsonl(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            out.append(json.loads(line))
    return out


def transcript_record(tr) -> dict:
    """Flatten a protocol transcript for JSONL (state snapshots omitted)."""
    rec = dataclasses.asdict(tr)
    rec.pop("sent_states", None)
    rec.pop("curious_notes", None)
    return {k: to_jsonable(v) for k, v in rec.items()}


# ---------------------------------------------------------------- batches

def write_batch_files(tables: Sequence[OneTimeTable], alice_path,
                      bob_path) -> None:
    """Two files, one per party view, sharing only the table ids."""
    alice = {"view": "alice",
             "tables": [{"id": t.id, "x": t.x, "e": t.e} for t in tables]}
    bob = {"view": "bob",
           "tables": [{"id": t.id, "y": t.y, "f": t.f} for t in tables]}
    write_json(alice_path, alice)
    write_json(bob_path, bob)


def read_batch_files(alice_path, bob_path) -> list[OneTimeTable]:
    with open(alice_path) as fh:
        alice = json.load(fh)
    with open(bob_path) as fh:
        bob = json.load(fh)
    if alice.get("view") != "alice" or bob.get("view") != "bob":
        raise ValueError("batch files have wrong view markers")
    a_views = {rec["id"]: AliceView(rec["id"], rec["x"], rec["e"])
               for rec in alice["tables"]}
    b_views = {rec["id"]: BobView(rec["id"], rec["y"], rec["f"])
               for rec in bob["tables"]}
    if set(a_views) != set(b_views):
        raise ValueError("batch files disagree on table ids")
    return [join_views(a_views[i], b_views[i]) for i in sorted(a_views)]


# ---------------------------------------------------------------- CSV

SCAN_HEADER = "seed,chi_y,chi_r,chi_yr,sum"


def write_scan_csv(path, points: Sequence[TradeoffPoint]) -> None:
    with open(path, "w") as fh:
        fh.write(SCAN_HEADER + "\n")
        for p in points:
            fh.write(f"{p.seed},{p.chi_y!r},{p.chi_r!r},{p.chi_yr!r},"
                     f"{p.sum_value!r}\n")


def read_scan_csv(path) -> list[TradeoffPoint]:
    points = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != SCAN_HEADER:
            raise ValueError(f"unexpected scan header {header!r}")
        for line in fh:
            seed, chi_y, chi_r, chi_yr, _ = line.strip().split(",")
            points.append(TradeoffPoint(int(seed), float(chi_y),
                                        float(chi_r), float(chi_yr)))
    return points


def write_reduction_csv(path, stats: Sequence[ReductionTrialStats]) -> None:
    with open(path, "w") as fh:
        fh.write("q,targets,accepted,accepted_wrong,residual_rate,acceptance_rate\n")
        for s in stats:
            fh.write(f"{s.q},{s.targets},{s.accepted},{s.accepted_wrong},"
                     f"{s.residual_rate!r},{s.acceptance_rate!r}\n")


# ---------------------------------------------------------------- figures

def _matplotlib():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


_PNG_META = {"Software": None, "Creation Time": None}


def plot_scan(points: Sequence[TradeoffPoint], path) -> None:
    """Scatter of the two Holevo axes: max(chi_r, chi_yr) against chi_y."""
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(5, 4), dpi=120)
    xs = [max(p.chi_r, p.chi_yr) for p in points]
    ys = [p.chi_y for p in points]
    ax.scatter(xs, ys, s=2, linewidths=0, alpha=0.5, color="#1f5fa8")
    ax.plot([0, 1], [1, 0], lw=0.8, color="#888888")
    ax.set_xlabel("max leak about r or y xor r (bits)")
    ax.set_ylabel("leak about y (bits)")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_title("one-time table information tradeoff")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def plot_reduction_curve(stats: Sequence[ReductionTrialStats], path) -> None:
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(5, 4), dpi=120)
    qs = [s.q for s in stats]
    ax.plot(qs, [s.residual_rate for s in stats], "o-", label="residual error")
    ax.plot(qs, [s.acceptance_rate for s in stats], "s--", label="acceptance")
    if stats:
        ax.axhline(stats[0].injected_rate, color="#888888", lw=0.8,
                   label="injected error")
    ax.set_xlabel("auxiliary checks q")
    ax.set_ylabel("rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="center right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
