"""CSV persistence and charts for measurement records.

``results.csv`` header (stable contract)::

    experiment,instances,workers,n_constraints,avg_prove_s,p50_s,p95_s,throughput_pps,peak_rss_gb,rejects
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiment import MeasurementRecord  # noqa: E402

_INT_FIELDS = {"instances", "workers", "n_constraints", "rejects"}
_FLOAT_FIELDS = {"avg_prove_s", "p50_s", "p95_s", "throughput_pps", "peak_rss_gb"}


def _row(rec: MeasurementRecord) -> list[str]:
    return [repr(v) if isinstance(v, float) else str(v) for v in (getattr(rec, f) for f in MeasurementRecord.FIELDS)]


def write_csv(path, records: list[MeasurementRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MeasurementRecord.FIELDS)
        w.writerows(_row(r) for r in records)
    return path


def append_csv(path, records: list[MeasurementRecord]) -> Path:
    path = Path(path)
    if not path.exists():
        return write_csv(path, records)
    with open(path, "a", newline="") as fh:
        csv.writer(fh).writerows(_row(r) for r in records)
    return path


def read_csv(path) -> list[MeasurementRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != MeasurementRecord.FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for row in reader:
            vals = {}
            for k, v in row.items():
                vals[k] = int(v) if k in _INT_FIELDS else float(v) if k in _FLOAT_FIELDS else v
            out.append(MeasurementRecord(**vals))
    return out


def write_host_metadata(path, meta: dict) -> None:
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _x_axis(letter: str, recs: list[MeasurementRecord]):
    if letter == "B":
        return "worker threads per instance", [r.workers for r in recs], None
    if letter == "C":
        return "instances", [r.instances for r in recs], None
    labels = [f"{r.experiment.partition(':')[2] or 'uncapped'}\nn={r.n_constraints}" for r in recs]
    return "instance size / workload", list(range(len(recs))), labels


def emit_report(records: list[MeasurementRecord], out_dir) -> list[Path]:
    """Write ``results.csv`` plus one ``experiment_<X>.png`` per experiment present."""
    if not records:
        raise ValueError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_csv(out / "results.csv", records)]

    groups: dict[str, list[MeasurementRecord]] = defaultdict(list)
    for r in records:
        groups[r.experiment[0]].append(r)
    for letter, recs in sorted(groups.items()):
        xlabel, xs, ticks = _x_axis(letter, recs)
        fig, (ax_t, ax_m) = plt.subplots(1, 2, figsize=(10, 4))
        ax_t.plot(xs, [r.avg_prove_s for r in recs], "o-", label="avg")
        ax_t.plot(xs, [r.p95_s for r in recs], "x--", label="p95")
        ax_t.set_ylabel("proving time per proof [s]")
        ax_tp = ax_t.twinx()
        ax_tp.plot(xs, [r.throughput_pps for r in recs], "s:", color="tab:green")
        ax_tp.set_ylabel("throughput [proofs/s]", color="tab:green")
        ax_t.legend(loc="upper left")
        pos = list(range(len(recs)))
        ax_m.bar(pos, [r.peak_rss_gb for r in recs])
        ax_m.set_xticks(pos, [str(x) for x in xs] if ticks is None else ticks)
        ax_m.set_ylabel("peak memory per instance [GB]")
        for ax in (ax_t, ax_m):
            ax.set_xlabel(xlabel)
        if ticks is not None:
            ax_t.set_xticks(xs, ticks)
        fig.suptitle(f"Experiment {letter}")
        fig.tight_layout()
        path = out / f"experiment_{letter}.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        paths.append(path)
    return paths
