"""Run experiments A, B and C from configs/ and write results.csv, host.json and charts.

    python3 scripts/run_experiments.py [--out results] [--only B]

Each experiment starts fresh service processes on free local ports. Thread
counts in configs/experiment_b.json are extended with H and 2H, where H is the
number of usable hardware threads, so the plateau check below is meaningful.
"""

import argparse
import json
import logging
import os
from pathlib import Path

from zkprovd.bench.cli import load_configs
from zkprovd.bench.experiment import host_metadata, run_experiment
from zkprovd.bench.report import emit_report, write_host_metadata

ROOT = Path(__file__).resolve().parents[1]


def summarize(records, threads):
    by = lambda exp, **kw: [r for r in records if r.experiment == exp  # noqa: E731
                            and all(getattr(r, k) == v for k, v in kw.items())]
    c1, c2 = by("C", instances=1), by("C", instances=2)
    if c1 and c2:
        print(f"horizontal: throughput x{c2[0].throughput_pps / c1[0].throughput_pps:.2f}, "
              f"latency x{c2[0].avg_prove_s / c1[0].avg_prove_s:.2f} at 2 instances (host threads {threads})")
    tp = {r.workers: r.throughput_pps for r in by("B")}
    h = threads
    if all(w in tp for w in (1, 2, h, 2 * h)):
        print(f"plateau: tp(2)/tp(1)={tp[2] / tp[1]:.2f} vs tp(2H)/tp(H)={tp[2 * h] / tp[h]:.2f} (H={h})")
    mem = sorted((r.n_constraints, r.peak_rss_gb) for r in by("A"))
    if mem:
        print("memory: " + ", ".join(f"n={n}: {g:.3f} GB" for n, g in mem))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--only", choices=("A", "B", "C"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    logging.getLogger("httpx").setLevel(logging.WARNING)

    threads = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    records = []
    for letter in "abc":
        if args.only and args.only.lower() != letter:
            continue
        for cfg in load_configs(ROOT / "configs" / f"experiment_{letter}.json"):
            if cfg.experiment == "B":
                cfg.workers_per_instance = sorted(set(cfg.workers_per_instance) | {threads, 2 * threads})
            records += run_experiment(cfg)
    paths = emit_report(records, args.out)
    meta = host_metadata()
    write_host_metadata(Path(args.out) / "host.json", meta)
    print(json.dumps(meta))
    for p in paths:
        print(p)
    summarize(records, threads)


if __name__ == "__main__":
    main()
