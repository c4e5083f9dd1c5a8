"""``bench run --config <file>`` and ``bench report --in results.csv --out <dir>``.

A config file holds one experiment object or ``{"experiments": [...]}``::

    {"experiment": "C",
     "workload": {"steps": 20000, "seed_input": "2"},
     "total_requests": 40,
     "workers_per_instance": [1],
     "instance_count": [1, 2],
     "warmup_requests": 3}
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiment import ExperimentConfig, ExperimentError, run_experiment
from .report import emit_report, read_csv


def load_configs(path) -> list[ExperimentConfig]:
    doc = json.loads(Path(path).read_text())
    docs = doc["experiments"] if isinstance(doc, dict) and "experiments" in doc else [doc]
    return [ExperimentConfig.from_doc(d) for d in docs]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bench")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run experiments and write results.csv plus charts")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default="bench-results")
    rep = sub.add_parser("report", help="redraw charts from an existing results.csv")
    rep.add_argument("--in", dest="inp", required=True)
    rep.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    logging.getLogger("httpx").setLevel(logging.WARNING)

    if args.command == "run":
        records = []
        try:
            for cfg in load_configs(args.config):
                records.extend(run_experiment(cfg))
        except ExperimentError as exc:
            print(f"experiment aborted: {exc}", file=sys.stderr)
            return 1
        from .experiment import host_metadata
        from .report import write_host_metadata

        paths = emit_report(records, args.out)
        write_host_metadata(Path(args.out) / "host.json", host_metadata())
    else:
        paths = emit_report(read_csv(args.inp), args.out)
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
