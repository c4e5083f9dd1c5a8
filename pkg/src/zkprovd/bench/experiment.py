"""Drive locally spawned service instances through the scaling experiments.

A: one instance per resource cap ("machine size"), B: one instance swept
over worker counts, C: a swept number of instances sharing one registry root.
"""

from __future__ import annotations

import logging
import os
import platform
import resource
import shutil
import socket
import statistics
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import psutil

from ..encoding import encode_circuit
from .workload import WorkloadSpec, generate_workload

log = logging.getLogger(__name__)


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResourceCaps:
    cpus: int | None = None
    memory_mb: int | None = None

    def label(self) -> str:
        parts = []
        if self.cpus is not None:
            parts.append(f"cpus={self.cpus}")
        if self.memory_mb is not None:
            parts.append(f"mem={self.memory_mb}MB")
        return "/".join(parts) or "uncapped"

    def supported(self) -> bool:
        if self.cpus is not None:
            if not hasattr(os, "sched_setaffinity") or self.cpus > len(os.sched_getaffinity(0)):
                return False
        return True


@dataclass
class ExperimentConfig:
    experiment: str
    workload: WorkloadSpec
    total_requests: int
    workers_per_instance: list[int] = field(default_factory=lambda: [1])
    instance_count: list[int] = field(default_factory=lambda: [1])
    resource_caps: list[ResourceCaps] | None = None
    warmup_requests: int = 3
    k: int = 30
    max_in_flight: int | None = None
    startup_timeout: float = 120.0

    def __post_init__(self):
        if self.experiment not in ("A", "B", "C"):
            raise ValueError("experiment must be A, B or C")
        if not self.workers_per_instance or not self.instance_count:
            raise ValueError("workers_per_instance and instance_count must be non-empty")
        if self.resource_caps is not None and not self.resource_caps:
            raise ValueError("resource_caps, when given, must be non-empty")
        if self.total_requests < max(self.instance_count):
            raise ValueError("total_requests must be at least the instance count")
        if min(self.workers_per_instance) < 1 or min(self.instance_count) < 1:
            raise ValueError("worker and instance counts must be >= 1")

    @classmethod
    def from_doc(cls, doc: dict) -> ExperimentConfig:
        caps = doc.get("resource_caps")
        return cls(
            experiment=doc["experiment"],
            workload=WorkloadSpec.from_doc(doc["workload"]),
            total_requests=int(doc["total_requests"]),
            workers_per_instance=_as_list(doc.get("workers_per_instance", [1])),
            instance_count=_as_list(doc.get("instance_count", [1])),
            resource_caps=[ResourceCaps(**c) for c in caps] if caps is not None else None,
            warmup_requests=int(doc.get("warmup_requests", 3)),
            k=int(doc.get("k", 30)),
            max_in_flight=doc.get("max_in_flight"),
        )

    def points(self) -> list[tuple[str, int, int, ResourceCaps | None]]:
        """(label, instances, workers, caps) for every configuration point."""
        w0, i0 = self.workers_per_instance[0], self.instance_count[0]
        if self.experiment == "A":
            caps = self.resource_caps or [None]
            out = []
            for c in caps:
                if c is None:
                    out.append(("A", 1, w0, None))
                elif c.supported():
                    out.append((f"A:{c.label()}", 1, w0, c))
                else:
                    out.append((f"A:advisory:{c.label()}", 1, w0, None))
            return out
        if self.experiment == "B":
            return [("B", i0, w, None) for w in self.workers_per_instance]
        return [("C", i, w0, None) for i in self.instance_count]


def _as_list(v) -> list[int]:
    return [int(x) for x in v] if isinstance(v, list) else [int(v)]


@dataclass
class MeasurementRecord:
    experiment: str
    instances: int
    workers: int
    n_constraints: int
    avg_prove_s: float
    p50_s: float
    p95_s: float
    throughput_pps: float
    peak_rss_gb: float
    rejects: int

    FIELDS = ("experiment", "instances", "workers", "n_constraints", "avg_prove_s", "p50_s", "p95_s",
              "throughput_pps", "peak_rss_gb", "rejects")


def host_metadata() -> dict:
    return {
        "hardware_threads": os.cpu_count(),
        "usable_threads": len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count(),
        "memory_bytes": psutil.virtual_memory().total,
        "platform": platform.platform(),
        "machine": platform.machine(),
        "python": platform.python_version(),
    }


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _limits(caps: ResourceCaps | None):
    if caps is None:
        return None

    def apply():
        if caps.cpus is not None:
            os.sched_setaffinity(0, sorted(os.sched_getaffinity(0))[: caps.cpus])
        if caps.memory_mb is not None:
            limit = caps.memory_mb * 1024 * 1024
            resource.setrlimit(resource.RLIMIT_AS, (limit, limit))

    return apply


class Instance:
    def __init__(self, registry_root: Path, workers: int, queue_capacity: int, caps: ResourceCaps | None,
                 log_dir: Path):
        self.port = _free_port()
        self.url = f"http://127.0.0.1:{self.port}"
        self.log_path = log_dir / f"instance-{self.port}.log"
        cmd = [sys.executable, "-m", "zkprovd", "serve", "--port", str(self.port), "--workers", str(workers),
               "--queue-capacity", str(queue_capacity), "--registry-root", str(registry_root),
               "--executor", "process"]
        self._log = open(self.log_path, "wb")
        self.proc = subprocess.Popen(cmd, stdout=self._log, stderr=subprocess.STDOUT, preexec_fn=_limits(caps))

    def wait_ready(self, client: httpx.Client, timeout: float) -> None:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.proc.poll() is not None:
                raise ExperimentError(f"instance on port {self.port} exited with {self.proc.returncode}:\n"
                                      + self.log_path.read_text(errors="replace")[-4000:])
            try:
                if client.get(f"{self.url}/v1/health", timeout=2.0).status_code == 200:
                    return
            except httpx.TransportError:
                pass
            time.sleep(0.1)
        self.stop()
        raise ExperimentError(f"instance on port {self.port} not ready after {timeout}s:\n"
                              + self.log_path.read_text(errors="replace")[-4000:])

    def stop(self) -> None:
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(10)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
        self._log.close()


def _percentile(xs: list[float], q: float) -> float:
    if len(xs) == 1:
        return xs[0]
    return statistics.quantiles(xs, n=100, method="inclusive")[int(q) - 1]


def _prove_once(client: httpx.Client, url: str, body: dict) -> tuple[str, float | None]:
    r = client.post(f"{url}/v1/proofs", json=body)
    if r.status_code == 503:
        return "reject", None
    if r.status_code != 200:
        raise ExperimentError(f"{url} answered {r.status_code}: {r.text[:500]}")
    t = r.json()["timings"]
    return "ok", t["witness_seconds"] + t["prove_seconds"]


def run_point(config: ExperimentConfig, label: str, instances: int, workers: int, caps: ResourceCaps | None,
              workdir: Path) -> MeasurementRecord:
    ecs, inputs = generate_workload(config.workload)
    root = workdir / f"registry-{label.replace(':', '_').replace('/', '_')}-{instances}-{workers}"
    in_flight = config.max_in_flight or instances * workers * 2
    queue_capacity = max(in_flight, 1)
    client = httpx.Client(timeout=600.0, limits=httpx.Limits(max_connections=in_flight + 4))
    procs: list[Instance] = []
    try:
        procs = [Instance(root, workers, queue_capacity, caps, workdir) for _ in range(instances)]
        for inst in procs:
            inst.wait_ready(client, config.startup_timeout)
        r = client.post(f"{procs[0].url}/v1/circuits", params={"k": config.k}, content=encode_circuit(ecs))
        if r.status_code != 201:
            raise ExperimentError(f"registration failed: {r.status_code} {r.text[:500]}")
        body = {"circuit_id": r.json()["id"], "public_inputs": inputs["public"],
                "private_inputs": inputs["private"], "mode": "sync"}

        for inst in procs:
            for _ in range(config.warmup_requests):
                _prove_once(client, inst.url, body)

        t0 = time.perf_counter()
        with ThreadPoolExecutor(in_flight) as ex:
            results = list(ex.map(lambda i: _prove_once(client, procs[i % instances].url, body),
                                  range(config.total_requests)))
        wall = time.perf_counter() - t0

        peaks = [client.get(f"{inst.url}/v1/metrics").json()["gauges"]["peak_rss_bytes"] for inst in procs]
    finally:
        for inst in procs:
            inst.stop()
        client.close()

    latencies = [t for status, t in results if status == "ok"]
    rejects = sum(1 for status, _ in results if status == "reject")
    if not latencies:
        raise ExperimentError(f"no request completed at point {label}/{instances}/{workers}")
    return MeasurementRecord(
        experiment=label,
        instances=instances,
        workers=workers,
        n_constraints=config.workload.steps,
        avg_prove_s=statistics.fmean(latencies),
        p50_s=_percentile(latencies, 50),
        p95_s=_percentile(latencies, 95),
        throughput_pps=len(latencies) / wall,
        peak_rss_gb=max(peaks) / 1e9,
        rejects=rejects,
    )


def run_experiment(config: ExperimentConfig, out_dir: str | os.PathLike | None = None,
                   workdir: str | os.PathLike | None = None) -> list[MeasurementRecord]:
    """Run every point of ``config``; when ``out_dir`` is given append rows to ``results.csv`` there."""
    from .report import append_csv, write_host_metadata

    own_tmp = workdir is None
    work = Path(tempfile.mkdtemp(prefix="zkprovd-bench-")) if own_tmp else Path(workdir)
    records = []
    try:
        for label, instances, workers, caps in config.points():
            log.info("point %s instances=%d workers=%d n=%d", label, instances, workers, config.workload.steps)
            rec = run_point(config, label, instances, workers, caps, work)
            records.append(rec)
            if out_dir is not None:
                append_csv(Path(out_dir) / "results.csv", [rec])
    finally:
        if own_tmp:
            shutil.rmtree(work, ignore_errors=True)
    if out_dir is not None:
        write_host_metadata(Path(out_dir) / "host.json", host_metadata())
    return records
