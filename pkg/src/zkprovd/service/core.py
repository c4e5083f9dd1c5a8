"""Request handling, the bounded worker pool, and the async job table."""

from __future__ import annotations

import json
import logging
import multiprocessing
import queue
import threading
import time
import uuid
from concurrent.futures import Future, ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import Callable

from .. import __version__
from ..encoding import encode_circuit, is_circuit_id, parse_decimal
from ..errors import (
    BadRequestError,
    EncodingSyntaxError,
    InternalConsistencyError,
    NotFoundError,
    OverloadedError,
    UnsatisfiableInputError,
    ZkProvdError,
)
from ..registry import Registry, RegistryEntry
from . import worker
from .config import ServiceConfig
from .metrics import Metrics

log = logging.getLogger(__name__)


class UnprocessableError(ZkProvdError):
    """The solver rejected the inputs (failed assertion or inverse of zero)."""

    code = "unprocessable"

    def __init__(self, detail: dict):
        self.detail = detail
        super().__init__(detail.get("message", "unsatisfiable input"))


def _utc(ts: float | None) -> str | None:
    if ts is None:
        return None
    return datetime.fromtimestamp(ts, timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


@dataclass(frozen=True)
class ProofRequest:
    circuit_id: str
    public_inputs: list[str]
    private_inputs: list[str]
    mode: str = "sync"

    @classmethod
    def from_doc(cls, doc) -> ProofRequest:
        if not isinstance(doc, dict):
            raise BadRequestError("proof request must be a JSON object")
        unknown = set(doc) - {"circuit_id", "public_inputs", "private_inputs", "mode"}
        if unknown:
            raise BadRequestError(f"unknown fields: {sorted(unknown)}")
        cid = doc.get("circuit_id")
        if not isinstance(cid, str):
            raise BadRequestError("circuit_id must be a string")
        mode = doc.get("mode", "sync")
        if mode not in ("sync", "async"):
            raise BadRequestError("mode must be 'sync' or 'async'")
        pub, priv = doc.get("public_inputs", []), doc.get("private_inputs", [])
        for name, xs in (("public_inputs", pub), ("private_inputs", priv)):
            if not isinstance(xs, list) or not all(isinstance(v, str) for v in xs):
                raise BadRequestError(f"{name} must be a list of decimal strings")
        return cls(cid, pub, priv, mode)


@dataclass
class ProofResponse:
    circuit_id: str
    proof: dict
    outputs: list[str]
    timings: dict
    peak_rss_bytes: int

    def to_doc(self) -> dict:
        return {
            "circuit_id": self.circuit_id,
            "proof": self.proof,
            "outputs": self.outputs,
            "timings": self.timings,
            "peak_rss_bytes": self.peak_rss_bytes,
        }


@dataclass
class Job:
    job_id: str
    state: str = "queued"
    submitted_at: float = field(default_factory=time.time)
    started_at: float | None = None
    finished_at: float | None = None
    result: ProofResponse | None = None
    error: dict | None = None

    def to_doc(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "submitted_at": _utc(self.submitted_at),
            "started_at": _utc(self.started_at),
            "finished_at": _utc(self.finished_at),
            "result": self.result.to_doc() if self.result else None,
            "error": self.error,
        }


class WorkerPool:
    """``workers`` dispatcher threads over a FIFO queue with hard admission control.

    At most ``workers + queue_capacity`` tasks are admitted at once; the next
    submission raises :class:`OverloadedError` without being enqueued. In
    ``process`` mode each dispatcher hands the proving work to a process pool
    of the same size so proofs run in parallel despite the GIL.
    """

    def __init__(self, workers: int, queue_capacity: int, executor: str = "process"):
        self.workers = workers
        self.capacity = workers + queue_capacity
        self._lock = threading.Lock()
        self._admitted = 0
        self._busy = 0
        self._queue: queue.SimpleQueue = queue.SimpleQueue()
        self._procs = None
        if executor == "process":
            self._procs = ProcessPoolExecutor(workers, mp_context=multiprocessing.get_context("spawn"))
            for f in [self._procs.submit(worker.warmup) for _ in range(workers)]:
                f.result()
        self._threads = [threading.Thread(target=self._loop, name=f"prover-{i}", daemon=True)
                         for i in range(workers)]
        for t in self._threads:
            t.start()

    @property
    def uses_processes(self) -> bool:
        return self._procs is not None

    def submit(self, fn: Callable[[], object]) -> Future:
        with self._lock:
            if self._admitted >= self.capacity:
                raise OverloadedError(f"{self._admitted} jobs in flight, capacity {self.capacity}")
            self._admitted += 1
        fut: Future = Future()
        self._queue.put((fn, fut))
        return fut

    def offload(self, fn, *args):
        """Run ``fn(*args)`` on the process pool when present, inline otherwise."""
        if self._procs is None:
            return fn(*args)
        return self._procs.submit(fn, *args).result()

    def _loop(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            fn, fut = item
            with self._lock:
                self._busy += 1
            try:
                result, exc = fn(), None
            except BaseException as e:  # noqa: BLE001 - handed to the waiter
                result, exc = None, e
            with self._lock:
                self._busy -= 1
                self._admitted -= 1
            if exc is None:
                fut.set_result(result)
            else:
                fut.set_exception(exc)

    def queue_depth(self) -> int:
        with self._lock:
            return self._admitted - self._busy

    def busy(self) -> int:
        with self._lock:
            return self._busy

    def shutdown(self):
        for _ in self._threads:
            self._queue.put(None)
        if self._procs is not None:
            self._procs.shutdown(wait=False, cancel_futures=True)


class _EncodedEntry:
    """Byte forms of a registry entry, computed once for shipping to worker processes."""

    def __init__(self, entry: RegistryEntry):
        self.entry = entry

    @cached_property
    def ecs_bytes(self) -> bytes:
        return encode_circuit(self.entry.ecs)

    @cached_property
    def pk_bytes(self) -> bytes:
        return self.entry.pk.to_bytes()


class ProvingService:
    def __init__(self, config: ServiceConfig, registry: Registry | None = None,
                 job_hook: Callable[[str], None] | None = None):
        self.config = config
        self.registry = registry or Registry(config.registry_root, max_entries=config.cache_entries)
        self.pool = WorkerPool(config.workers, config.queue_capacity, config.executor)
        self.metrics = Metrics()
        self.version = __version__
        self._job_hook = job_hook
        self._jobs: dict[str, Job] = {}
        self._jobs_lock = threading.Lock()
        self._encoded: dict[str, _EncodedEntry] = {}
        self._encoded_lock = threading.Lock()

    def close(self):
        self.pool.shutdown()

    # -- registry passthrough --------------------------------------------------

    def register(self, ecs, k: int | None = None):
        return self.registry.register_circuit(ecs, self.config.default_k if k is None else k)

    def remove(self, cid: str) -> bool:
        with self._encoded_lock:
            self._encoded.pop(cid, None)
        return self.registry.remove_circuit(cid)

    # -- proving -------------------------------------------------------------

    def _parse_inputs(self, entry: RegistryEntry, req: ProofRequest) -> tuple[list[int], list[int]]:
        ecs = entry.ecs
        if len(req.public_inputs) != ecs.num_public_inputs:
            raise BadRequestError(f"expected {ecs.num_public_inputs} public inputs, got {len(req.public_inputs)}")
        if len(req.private_inputs) != ecs.num_private_inputs:
            raise BadRequestError(f"expected {ecs.num_private_inputs} private inputs, got {len(req.private_inputs)}")
        out = []
        for name, xs in (("public_inputs", req.public_inputs), ("private_inputs", req.private_inputs)):
            vals = []
            for v in xs:
                try:
                    n = parse_decimal(v, name)
                except EncodingSyntaxError as exc:
                    raise BadRequestError(str(exc)) from exc
                if not ecs.field.is_canonical(n):
                    raise BadRequestError(f"{name}: {v} is not an element of the circuit field")
                vals.append(n)
            out.append(vals)
        return out[0], out[1]

    def _encoded_for(self, entry: RegistryEntry) -> _EncodedEntry:
        with self._encoded_lock:
            enc = self._encoded.get(entry.id)
            if enc is None or enc.entry is not entry:
                enc = self._encoded[entry.id] = _EncodedEntry(entry)
            return enc

    def _execute(self, entry: RegistryEntry, x: list[int], xp: list[int], job: Job) -> ProofResponse:
        job.started_at = time.time()
        job.state = "running"
        if self._job_hook is not None:
            self._job_hook(job.job_id)
        if self.pool.uses_processes:
            enc = self._encoded_for(entry)
            out = self.pool.offload(worker.run_encoded, entry.id, enc.ecs_bytes, enc.pk_bytes, x, xp)
        else:
            out = worker.run(entry.ecs, entry.pk, x, xp)
        if "error" in out:
            err = out["error"]
            if err["code"] in (UnsatisfiableInputError.code, "division-by-zero"):
                raise UnprocessableError(err)
            raise InternalConsistencyError(err["message"])
        if self.pool.uses_processes:
            self.metrics.record_worker_peak(out["pid"], out["peak_rss_bytes"])
        queue_seconds = job.started_at - job.submitted_at
        for name, v in (("witness_seconds", out["witness_seconds"]), ("prove_seconds", out["prove_seconds"]),
                        ("queue_seconds", queue_seconds)):
            self.metrics.observe(name, v)
        return ProofResponse(
            circuit_id=entry.id,
            proof=json.loads(out["proof"]),
            outputs=[str(v) for v in out["outputs"]],
            timings={"witness_seconds": out["witness_seconds"], "prove_seconds": out["prove_seconds"],
                     "queue_seconds": queue_seconds},
            peak_rss_bytes=self.metrics.peak_rss_bytes(),
        )

    def _run_job(self, entry, x, xp, job: Job) -> ProofResponse:
        try:
            result = self._execute(entry, x, xp, job)
        except ZkProvdError as exc:
            job.error = error_doc(exc)
            job.finished_at = time.time()
            job.state = "failed"
            self.metrics.inc("jobs_failed")
            raise
        except Exception as exc:
            log.exception("job %s crashed", job.job_id)
            job.error = {"code": "internal", "message": str(exc)}
            job.finished_at = time.time()
            job.state = "failed"
            self.metrics.inc("jobs_failed")
            raise InternalConsistencyError(str(exc)) from exc
        job.result = result
        job.finished_at = time.time()
        job.state = "done"
        self.metrics.inc("jobs_done")
        return result

    def submit(self, request: ProofRequest | dict) -> tuple[Job, Future]:
        """Validate and enqueue. Returns the job handle and a future for its ProofResponse."""
        try:
            req = request if isinstance(request, ProofRequest) else ProofRequest.from_doc(request)
            if not is_circuit_id(req.circuit_id):
                raise NotFoundError(f"circuit {req.circuit_id!r} not registered")
            entry = self.registry.fetch_entry(req.circuit_id)  # immutable snapshot for the job
            x, xp = self._parse_inputs(entry, req)
        except BadRequestError:
            self.metrics.inc("rejected_bad_request")
            raise
        job = Job(job_id=uuid.uuid4().hex)
        try:
            fut = self.pool.submit(lambda: self._run_job(entry, x, xp, job))
        except OverloadedError:
            self.metrics.inc("rejected_overloaded")
            raise
        if req.mode == "async":
            with self._jobs_lock:
                self._purge_locked()
                self._jobs[job.job_id] = job
        return job, fut

    def submit_proof(self, request: ProofRequest | dict):
        """Blocking convenience: ProofResponse for sync requests, the queued Job for async ones."""
        req = request if isinstance(request, ProofRequest) else ProofRequest.from_doc(request)
        job, fut = self.submit(req)
        if req.mode == "async":
            return job
        return fut.result()

    def _purge_locked(self):
        horizon = time.time() - self.config.retention_seconds
        for jid in [j for j, job in self._jobs.items() if job.finished_at is not None and job.finished_at < horizon]:
            del self._jobs[jid]

    def get_job(self, job_id: str) -> Job:
        with self._jobs_lock:
            self._purge_locked()
            job = self._jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"job {job_id!r} not found")
        return job

    def metrics_snapshot(self) -> dict:
        return self.metrics.snapshot(self.pool.queue_depth(), self.pool.busy())

    def health(self) -> dict:
        return {"status": "ok", "version": self.version, "registry_circuit_count": len(self.registry.list_circuits())}


def error_doc(exc: ZkProvdError) -> dict:
    doc = {"code": exc.code, "message": str(exc)}
    if isinstance(exc, UnprocessableError):
        doc["detail"] = exc.detail
    elif isinstance(exc, UnsatisfiableInputError):
        doc["instruction_index"] = exc.instruction_index
    return doc
