from __future__ import annotations

import resource
import sys
import threading

BUCKETS = (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 60.0)


def own_peak_rss_bytes() -> int:
    """Peak resident set of this process image.

    On Linux ``ru_maxrss`` survives exec, so a freshly spawned process would
    report its parent's peak; VmHWM belongs to the current address space only.
    """
    try:
        with open("/proc/self/status", "rb") as fh:
            for line in fh:
                if line.startswith(b"VmHWM:"):
                    return int(line.split()[1]) * 1024
    except OSError:
        pass
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return peak if sys.platform == "darwin" else peak * 1024


class Histogram:
    def __init__(self, buckets=BUCKETS):
        self.buckets = tuple(buckets)
        self.counts = [0] * (len(self.buckets) + 1)
        self.count = 0
        self.sum = 0.0

    def observe(self, v: float) -> None:
        self.count += 1
        self.sum += v
        for i, b in enumerate(self.buckets):
            if v <= b:
                self.counts[i] += 1
                return
        self.counts[-1] += 1

    def to_doc(self) -> dict:
        cumulative, acc = [], 0
        for c in self.counts:
            acc += c
            cumulative.append(acc)
        return {
            "count": self.count,
            "sum": self.sum,
            "buckets": [{"le": str(b), "count": c} for b, c in zip(self.buckets + ("+Inf",), cumulative)],
        }


class Metrics:
    """Counters, gauges and histograms guarded by one lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self.counters = {"jobs_done": 0, "jobs_failed": 0, "rejected_overloaded": 0, "rejected_bad_request": 0}
        self.histograms = {k: Histogram() for k in ("witness_seconds", "prove_seconds", "queue_seconds")}
        self._worker_peaks: dict[int, int] = {}
        self._peak = own_peak_rss_bytes()

    def inc(self, name: str, n: int = 1) -> None:
        with self._lock:
            self.counters[name] += n

    def observe(self, name: str, v: float) -> None:
        with self._lock:
            self.histograms[name].observe(v)

    def record_worker_peak(self, pid: int, peak: int) -> None:
        with self._lock:
            if peak > self._worker_peaks.get(pid, 0):
                self._worker_peaks[pid] = peak

    def peak_rss_bytes(self) -> int:
        """Own peak plus each worker process's peak; never decreases."""
        with self._lock:
            self._peak = max(self._peak, own_peak_rss_bytes() + sum(self._worker_peaks.values()))
            return self._peak

    def snapshot(self, queue_depth: int, busy_workers: int) -> dict:
        peak = self.peak_rss_bytes()
        with self._lock:
            return {
                "counters": dict(self.counters),
                "gauges": {"queue_depth": queue_depth, "busy_workers": busy_workers, "peak_rss_bytes": peak},
                "histograms": {k: h.to_doc() for k, h in self.histograms.items()},
            }
