"""Service configuration with flag > environment > default precedence."""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass, fields

from ..errors import ParameterError

ENV_PREFIX = "ZKPROVD_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    workers: int = 1
    queue_capacity: int = 16
    registry_root: str = "./registry"
    retention_seconds: float = 3600.0
    default_k: int = 30
    executor: str = "process"  # "process" or "thread"
    cache_entries: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if self.queue_capacity < 0:
            raise ParameterError("queue_capacity must be >= 0")
        if self.default_k < 1:
            raise ParameterError("default_k must be >= 1")
        if self.executor not in ("process", "thread"):
            raise ParameterError("executor must be 'process' or 'thread'")

    @property
    def capacity(self) -> int:
        return self.workers + self.queue_capacity


_CASTS = {"host": str, "port": int, "workers": int, "queue_capacity": int, "registry_root": str,
          "retention_seconds": float, "default_k": int, "executor": str, "cache_entries": int}


def env_name(field_name: str) -> str:
    return ENV_PREFIX + field_name.upper()


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("--workers", type=int, help="parallel proving executors")
    parser.add_argument("--queue-capacity", type=int, help="jobs allowed to wait beyond the busy workers")
    parser.add_argument("--registry-root")
    parser.add_argument("--retention-seconds", type=float, help="how long finished async jobs stay pollable")
    parser.add_argument("--default-k", type=int, help="spot-check query count for new circuits")
    parser.add_argument("--executor", choices=("process", "thread"))
    parser.add_argument("--cache-entries", type=int, help="max registry entries held in memory")


def resolve(args: argparse.Namespace | None = None, env: dict | None = None) -> ServiceConfig:
    env = os.environ if env is None else env
    values = {}
    for f in fields(ServiceConfig):
        flag = getattr(args, f.name, None) if args is not None else None
        if flag is not None:
            values[f.name] = flag
        elif env_name(f.name) in env:
            raw = env[env_name(f.name)]
            try:
                values[f.name] = _CASTS[f.name](raw)
            except ValueError as exc:
                raise ParameterError(f"{env_name(f.name)}={raw!r}: {exc}") from exc
    return ServiceConfig(**values)
