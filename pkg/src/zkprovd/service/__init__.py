from .config import ServiceConfig, resolve
from .core import Job, ProofRequest, ProofResponse, ProvingService, UnprocessableError, WorkerPool
from .app import create_app

__all__ = ["ServiceConfig", "resolve", "Job", "ProofRequest", "ProofResponse", "ProvingService",
           "UnprocessableError", "WorkerPool", "create_app"]
