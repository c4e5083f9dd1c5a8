"""Off-chain stand-in for the verifier contract.

Holds no state of its own: verification material is read from the proving
service's registry root, opened read-only. The verifier never sees private
inputs or witnesses.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import dataclass

from fastapi import FastAPI, Request
from starlette.concurrency import run_in_threadpool

from . import __version__, backend
from .backend.proof import Proof
from .encoding import is_circuit_id, parse_decimal
from .errors import BadRequestError, EncodingSyntaxError, NotFoundError
from .registry import Registry
from .service.app import install_error_handler, json_response, read_json


@dataclass(frozen=True)
class VerifyRequest:
    circuit_id: str
    public_inputs: list[int]
    outputs: list[int]
    proof: Proof

    @classmethod
    def from_doc(cls, doc) -> VerifyRequest:
        if not (isinstance(doc, dict) and set(doc) == {"circuit_id", "public_inputs", "outputs", "proof"}):
            raise BadRequestError("verify request needs circuit_id, public_inputs, outputs, proof")
        if not isinstance(doc["circuit_id"], str):
            raise BadRequestError("circuit_id must be a string")
        try:
            vals = [[parse_decimal(v, name) for v in _list(doc[name], name)] for name in ("public_inputs", "outputs")]
            proof = Proof.from_doc(doc["proof"])
        except EncodingSyntaxError as exc:
            raise BadRequestError(f"undecodable verify request: {exc}") from exc
        return cls(doc["circuit_id"], vals[0], vals[1], proof)


def _list(v, name):
    if not isinstance(v, list):
        raise EncodingSyntaxError(f"{name} must be a list")
    return v


@dataclass(frozen=True)
class VerifierDecision:
    accepted: bool
    reason: str | None = None

    def to_doc(self) -> dict:
        return {"accepted": self.accepted, "reason": self.reason}


class VerifierService:
    def __init__(self, registry_root):
        self.registry = Registry(registry_root, read_only=True)

    def verify(self, request: VerifyRequest | dict) -> VerifierDecision:
        req = request if isinstance(request, VerifyRequest) else VerifyRequest.from_doc(request)
        if not is_circuit_id(req.circuit_id):
            raise NotFoundError(f"circuit {req.circuit_id!r} not registered")
        entry = self.registry.fetch_entry(req.circuit_id)
        verdict = backend.verify(entry.vk, req.public_inputs, req.outputs, req.proof, entry.ecs, ecs_id=entry.id)
        return VerifierDecision(verdict.accepted, verdict.reason)


def create_verifier_app(registry_root) -> FastAPI:
    service = VerifierService(registry_root)

    @asynccontextmanager
    async def lifespan(app):
        yield

    app = FastAPI(title="zkprovd verifier", version=__version__, lifespan=lifespan)
    app.state.service = service
    install_error_handler(app)

    @app.post("/v1/verify")
    async def verify(request: Request):
        doc = await read_json(request)
        decision = await run_in_threadpool(service.verify, doc)
        return json_response(decision.to_doc())

    @app.get("/v1/health")
    async def health():
        return json_response({"status": "ok", "version": __version__})

    return app
