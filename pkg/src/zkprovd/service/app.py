"""HTTP front-end of the proving service."""

from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from starlette.concurrency import run_in_threadpool

from ..encoding import decode_circuit
from ..errors import (
    BadRequestError,
    ConflictError,
    EncodingSyntaxError,
    FieldConfigError,
    FieldDivisionByZero,
    InvariantViolation,
    NotFoundError,
    OverloadedError,
    ParameterError,
    UnsatisfiableInputError,
    ZkProvdError,
)
from .core import ProvingService, UnprocessableError, error_doc

_STATUS = [
    (NotFoundError, 404),
    (ConflictError, 409),
    (OverloadedError, 503),
    (UnprocessableError, 422),
    (UnsatisfiableInputError, 422),
    (FieldDivisionByZero, 422),
    (BadRequestError, 400),
    (EncodingSyntaxError, 400),
    (InvariantViolation, 400),
    (ParameterError, 400),
    (FieldConfigError, 400),
]


def status_for(exc: ZkProvdError) -> int:
    for cls, status in _STATUS:
        if isinstance(exc, cls):
            return status
    return 500


def json_response(doc, status: int = 200) -> Response:
    return Response(json.dumps(doc, separators=(",", ":")), status_code=status, media_type="application/json")


def install_error_handler(app: FastAPI) -> None:
    @app.exception_handler(ZkProvdError)
    async def _handle(request: Request, exc: ZkProvdError):
        headers = {"Retry-After": "1"} if isinstance(exc, OverloadedError) else None
        return JSONResponse({"error": error_doc(exc)}, status_code=status_for(exc), headers=headers)


async def read_json(request: Request):
    body = await request.body()
    try:
        return json.loads(body)
    except ValueError as exc:
        raise BadRequestError(f"invalid JSON body: {exc}") from exc


def create_app(service: ProvingService) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app):
        yield
        service.close()

    app = FastAPI(title="zkprovd proving service", version=service.version, lifespan=lifespan)
    app.state.service = service
    install_error_handler(app)

    @app.post("/v1/circuits", status_code=201)
    async def register_circuit(request: Request):
        k = request.query_params.get("k")
        if k is not None:
            try:
                k = int(k)
            except ValueError:
                raise BadRequestError(f"k must be an integer, got {k!r}") from None
        body = await request.body()
        ecs = await run_in_threadpool(decode_circuit, body)
        meta = await run_in_threadpool(service.register, ecs, k)
        return json_response(meta.to_doc(), 201)

    @app.get("/v1/circuits")
    async def list_circuits():
        metas = await run_in_threadpool(service.registry.list_circuits)
        return json_response([m.to_doc() for m in metas])

    @app.get("/v1/circuits/{cid}")
    async def get_circuit(cid: str):
        entry = await run_in_threadpool(service.registry.fetch_entry, cid)
        return json_response(entry.metadata.to_doc())

    @app.delete("/v1/circuits/{cid}")
    async def delete_circuit(cid: str):
        removed = await run_in_threadpool(service.remove, cid)
        if not removed:
            raise NotFoundError(f"circuit {cid!r} not registered")
        return json_response({"id": cid, "removed": True})

    @app.post("/v1/proofs")
    async def submit_proof(request: Request):
        doc = await read_json(request)
        job, fut = await run_in_threadpool(service.submit, doc)
        if isinstance(doc, dict) and doc.get("mode") == "async":
            return json_response(job.to_doc(), 202)
        result = await asyncio.wrap_future(fut)
        return json_response(result.to_doc())

    @app.get("/v1/jobs/{job_id}")
    async def get_job(job_id: str):
        return json_response(service.get_job(job_id).to_doc())

    @app.get("/v1/metrics")
    async def metrics():
        return json_response(service.metrics_snapshot())

    @app.get("/v1/health")
    async def health():
        return json_response(await run_in_threadpool(service.health))

    return app
