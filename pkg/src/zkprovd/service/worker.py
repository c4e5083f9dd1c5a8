"""The Proving Instance: witness computation followed by proof generation.

``run_encoded`` is the entry point for worker processes; it keeps a small
per-process cache of decoded circuits keyed by circuit id (ids are content
hashes, so a cached decode is always valid).
"""

from __future__ import annotations

import os
import time
from collections import OrderedDict

from .. import backend
from ..backend import ProvingKey
from ..circuit import CircuitArtifact, solve_witness
from ..encoding import decode_circuit
from ..errors import UnsatisfiableInputError, ZkProvdError
from .metrics import own_peak_rss_bytes

_DECODED: OrderedDict = OrderedDict()
_DECODED_MAX = 4


def run(ecs: CircuitArtifact, pk: ProvingKey, x: list[int], x_prime: list[int]) -> dict:
    try:
        t0 = time.perf_counter()
        witness, outputs = solve_witness(ecs, x, x_prime)
        t1 = time.perf_counter()
        proof = backend.prove(pk, ecs, witness, x, outputs)
        t2 = time.perf_counter()
    except ZkProvdError as exc:
        err = {"code": exc.code, "message": str(exc), "type": type(exc).__name__}
        if isinstance(exc, UnsatisfiableInputError):
            err["instruction_index"] = exc.instruction_index
        return {"error": err}
    del witness
    return {
        "proof": proof.to_bytes(),
        "outputs": [o.value for o in outputs],
        "witness_seconds": t1 - t0,
        "prove_seconds": t2 - t1,
        "pid": os.getpid(),
        "peak_rss_bytes": own_peak_rss_bytes(),
    }


def run_encoded(cid: str, ecs_bytes: bytes, pk_bytes: bytes, x: list[int], x_prime: list[int]) -> dict:
    cached = _DECODED.get(cid)
    if cached is None:
        cached = (decode_circuit(ecs_bytes), ProvingKey.from_bytes(pk_bytes))
        _DECODED[cid] = cached
        while len(_DECODED) > _DECODED_MAX:
            _DECODED.popitem(last=False)
    else:
        _DECODED.move_to_end(cid)
    return run(cached[0], cached[1], x, x_prime)


def warmup() -> int:
    return os.getpid()
