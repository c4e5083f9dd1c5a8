"""Proof-generation backends, dispatched by ``backend_id``.

A backend is any object with ``setup``, ``prove`` and ``verify`` methods and
a ``backend_id`` string; :func:`register_backend` makes it reachable from the
service layer.
"""

from __future__ import annotations

from .keys import ProvingKey, VerifyingKey, Verdict
from .spotcheck import SpotCheckBackend

_BACKENDS = {}


def register_backend(backend) -> None:
    _BACKENDS[backend.backend_id] = backend


def get_backend(backend_id: str):
    try:
        return _BACKENDS[backend_id]
    except KeyError:
        raise ValueError(f"unknown backend {backend_id!r}") from None


register_backend(SpotCheckBackend())

DEFAULT_BACKEND = SpotCheckBackend.backend_id


def setup(ecs, k: int = 30, backend_id: str = DEFAULT_BACKEND):
    return get_backend(backend_id).setup(ecs, k)


def prove(pk: ProvingKey, ecs, w, x, outputs):
    return get_backend(pk.backend_id).prove(pk, ecs, w, x, outputs)


def verify(vk: VerifyingKey, x, outputs, proof, ecs, **kwargs) -> Verdict:
    return get_backend(vk.backend_id).verify(vk, x, outputs, proof, ecs, **kwargs)


__all__ = ["ProvingKey", "VerifyingKey", "Verdict", "setup", "prove", "verify", "register_backend", "get_backend"]
