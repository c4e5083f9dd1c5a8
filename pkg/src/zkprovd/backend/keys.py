"""Key material and verdicts shared by all backends."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from ..encoding import canonical_json, is_circuit_id, load_json, parse_decimal
from ..errors import EncodingSyntaxError, ParameterError

_PK_MAGIC = b"zkprovd-pk/v1\n"


@dataclass(frozen=True)
class ProvingKey:
    backend_id: str
    circuit_id: str
    payload: bytes

    @cached_property
    def decoded(self) -> dict:
        return load_json(self.payload)

    def to_bytes(self) -> bytes:
        header = canonical_json({"backend_id": self.backend_id, "circuit_id": self.circuit_id})
        return _PK_MAGIC + header + b"\n" + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> ProvingKey:
        if not data.startswith(_PK_MAGIC):
            raise EncodingSyntaxError("not a proving key file")
        header, sep, payload = data[len(_PK_MAGIC):].partition(b"\n")
        if not sep:
            raise EncodingSyntaxError("truncated proving key")
        doc = load_json(header)
        if not (isinstance(doc, dict) and set(doc) == {"backend_id", "circuit_id"}
                and isinstance(doc["backend_id"], str) and is_circuit_id(doc["circuit_id"])):
            raise EncodingSyntaxError("malformed proving key header")
        return cls(doc["backend_id"], doc["circuit_id"], payload)


@dataclass(frozen=True)
class VerifyingKey:
    backend_id: str
    circuit_id: str
    k: int
    modulus: int

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise ParameterError(f"query count k must be >= 1, got {self.k!r}")

    def to_doc(self) -> dict:
        return {"backend_id": self.backend_id, "circuit_id": self.circuit_id,
                "k": self.k, "modulus": str(self.modulus)}

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_doc())

    @classmethod
    def from_doc(cls, doc) -> VerifyingKey:
        if not (isinstance(doc, dict) and set(doc) == {"backend_id", "circuit_id", "k", "modulus"}):
            raise EncodingSyntaxError("malformed verifying key")
        if not is_circuit_id(doc["circuit_id"]) or not isinstance(doc["backend_id"], str):
            raise EncodingSyntaxError("malformed verifying key")
        return cls(doc["backend_id"], doc["circuit_id"], doc["k"], parse_decimal(doc["modulus"], "modulus"))

    @classmethod
    def from_bytes(cls, data: bytes) -> VerifyingKey:
        return cls.from_doc(load_json(data))


# Reject reasons.
BAD_PATH = "bad-path"
BAD_PUBLIC_WIRE = "bad-public-wire"
BAD_QUERY_ORDER = "bad-query-order"
CONSTRAINT_VIOLATED = "constraint-violated"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.accepted


ACCEPT = Verdict(True)


def reject(reason: str, detail: str = "") -> Verdict:
    return Verdict(False, reason, detail)
