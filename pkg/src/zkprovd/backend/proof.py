"""Proof objects of the spot-check backend and their JSON wire encoding.

Byte fields (root, path siblings) are lowercase hex; field values are decimal
strings. A fixture proof lives in ``docs/fixtures/square.proof.json``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..encoding import canonical_json, load_json, parse_decimal
from ..errors import EncodingSyntaxError
from .merkle import MerklePath

_HEX32 = re.compile(r"[0-9a-f]{64}\Z")


@dataclass(frozen=True)
class Opening:
    wire: int
    value: int
    path: MerklePath


@dataclass(frozen=True)
class QueryOpening:
    constraint: int
    openings: tuple[Opening, ...]


@dataclass(frozen=True)
class Proof:
    root: bytes
    num_leaves: int
    public_openings: tuple[Opening, ...]
    query_openings: tuple[QueryOpening, ...]
    outputs: tuple[int, ...]

    def to_doc(self) -> dict:
        return {
            "root": self.root.hex(),
            "num_leaves": self.num_leaves,
            "public_openings": [_opening_doc(o) for o in self.public_openings],
            "query_openings": [
                {"constraint": q.constraint, "openings": [_opening_doc(o) for o in q.openings]}
                for q in self.query_openings
            ],
            "outputs": [str(v) for v in self.outputs],
        }

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_doc())

    @classmethod
    def from_doc(cls, doc) -> Proof:
        keys = {"root", "num_leaves", "public_openings", "query_openings", "outputs"}
        if not (isinstance(doc, dict) and set(doc) == keys):
            raise EncodingSyntaxError("proof must be an object with keys " + ", ".join(sorted(keys)))
        pubs = _list(doc["public_openings"], "public_openings")
        queries = []
        for q in _list(doc["query_openings"], "query_openings"):
            if not (isinstance(q, dict) and set(q) == {"constraint", "openings"}):
                raise EncodingSyntaxError("malformed query opening")
            queries.append(QueryOpening(
                _nat(q["constraint"], "constraint"),
                tuple(_opening(o) for o in _list(q["openings"], "openings")),
            ))
        return cls(
            root=_hex32(doc["root"], "root"),
            num_leaves=_nat(doc["num_leaves"], "num_leaves"),
            public_openings=tuple(_opening(o) for o in pubs),
            query_openings=tuple(queries),
            outputs=tuple(_value(v, "outputs") for v in _list(doc["outputs"], "outputs")),
        )

    @classmethod
    def from_bytes(cls, data: bytes | str) -> Proof:
        return cls.from_doc(load_json(data))


def _opening_doc(o: Opening) -> dict:
    return {
        "wire": o.wire,
        "value": str(o.value),
        "path": {"leaf_index": o.path.leaf_index, "siblings": [s.hex() for s in o.path.siblings]},
    }


def _list(v, what):
    if not isinstance(v, list):
        raise EncodingSyntaxError(f"{what}: expected list")
    return v


def _nat(v, what) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise EncodingSyntaxError(f"{what}: expected non-negative integer")
    return v


def _hex32(v, what) -> bytes:
    if not isinstance(v, str) or not _HEX32.match(v):
        raise EncodingSyntaxError(f"{what}: expected 64 lowercase hex characters")
    return bytes.fromhex(v)


def _value(v, what) -> int:
    n = parse_decimal(v, what)
    if n.bit_length() > 256:
        raise EncodingSyntaxError(f"{what}: value wider than 256 bits")
    return n


def _opening(doc) -> Opening:
    if not (isinstance(doc, dict) and set(doc) == {"wire", "value", "path"}):
        raise EncodingSyntaxError("malformed opening")
    path = doc["path"]
    if not (isinstance(path, dict) and set(path) == {"leaf_index", "siblings"}):
        raise EncodingSyntaxError("malformed merkle path")
    return Opening(
        wire=_nat(doc["wire"], "wire"),
        value=_value(doc["value"], "value"),
        path=MerklePath(_nat(path["leaf_index"], "leaf_index"),
                        tuple(_hex32(s, "sibling") for s in _list(path["siblings"], "siblings"))),
    )
