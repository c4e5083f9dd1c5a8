"""Canonical ECS encoding (``.ecs.json``) and content-derived circuit ids.

The canonical form is compact JSON with sorted keys, no insignificant
whitespace, UTF-8 text, and every field value rendered as a decimal string.
Counts and wire indices are plain JSON integers. Example (the square
circuit, ``a * a = t`` over p = 97)::

    {"constraints":[{"a":[[2,"1"]],"b":[[2,"1"]],"c":[[1,"1"]]}],
     "field":{"modulus":"97"},"format":"zkprovd/ecs/v1","name":"square",
     "num_private_inputs":1,"num_public_inputs":0,"num_public_outputs":1,
     "num_wires":3,"solver":[["mul",1,2,2]]}

(shown wrapped; the real encoding is a single line).
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Any

from .circuit import Add, AssertEq, CircuitArtifact, Const, Constraint, Inv, LinearCombination, Mul, Sub
from .errors import EncodingSyntaxError, FieldConfigError, InvariantViolation
from .field import FieldConfig

ECS_FORMAT = "zkprovd/ecs/v1"

_DECIMAL = re.compile(r"(?:0|[1-9][0-9]*)\Z")

_BINARY = {"add": Add, "sub": Sub, "mul": Mul}
_OPNAME = {Add: "add", Sub: "sub", Mul: "mul"}


def canonical_json(doc: Any) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _lc_doc(lc: LinearCombination) -> list:
    return [[w, str(c)] for w, c in lc.terms]


def _ins_doc(ins) -> list:
    t = type(ins)
    if t in _OPNAME:
        return [_OPNAME[t], ins.target, ins.src1, ins.src2]
    if t is Const:
        return ["const", ins.target, str(ins.value)]
    if t is Inv:
        return ["inv", ins.target, ins.src]
    return ["assert_eq", ins.src1, ins.src2]


def circuit_to_doc(ecs: CircuitArtifact) -> dict:
    return {
        "format": ECS_FORMAT,
        "name": ecs.name,
        "field": {"modulus": str(ecs.field.modulus)},
        "num_public_inputs": ecs.num_public_inputs,
        "num_public_outputs": ecs.num_public_outputs,
        "num_private_inputs": ecs.num_private_inputs,
        "num_wires": ecs.num_wires,
        "constraints": [{"a": _lc_doc(c.a), "b": _lc_doc(c.b), "c": _lc_doc(c.c)} for c in ecs.constraints],
        "solver": [_ins_doc(i) for i in ecs.solver],
    }


def encode_circuit(ecs: CircuitArtifact) -> bytes:
    return canonical_json(circuit_to_doc(ecs))


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise EncodingSyntaxError(f"{what}: expected integer")
    return v


def parse_decimal(v, what: str) -> int:
    if not isinstance(v, str) or not _DECIMAL.match(v):
        raise EncodingSyntaxError(f"{what}: expected decimal string, got {v!r}")
    return int(v)


def _lc_from_doc(doc, what: str) -> LinearCombination:
    if not isinstance(doc, list):
        raise EncodingSyntaxError(f"{what}: expected list of [wire, coeff] pairs")
    terms = []
    for term in doc:
        if not (isinstance(term, list) and len(term) == 2):
            raise EncodingSyntaxError(f"{what}: malformed term {term!r}")
        terms.append((_int(term[0], what), parse_decimal(term[1], what)))
    return LinearCombination(tuple(terms))


def _ins_from_doc(doc, i: int):
    what = f"solver[{i}]"
    if not (isinstance(doc, list) and doc and isinstance(doc[0], str)):
        raise EncodingSyntaxError(f"{what}: malformed instruction")
    op, args = doc[0], doc[1:]
    if op in _BINARY and len(args) == 3:
        return _BINARY[op](*(_int(a, what) for a in args))
    if op == "const" and len(args) == 2:
        return Const(_int(args[0], what), parse_decimal(args[1], what))
    if op == "inv" and len(args) == 2:
        return Inv(_int(args[0], what), _int(args[1], what))
    if op == "assert_eq" and len(args) == 2:
        return AssertEq(_int(args[0], what), _int(args[1], what))
    raise EncodingSyntaxError(f"{what}: unknown instruction {op!r}/{len(args)}")


def circuit_from_doc(doc) -> CircuitArtifact:
    if not isinstance(doc, dict):
        raise EncodingSyntaxError("ECS document must be an object")
    expected = {
        "format", "name", "field", "num_public_inputs", "num_public_outputs",
        "num_private_inputs", "num_wires", "constraints", "solver",
    }
    if set(doc) != expected:
        raise EncodingSyntaxError(f"ECS keys mismatch: missing {sorted(expected - set(doc))}, "
                                  f"unexpected {sorted(set(doc) - expected)}")
    if doc["format"] != ECS_FORMAT:
        raise EncodingSyntaxError(f"unsupported format {doc['format']!r}")
    if not isinstance(doc["name"], str):
        raise EncodingSyntaxError("name must be a string")
    fdoc = doc["field"]
    if not (isinstance(fdoc, dict) and set(fdoc) == {"modulus"}):
        raise EncodingSyntaxError("field must be {\"modulus\": <decimal>}")
    try:
        fc = FieldConfig(parse_decimal(fdoc["modulus"], "field.modulus"))
    except FieldConfigError as exc:
        raise InvariantViolation(str(exc)) from exc
    if not isinstance(doc["constraints"], list) or not isinstance(doc["solver"], list):
        raise EncodingSyntaxError("constraints and solver must be lists")
    constraints = []
    for i, c in enumerate(doc["constraints"]):
        if not (isinstance(c, dict) and set(c) == {"a", "b", "c"}):
            raise EncodingSyntaxError(f"constraints[{i}]: expected keys a, b, c")
        constraints.append(Constraint(*(_lc_from_doc(c[k], f"constraints[{i}].{k}") for k in "abc")))
    solver = [_ins_from_doc(d, i) for i, d in enumerate(doc["solver"])]
    return CircuitArtifact(
        field=fc,
        num_public_inputs=_int(doc["num_public_inputs"], "num_public_inputs"),
        num_public_outputs=_int(doc["num_public_outputs"], "num_public_outputs"),
        num_private_inputs=_int(doc["num_private_inputs"], "num_private_inputs"),
        num_wires=_int(doc["num_wires"], "num_wires"),
        constraints=tuple(constraints),
        solver=tuple(solver),
        name=doc["name"],
    )


def load_json(data: bytes | str):
    try:
        return json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise EncodingSyntaxError(f"invalid JSON: {exc}") from exc


def decode_circuit(data: bytes | str) -> CircuitArtifact:
    """Parse an ECS document. Raises EncodingSyntaxError or InvariantViolation."""
    return circuit_from_doc(load_json(data))


def circuit_id(ecs: CircuitArtifact) -> str:
    """64-hex SHA-256 of the canonical encoding."""
    return hashlib.sha256(encode_circuit(ecs)).hexdigest()


_ID = re.compile(r"[0-9a-f]{64}\Z")


def is_circuit_id(s) -> bool:
    return isinstance(s, str) and bool(_ID.match(s))
