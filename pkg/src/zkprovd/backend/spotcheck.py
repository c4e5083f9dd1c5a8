"""Reference backend: Merkle commitment to the witness plus Fiat-Shamir constraint spot checks.

The prover commits to every wire value, opens the public wires, and opens
every wire of ``k`` constraints chosen by hashing the transcript. A witness
violating a fraction ``f`` of the constraints survives with probability at
most ``(1 - f) ** k``.

This scheme proves computational integrity only. It is NOT zero-knowledge
(opened wires are revealed in the clear) and NOT succinct (proof size and
verification time grow with ``k * log(num_wires)``).
"""

from __future__ import annotations

import struct
from hashlib import sha256
from typing import Sequence

from ..circuit import CircuitArtifact, WitnessVector, check_constraints
from ..encoding import canonical_json, circuit_id
from ..errors import BadRequestError, InternalConsistencyError, ParameterError
from ..field import FieldElement
from .keys import (
    ACCEPT,
    BAD_PATH,
    BAD_PUBLIC_WIRE,
    BAD_QUERY_ORDER,
    CONSTRAINT_VIOLATED,
    ProvingKey,
    Verdict,
    VerifyingKey,
    reject,
)
from .merkle import MerkleTree, depth_for, merkle_verify_path
from .proof import Opening, Proof, QueryOpening

QUERY_TAG = b"zkprovd/v1/queries"
DEFAULT_K = 30


def _le64(n: int) -> bytes:
    return struct.pack("<Q", n)


def _ints(xs) -> list[int]:
    return [x.value if isinstance(x, FieldElement) else int(x) for x in xs]


def _enc(v: int) -> bytes:
    return v.to_bytes(32, "little")


def derive_query_indices(vk: VerifyingKey, x: Sequence, outputs: Sequence, root: bytes, m: int) -> list[int]:
    """Fiat-Shamir challenge: ``vk.k`` constraint indices in [0, m), sampled with replacement."""
    if m < 1:
        raise ParameterError("cannot derive queries for a circuit without constraints")
    x, outputs = _ints(x), _ints(outputs)
    h = sha256(QUERY_TAG)
    h.update(bytes.fromhex(vk.circuit_id))
    h.update(_le64(len(x)))
    for v in x:
        h.update(_enc(v))
    h.update(_le64(len(outputs)))
    for v in outputs:
        h.update(_enc(v))
    h.update(root)
    seed = h.digest()
    return [
        int.from_bytes(sha256(seed + _le64(j)).digest()[:8], "little") % m
        for j in range(vk.k)
    ]


class SpotCheckBackend:
    backend_id = "merkle-spotcheck"

    def setup(self, ecs: CircuitArtifact, k: int = DEFAULT_K) -> tuple[ProvingKey, VerifyingKey]:
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ParameterError(f"query count k must be >= 1, got {k!r}")
        cid = circuit_id(ecs)
        payload = canonical_json({
            "k": k,
            "num_wires": ecs.num_wires,
            "rows": [list(c.wires()) for c in ecs.constraints],
        })
        return ProvingKey(self.backend_id, cid, payload), VerifyingKey(self.backend_id, cid, k, ecs.field.modulus)

    def _vk_of(self, pk: ProvingKey, ecs: CircuitArtifact) -> VerifyingKey:
        return VerifyingKey(self.backend_id, pk.circuit_id, pk.decoded["k"], ecs.field.modulus)

    def prove(self, pk: ProvingKey, ecs: CircuitArtifact, w: WitnessVector, x, outputs) -> Proof:
        values = w.values if isinstance(w, WitnessVector) else tuple(w)
        if check_constraints(ecs, values):
            raise InternalConsistencyError("witness violates the constraint system")
        x, outputs = _ints(x), _ints(outputs)
        if len(x) != ecs.num_public_inputs or len(outputs) != ecs.num_public_outputs:
            raise InternalConsistencyError("public arity does not match the circuit")
        if list(values[1 : 1 + len(x)]) != x or [values[i] for i in ecs.output_wires] != outputs:
            raise InternalConsistencyError("witness disagrees with the claimed public values")
        return self.commit_and_open(pk, ecs, values, x, outputs)

    def commit_and_open(self, pk: ProvingKey, ecs: CircuitArtifact, values: Sequence[int], x, outputs) -> Proof:
        """Build a proof for ``values`` without checking it. ``prove`` is the safe entry point."""
        x, outputs = _ints(x), _ints(outputs)
        tree = MerkleTree([_enc(v) for v in values])
        root = tree.root

        def opening(wire: int) -> Opening:
            return Opening(wire, values[wire], tree.open(wire))

        public = tuple(opening(i) for i in ecs.public_wires)
        rows = pk.decoded["rows"]
        queries: tuple[QueryOpening, ...] = ()
        if rows:
            vk = self._vk_of(pk, ecs)
            idx = derive_query_indices(vk, x, outputs, root, len(rows))
            queries = tuple(QueryOpening(i, tuple(opening(wi) for wi in rows[i])) for i in idx)
        return Proof(root, len(values), public, queries, tuple(outputs))

    def verify(self, vk: VerifyingKey, x, outputs, proof: Proof, ecs: CircuitArtifact,
               ecs_id: str | None = None) -> Verdict:
        if (ecs_id or circuit_id(ecs)) != vk.circuit_id or vk.modulus != ecs.field.modulus:
            raise BadRequestError("verifying key does not belong to this circuit")
        p = ecs.field.modulus
        x, outputs = _ints(x), _ints(outputs)
        if len(x) != ecs.num_public_inputs or len(outputs) != ecs.num_public_outputs:
            return reject(BAD_PUBLIC_WIRE, "public arity mismatch")
        if list(proof.outputs) != outputs:
            return reject(BAD_PUBLIC_WIRE, "proof outputs differ from claimed outputs")
        if proof.num_leaves != ecs.num_wires:
            return reject(BAD_PATH, "commitment size does not match circuit")
        depth = depth_for(ecs.num_wires)

        def path_ok(o: Opening) -> bool:
            return (o.path.leaf_index == o.wire and len(o.path.siblings) == depth
                    and o.value.bit_length() <= 256
                    and merkle_verify_path(proof.root, _enc(o.value), o.path))

        # (1) public openings
        expected = [1] + x + outputs
        if [o.wire for o in proof.public_openings] != list(ecs.public_wires):
            return reject(BAD_PUBLIC_WIRE, "public openings do not cover the public wires")
        public_values = {}
        for o, want in zip(proof.public_openings, expected):
            if not path_ok(o):
                return reject(BAD_PATH, f"public wire {o.wire}")
            if o.value != want:
                return reject(BAD_PUBLIC_WIRE, f"wire {o.wire} opened to {o.value}, claimed {want}")
            public_values[o.wire] = o.value

        m = len(ecs.constraints)
        if m == 0:
            return ACCEPT if not proof.query_openings else reject(BAD_QUERY_ORDER, "queries on empty system")

        # (2) challenge order
        idx = derive_query_indices(vk, x, outputs, proof.root, m)
        if [q.constraint for q in proof.query_openings] != idx:
            return reject(BAD_QUERY_ORDER)

        # (3) query paths, (4) constraint checks
        for q in proof.query_openings:
            con = ecs.constraints[q.constraint]
            if [o.wire for o in q.openings] != list(con.wires()):
                return reject(CONSTRAINT_VIOLATED, f"constraint {q.constraint}: wrong wire set opened")
            for o in q.openings:
                if not path_ok(o):
                    return reject(BAD_PATH, f"constraint {q.constraint}, wire {o.wire}")
                if o.wire in public_values and public_values[o.wire] != o.value:
                    return reject(BAD_PUBLIC_WIRE, f"wire {o.wire} opened inconsistently")
        for q in proof.query_openings:
            con = ecs.constraints[q.constraint]
            vals = {o.wire: o.value for o in q.openings}
            if any(v >= p for v in vals.values()):
                return reject(CONSTRAINT_VIOLATED, f"constraint {q.constraint}: non-canonical value")
            a = sum(c * vals[w] for w, c in con.a.terms) % p
            b = sum(c * vals[w] for w, c in con.b.terms) % p
            c = sum(cf * vals[w] for w, cf in con.c.terms) % p
            if a * b % p != c:
                return reject(CONSTRAINT_VIOLATED, f"constraint {q.constraint}")
        return ACCEPT
