"""Synthetic workload: a squaring chain with exactly ``steps`` constraints.

Stands in for a signature-verification circuit; the only property the
scaling experiments rely on is linear control over the constraint count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..circuit import CircuitArtifact
from ..circuits import squaring_chain
from ..field import FieldConfig


@dataclass(frozen=True)
class WorkloadSpec:
    steps: int
    field: FieldConfig = field(default_factory=FieldConfig)
    seed_input: int = 2

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("workload needs at least one step")
        if not self.field.is_canonical(self.seed_input):
            raise ValueError("seed_input is not a field element")

    @classmethod
    def from_doc(cls, doc: dict) -> WorkloadSpec:
        fc = FieldConfig(int(doc["modulus"])) if "modulus" in doc else FieldConfig()
        return cls(int(doc["steps"]), fc, int(doc.get("seed_input", 2)))

    def to_doc(self) -> dict:
        return {"steps": self.steps, "modulus": str(self.field.modulus), "seed_input": str(self.seed_input)}


def generate_workload(spec: WorkloadSpec) -> tuple[CircuitArtifact, dict]:
    """The circuit plus an input document in the consumer schema."""
    ecs = squaring_chain(spec.steps, spec.field)
    return ecs, {"public": [str(spec.seed_input)], "private": []}

