"""R1CS constraint systems and the straight-line witness solver.

Wire layout is fixed for every circuit::

    0                      constant one
    1 .. P                 public inputs
    P+1 .. P+O             public outputs
    P+O+1 .. P+O+S         private inputs
    P+O+S+1 .. num_wires-1 internal wires

Field values inside circuits and witnesses are plain ints holding the
canonical representative; :class:`~zkprovd.field.FieldElement` is used at the
API boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    BadRequestError,
    FieldDivisionByZero,
    MalformedCircuitError,
    MalformedWitnessError,
    UnsatisfiableInputError,
)
from .field import FieldConfig, FieldElement


@dataclass(frozen=True)
class LinearCombination:
    """Sparse sum of ``coeff * wire``; terms sorted by wire, no zero coefficients."""

    terms: tuple[tuple[int, int], ...] = ()

    @classmethod
    def of(cls, terms: Mapping[int, int] | Iterable[tuple[int, int]], fc: FieldConfig) -> LinearCombination:
        """Canonicalize ``(wire, coeff)`` terms; repeated wires are summed."""
        p = fc.modulus
        acc: dict[int, int] = {}
        pairs = terms.items() if isinstance(terms, Mapping) else terms
        for wire, coeff in pairs:
            acc[wire] = (acc.get(wire, 0) + coeff) % p
        return cls(tuple(sorted((w, c) for w, c in acc.items() if c)))

    def wires(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.terms)

    def evaluate(self, values: Sequence[int], p: int) -> int:
        return sum(c * values[w] for w, c in self.terms) % p

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class Constraint:
    a: LinearCombination
    b: LinearCombination
    c: LinearCombination

    def wires(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.a.wires()) | set(self.b.wires()) | set(self.c.wires())))


# Solver instructions. ``target`` wires are written once; sources must already hold values.


@dataclass(frozen=True)
class Const:
    target: int
    value: int


@dataclass(frozen=True)
class Add:
    target: int
    src1: int
    src2: int


@dataclass(frozen=True)
class Sub:
    target: int
    src1: int
    src2: int


@dataclass(frozen=True)
class Mul:
    target: int
    src1: int
    src2: int


@dataclass(frozen=True)
class Inv:
    target: int
    src: int


@dataclass(frozen=True)
class AssertEq:
    src1: int
    src2: int


Instruction = Union[Const, Add, Sub, Mul, Inv, AssertEq]


def _sources(ins: Instruction) -> tuple[int, ...]:
    if isinstance(ins, Const):
        return ()
    if isinstance(ins, Inv):
        return (ins.src,)
    return (ins.src1, ins.src2)


@dataclass(frozen=True)
class CircuitArtifact:
    """An executable constraint system: constraints plus the program that solves them."""

    field: FieldConfig
    num_public_inputs: int
    num_public_outputs: int
    num_private_inputs: int
    num_wires: int
    constraints: tuple[Constraint, ...]
    solver: tuple[Instruction, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "solver", tuple(self.solver))
        self._validate()

    @property
    def num_inputs(self) -> int:
        """Wires bound before the solver runs (constant one included)."""
        return 1 + self.num_public_inputs + self.num_private_inputs

    @property
    def output_wires(self) -> range:
        start = 1 + self.num_public_inputs
        return range(start, start + self.num_public_outputs)

    @property
    def private_wires(self) -> range:
        start = 1 + self.num_public_inputs + self.num_public_outputs
        return range(start, start + self.num_private_inputs)

    @property
    def public_wires(self) -> range:
        """Constant one, public inputs and public outputs."""
        return range(0, 1 + self.num_public_inputs + self.num_public_outputs)

    def _validate(self) -> None:
        for name in ("num_public_inputs", "num_public_outputs", "num_private_inputs", "num_wires"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise MalformedCircuitError(f"{name} must be a non-negative integer")
        n = self.num_wires
        if n < 1 + self.num_public_inputs + self.num_public_outputs + self.num_private_inputs:
            raise MalformedCircuitError("num_wires smaller than the fixed wire layout")
        if not isinstance(self.name, str):
            raise MalformedCircuitError("name must be a string")
        p = self.field.modulus

        for i, con in enumerate(self.constraints):
            for lc in (con.a, con.b, con.c):
                prev = -1
                for w, c in lc.terms:
                    if not (isinstance(w, int) and 0 <= w < n):
                        raise MalformedCircuitError(f"constraint {i}: wire {w} out of range")
                    if w <= prev:
                        raise MalformedCircuitError(f"constraint {i}: wires not strictly increasing")
                    if not (isinstance(c, int) and 0 < c < p):
                        raise MalformedCircuitError(f"constraint {i}: coefficient {c} not canonical non-zero")
                    prev = w

        assigned = bytearray(n)
        assigned[0] = 1
        for w in range(1, 1 + self.num_public_inputs):
            assigned[w] = 1
        for w in self.private_wires:
            assigned[w] = 1
        for i, ins in enumerate(self.solver):
            for s in _sources(ins):
                if not (isinstance(s, int) and 0 <= s < n):
                    raise MalformedCircuitError(f"instruction {i}: wire {s} out of range")
                if not assigned[s]:
                    raise MalformedCircuitError(f"instruction {i}: wire {s} read before assignment")
            if isinstance(ins, AssertEq):
                continue
            t = ins.target
            if not (isinstance(t, int) and 0 <= t < n):
                raise MalformedCircuitError(f"instruction {i}: target {t} out of range")
            if assigned[t]:
                raise MalformedCircuitError(f"instruction {i}: wire {t} assigned twice or is an input")
            if isinstance(ins, Const) and not (isinstance(ins.value, int) and 0 <= ins.value < p):
                raise MalformedCircuitError(f"instruction {i}: constant not canonical")
            assigned[t] = 1
        if not all(assigned):
            missing = assigned.index(0)
            raise MalformedCircuitError(f"solver never assigns wire {missing}")


@dataclass(frozen=True)
class WitnessVector:
    values: tuple[int, ...]
    field: FieldConfig = field(default_factory=FieldConfig)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def elements(self) -> list[FieldElement]:
        return [FieldElement(v, self.field) for v in self.values]


def evaluate_linear_combination(lc: LinearCombination, w: WitnessVector) -> FieldElement:
    n = len(w.values)
    for wire, _ in lc.terms:
        if not 0 <= wire < n:
            raise MalformedCircuitError(f"wire {wire} outside witness of length {n}")
    return FieldElement(lc.evaluate(w.values, w.field.modulus), w.field)


def check_constraints(ecs: CircuitArtifact, w: WitnessVector | Sequence[int]) -> list[int]:
    """Indices of violated constraints, ascending."""
    values = w.values if isinstance(w, WitnessVector) else tuple(w)
    if len(values) != ecs.num_wires:
        raise MalformedWitnessError(f"witness has {len(values)} values, circuit has {ecs.num_wires} wires")
    p = ecs.field.modulus
    bad = []
    for i, con in enumerate(ecs.constraints):
        if con.a.evaluate(values, p) * con.b.evaluate(values, p) % p != con.c.evaluate(values, p):
            bad.append(i)
    return bad


def _as_ints(xs: Iterable[FieldElement | int], fc: FieldConfig, what: str) -> list[int]:
    out = []
    for x in xs:
        if isinstance(x, FieldElement):
            if x.field != fc:
                raise BadRequestError(f"{what}: element from a different field")
            out.append(x.value)
        elif isinstance(x, int) and not isinstance(x, bool):
            if not fc.is_canonical(x):
                raise BadRequestError(f"{what}: {x} is not a field element")
            out.append(x)
        else:
            raise BadRequestError(f"{what}: expected field element, got {type(x).__name__}")
    return out


def solve_witness(
    ecs: CircuitArtifact,
    x: Sequence[FieldElement | int],
    x_prime: Sequence[FieldElement | int],
) -> tuple[WitnessVector, list[FieldElement]]:
    """Run the solver program. Returns the witness and the public output values."""
    fc = ecs.field
    if len(x) != ecs.num_public_inputs:
        raise BadRequestError(f"expected {ecs.num_public_inputs} public inputs, got {len(x)}")
    if len(x_prime) != ecs.num_private_inputs:
        raise BadRequestError(f"expected {ecs.num_private_inputs} private inputs, got {len(x_prime)}")
    pub = _as_ints(x, fc, "public input")
    priv = _as_ints(x_prime, fc, "private input")

    p = fc.modulus
    w: list = [None] * ecs.num_wires
    w[0] = 1
    w[1 : 1 + len(pub)] = pub
    start = ecs.private_wires.start
    w[start : start + len(priv)] = priv

    for i, ins in enumerate(ecs.solver):
        t = type(ins)
        if t is Mul:
            w[ins.target] = w[ins.src1] * w[ins.src2] % p
        elif t is Add:
            w[ins.target] = (w[ins.src1] + w[ins.src2]) % p
        elif t is Sub:
            w[ins.target] = (w[ins.src1] - w[ins.src2]) % p
        elif t is Const:
            w[ins.target] = ins.value
        elif t is Inv:
            v = w[ins.src]
            if v == 0:
                raise FieldDivisionByZero(f"inverse of zero at instruction {i}")
            w[ins.target] = pow(v, -1, p)
        elif t is AssertEq:
            if w[ins.src1] != w[ins.src2]:
                raise UnsatisfiableInputError(
                    i, f"instruction {i}: wire {ins.src1} = {w[ins.src1]} != wire {ins.src2} = {w[ins.src2]}"
                )
        else:  # pragma: no cover - the type is closed
            raise MalformedCircuitError(f"unknown instruction {ins!r}")

    witness = WitnessVector(tuple(w), fc)
    outputs = [FieldElement(w[i], fc) for i in ecs.output_wires]
    return witness, outputs
