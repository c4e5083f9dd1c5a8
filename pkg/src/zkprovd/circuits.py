"""Fixture circuits, the squaring-chain workload, and randomized small-circuit generators.

Circuits are assembled with :class:`CircuitBuilder`, which emits a solver
instruction together with the R1CS constraint that pins its target wire, so a
generated circuit is consistent by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .circuit import Add, AssertEq, CircuitArtifact, Const, Constraint, Inv, LinearCombination, Mul, Sub, solve_witness
from .errors import FieldDivisionByZero
from .field import FieldConfig

ONE = 0


class CircuitBuilder:
    def __init__(self, fc: FieldConfig, public_inputs: int = 0, public_outputs: int = 0,
                 private_inputs: int = 0, name: str = ""):
        self.fc = fc
        self.name = name
        self.n_pub, self.n_out, self.n_priv = public_inputs, public_outputs, private_inputs
        self.num_wires = 1 + public_inputs + public_outputs + private_inputs
        self.constraints: list[Constraint] = []
        self.solver: list = []

    def public(self, i: int) -> int:
        assert 0 <= i < self.n_pub
        return 1 + i

    def output(self, i: int) -> int:
        assert 0 <= i < self.n_out
        return 1 + self.n_pub + i

    def private(self, i: int) -> int:
        assert 0 <= i < self.n_priv
        return 1 + self.n_pub + self.n_out + i

    def fresh(self) -> int:
        self.num_wires += 1
        return self.num_wires - 1

    def lc(self, terms) -> LinearCombination:
        return LinearCombination.of(terms, self.fc)

    def constrain(self, a, b, c) -> None:
        """Append ``<a,w> * <b,w> = <c,w>``; each side is a list of (wire, coeff) pairs."""
        self.constraints.append(Constraint(self.lc(a), self.lc(b), self.lc(c)))

    def _target(self, target):
        return self.fresh() if target is None else target

    def mul(self, x: int, y: int, target: int | None = None, constrain: bool = True) -> int:
        t = self._target(target)
        self.solver.append(Mul(t, x, y))
        if constrain:
            self.constrain([(x, 1)], [(y, 1)], [(t, 1)])
        return t

    def add(self, x: int, y: int, target: int | None = None, constrain: bool = True) -> int:
        t = self._target(target)
        self.solver.append(Add(t, x, y))
        if constrain:
            self.constrain([(x, 1), (y, 1)], [(ONE, 1)], [(t, 1)])
        return t

    def sub(self, x: int, y: int, target: int | None = None, constrain: bool = True) -> int:
        t = self._target(target)
        self.solver.append(Sub(t, x, y))
        if constrain:
            self.constrain([(x, 1), (y, -1)], [(ONE, 1)], [(t, 1)])
        return t

    def const(self, value: int, target: int | None = None, constrain: bool = True) -> int:
        t = self._target(target)
        self.solver.append(Const(t, value % self.fc.modulus))
        if constrain:
            self.constrain([(ONE, value)], [(ONE, 1)], [(t, 1)])
        return t

    def inv(self, x: int, target: int | None = None, constrain: bool = True) -> int:
        t = self._target(target)
        self.solver.append(Inv(t, x))
        if constrain:
            self.constrain([(x, 1)], [(t, 1)], [(ONE, 1)])
        return t

    def assert_eq(self, x: int, y: int, constrain: bool = True) -> None:
        self.solver.append(AssertEq(x, y))
        if constrain:
            self.constrain([(x, 1), (y, -1)], [(ONE, 1)], [])

    def build(self) -> CircuitArtifact:
        return CircuitArtifact(
            field=self.fc,
            num_public_inputs=self.n_pub,
            num_public_outputs=self.n_out,
            num_private_inputs=self.n_priv,
            num_wires=self.num_wires,
            constraints=tuple(self.constraints),
            solver=tuple(self.solver),
            name=self.name,
        )


def square_circuit(fc: FieldConfig | None = None) -> CircuitArtifact:
    """Public output t, private input a, t = a * a. Wires: [1, t, a]."""
    b = CircuitBuilder(fc or FieldConfig(97), public_outputs=1, private_inputs=1, name="square")
    b.mul(b.private(0), b.private(0), target=b.output(0))
    return b.build()


def sqrt_circuit(fc: FieldConfig | None = None) -> CircuitArtifact:
    """Public input x, private input a, asserts a * a == x. Wires: [1, x, a, a*a]."""
    b = CircuitBuilder(fc or FieldConfig(97), public_inputs=1, private_inputs=1, name="sqrt")
    sq = b.mul(b.private(0), b.private(0))
    b.assert_eq(sq, b.public(0))
    return b.build()


def squaring_chain(steps: int, fc: FieldConfig | None = None) -> CircuitArtifact:
    """s_{i+1} = s_i^2 + s_i with one constraint per step: s_i * (s_i + 1) = s_{i+1}.

    Public input s_0, public output s_n; intermediates live on internal wires.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    b = CircuitBuilder(fc or FieldConfig(), public_inputs=1, public_outputs=1, name=f"squaring-chain-{steps}")
    s = b.public(0)
    for i in range(steps):
        nxt = b.output(0) if i == steps - 1 else b.fresh()
        plus_one = b.add(s, ONE, constrain=False)
        b.mul(s, plus_one, target=nxt, constrain=False)
        b.constrain([(s, 1)], [(s, 1), (ONE, 1)], [(nxt, 1)])
        s = nxt
    return b.build()


def violating_circuit(m: int, violated: int, fc: FieldConfig | None = None) -> tuple[CircuitArtifact, list[int]]:
    """An m-constraint circuit u_i * u_i = v_i plus an unconstrained salt wire,
    together with a witness that violates exactly ``violated`` constraints.

    The salt is private input 0 so a cheating prover can re-randomize its
    commitment between attempts. Used for soundness experiments.
    """
    fc = fc or FieldConfig()
    b = CircuitBuilder(fc, private_inputs=1 + m, name=f"violating-{m}-{violated}")
    for i in range(m):
        b.mul(b.private(1 + i), b.private(1 + i))
    ecs = b.build()
    rng = random.Random(m * 1000 + violated)
    us = [rng.randrange(1, fc.modulus) for _ in range(m)]
    w = [1, 0] + us + [u * u % fc.modulus for u in us]
    for i in rng.sample(range(m), violated):
        w[2 + m + i] = (w[2 + m + i] + 1) % fc.modulus
    return ecs, w


@dataclass(frozen=True)
class Instance:
    ecs: CircuitArtifact
    x: list[int]
    x_prime: list[int]


def random_circuit(rng: random.Random, fc: FieldConfig, max_inputs: int = 2, max_private: int = 2,
                   max_outputs: int = 2, max_ops: int = 6, assert_prob: float = 0.2) -> CircuitArtifact:
    """Random straight-line program over all instruction kinds, asserts included."""
    n_pub = rng.randint(0, max_inputs)
    n_priv = rng.randint(0, max_private)
    n_out = rng.randint(0, max_outputs)
    b = CircuitBuilder(fc, n_pub, n_out, n_priv, name="random")
    avail = [ONE] + [b.public(i) for i in range(n_pub)] + [b.private(i) for i in range(n_priv)]
    for _ in range(rng.randint(0, max_ops)):
        _random_op(rng, b, avail, assert_prob)
    for i in range(n_out):
        op = rng.choice(("add", "mul", "sub"))
        getattr(b, op)(rng.choice(avail), rng.choice(avail), target=b.output(i))
        avail.append(b.output(i))
    return b.build()


def _random_op(rng, b: CircuitBuilder, avail: list[int], assert_prob: float) -> None:
    if rng.random() < assert_prob:
        b.assert_eq(rng.choice(avail), rng.choice(avail))
        return
    op = rng.choice(("add", "sub", "mul", "mul", "const", "inv"))
    if op == "const":
        t = b.const(rng.randrange(b.fc.modulus))
    elif op == "inv":
        t = b.inv(rng.choice(avail))
    else:
        t = getattr(b, op)(rng.choice(avail), rng.choice(avail))
    avail.append(t)


def random_satisfiable_instance(rng: random.Random, fc: FieldConfig, max_free: int = 2, max_claims: int = 2,
                                max_private: int = 3, max_ops: int = 8) -> Instance:
    """Random circuit plus inputs on which the solver succeeds.

    Public inputs split into free inputs (used by the program) and claims
    (each only ever compared once by an assertion against a derived value, as
    in ``sqrt_circuit``). Claims are filled in from a dry run.
    """
    while True:
        n_free = rng.randint(0, max_free)
        n_claim = rng.randint(0, max_claims)
        n_priv = rng.randint(0, max_private)
        n_out = rng.randint(0, 2)
        b = CircuitBuilder(fc, n_free + n_claim, n_out, n_priv, name="random-sat")
        avail = [ONE] + [b.public(i) for i in range(n_free)] + [b.private(i) for i in range(n_priv)]
        for _ in range(rng.randint(0, max_ops)):
            _random_op(rng, b, avail, assert_prob=0.0)
        for i in range(n_out):
            op = rng.choice(("add", "mul", "sub"))
            getattr(b, op)(rng.choice(avail), rng.choice(avail), target=b.output(i))
        for j in range(n_claim):
            b.assert_eq(rng.choice(avail), b.public(n_free + j))
        ecs = b.build()

        x = [rng.randrange(fc.modulus) for _ in range(n_free)] + [0] * n_claim
        xp = [rng.randrange(fc.modulus) for _ in range(n_priv)]
        dry = _run_ignoring_asserts(ecs, x, xp)
        if dry is None:
            continue
        for k, ins in enumerate(i for i in ecs.solver if isinstance(i, AssertEq)):
            x[n_free + k] = dry[ins.src1]
        try:
            solve_witness(ecs, x, xp)
        except FieldDivisionByZero:
            continue
        return Instance(ecs, x, xp)


def _run_ignoring_asserts(ecs: CircuitArtifact, x, xp):
    stripped = CircuitArtifact(
        field=ecs.field,
        num_public_inputs=ecs.num_public_inputs,
        num_public_outputs=ecs.num_public_outputs,
        num_private_inputs=ecs.num_private_inputs,
        num_wires=ecs.num_wires,
        constraints=(),
        solver=tuple(i for i in ecs.solver if not isinstance(i, AssertEq)),
    )
    try:
        w, _ = solve_witness(stripped, x, xp)
    except FieldDivisionByZero:
        return None
    return w.values
