import random

import pytest
from hypothesis import given, settings, strategies as st

from zkprovd.circuit import (
    CircuitArtifact,
    Constraint,
    LinearCombination,
    Mul,
    WitnessVector,
    check_constraints,
    evaluate_linear_combination,
    solve_witness,
)
from zkprovd.circuits import random_circuit, random_satisfiable_instance, squaring_chain
from zkprovd.errors import (
    BadRequestError,
    FieldDivisionByZero,
    MalformedCircuitError,
    MalformedWitnessError,
    UnsatisfiableInputError,
)
from zkprovd.field import FieldConfig

F97 = FieldConfig(97)


def chain_oracle(s0, steps, p):
    s = s0
    for _ in range(steps):
        s = (s * s + s) % p
    return s


def test_lc_examples():
    w = WitnessVector((1, 4, 2), F97)
    assert evaluate_linear_combination(LinearCombination(((0, 1), (2, 3))), w).value == 7
    assert evaluate_linear_combination(LinearCombination(), w).value == 0
    assert evaluate_linear_combination(LinearCombination(((1, 96),)), WitnessVector((1, 5, 0), F97)).value == 92


def test_lc_out_of_range():
    with pytest.raises(MalformedCircuitError):
        evaluate_linear_combination(LinearCombination(((3, 1),)), WitnessVector((1, 2, 3), F97))


def test_lc_canonicalizes():
    lc = LinearCombination.of({3: 5, 1: -1, 2: 97}, F97)
    assert lc.terms == ((1, 96), (3, 5))


def test_check_constraints_square(square):
    assert check_constraints(square, WitnessVector((1, 9, 3), F97)) == []
    assert check_constraints(square, WitnessVector((1, 9, 4), F97)) == [0]


def test_check_constraints_empty_system():
    ecs = CircuitArtifact(F97, 0, 0, 1, 2, (), ())
    assert check_constraints(ecs, [1, 5]) == []


def test_check_constraints_length_mismatch(square):
    with pytest.raises(MalformedWitnessError):
        check_constraints(square, [1, 9])


def test_check_constraints_reports_all_violations():
    lc = lambda d: LinearCombination.of(d, F97)  # noqa: E731
    cons = [Constraint(lc({1: 1}), lc({0: 1}), lc({0: 1})) for _ in range(5)]
    ecs = CircuitArtifact(F97, 0, 0, 1, 2, cons, ())
    assert check_constraints(ecs, [1, 2]) == [0, 1, 2, 3, 4]
    assert check_constraints(ecs, [1, 1]) == []


def test_solve_square(square):
    w, out = solve_witness(square, [], [3])
    assert w.values == (1, 9, 3)
    assert [o.value for o in out] == [9]


def test_solve_sqrt_unsatisfiable(sqrt):
    with pytest.raises(UnsatisfiableInputError) as info:
        solve_witness(sqrt, [9], [5])
    assert info.value.instruction_index == 1


def test_solve_arity(sqrt):
    with pytest.raises(BadRequestError):
        solve_witness(sqrt, [9], [])
    with pytest.raises(BadRequestError):
        solve_witness(sqrt, [97], [3])


def test_solve_inverse_of_zero(f97):
    from zkprovd.circuits import CircuitBuilder

    b = CircuitBuilder(f97, private_inputs=1)
    b.inv(b.private(0))
    with pytest.raises(FieldDivisionByZero):
        solve_witness(b.build(), [], [0])


def test_squaring_chain_example(f97):
    ecs = squaring_chain(3, f97)
    _, out = solve_witness(ecs, [2], [])
    assert [o.value for o in out] == [chain_oracle(2, 3, 97)] == [60]


def test_squaring_chain_zero():
    _, out = solve_witness(squaring_chain(1), [0], [])
    assert [o.value for o in out] == [0]


@pytest.mark.parametrize("n", [1, 2, 17, 500])
def test_squaring_chain_shape(n):
    ecs = squaring_chain(n)
    assert len(ecs.constraints) == n
    w, out = solve_witness(ecs, [5], [])
    assert out[0].value == chain_oracle(5, n, ecs.field.modulus)
    assert check_constraints(ecs, w) == []


def test_rejects_double_assignment(f97):
    with pytest.raises(MalformedCircuitError):
        CircuitArtifact(f97, 0, 1, 1, 3, (), (Mul(1, 2, 2), Mul(1, 2, 2)))


def test_rejects_input_as_target(f97):
    with pytest.raises(MalformedCircuitError):
        CircuitArtifact(f97, 1, 0, 0, 2, (), (Mul(1, 0, 0),))


def test_rejects_read_before_write(f97):
    with pytest.raises(MalformedCircuitError):
        CircuitArtifact(f97, 0, 0, 0, 3, (), (Mul(1, 2, 2), Mul(2, 0, 0)))


def test_rejects_unassigned_wire(f97):
    with pytest.raises(MalformedCircuitError):
        CircuitArtifact(f97, 0, 1, 1, 3, (), ())


def test_rejects_out_of_range_wire(f97):
    lc = LinearCombination(((5, 1),))
    with pytest.raises(MalformedCircuitError):
        CircuitArtifact(f97, 0, 0, 0, 1, (Constraint(lc, lc, lc),), ())


def test_degenerate_circuit():
    ecs = CircuitArtifact(F97, 0, 0, 0, 1, (), ())
    w, out = solve_witness(ecs, [], [])
    assert w.values == (1,) and out == []


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([7, 97, FieldConfig().modulus]))
def test_solver_soundness(seed, p):
    rng = random.Random(seed)
    fc = FieldConfig(p)
    ecs = random_circuit(rng, fc, max_ops=10)
    x = [rng.randrange(p) for _ in range(ecs.num_public_inputs)]
    xp = [rng.randrange(p) for _ in range(ecs.num_private_inputs)]
    try:
        w, out = solve_witness(ecs, x, xp)
    except (UnsatisfiableInputError, FieldDivisionByZero):
        return
    assert check_constraints(ecs, w) == []
    assert w.values[0] == 1 and list(w.values[1 : 1 + len(x)]) == x
    assert solve_witness(ecs, x, xp)[0] == w


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_satisfiable_generator(seed):
    inst = random_satisfiable_instance(random.Random(seed), FieldConfig())
    w, _ = solve_witness(inst.ecs, inst.x, inst.x_prime)
    assert check_constraints(inst.ecs, w) == []


def _oracle_agreement(ecs):
    """Compare the solver with brute-force enumeration for every (x, x') over the field."""
    import itertools

    from oracles import enumerate_satisfying
    from zkprovd.errors import FieldDivisionByZero, UnsatisfiableInputError

    p = ecs.field.modulus
    priv = list(ecs.private_wires)
    for x in itertools.product(range(p), repeat=ecs.num_public_inputs):
        sat = {}
        for row in enumerate_satisfying(ecs, list(x)):
            sat.setdefault(tuple(row[i] for i in priv), []).append(row)
        for xp in itertools.product(range(p), repeat=ecs.num_private_inputs):
            try:
                w, _ = solve_witness(ecs, list(x), list(xp))
            except (UnsatisfiableInputError, FieldDivisionByZero):
                assert xp not in sat, (x, xp)
                continue
            assert sat.get(xp) == [w.values], (x, xp)


def test_solver_matches_exhaustive_enumeration():
    from zkprovd.circuits import random_circuit
    fc = FieldConfig(7)
    for seed in range(300):
        _oracle_agreement(random_circuit(random.Random(seed), fc, max_inputs=1, max_private=2, max_outputs=1,
                                         max_ops=4))
    for seed in range(60):
        inst = random_satisfiable_instance(random.Random(seed), fc, max_free=1, max_claims=1, max_private=2,
                                           max_ops=2)
        _oracle_agreement(inst.ecs)
