"""Regenerate the checked-in fixture files under docs/fixtures/.

    python scripts/make_fixtures.py
"""

from pathlib import Path

from zkprovd import backend
from zkprovd.circuit import solve_witness
from zkprovd.circuits import sqrt_circuit, square_circuit
from zkprovd.encoding import circuit_id, encode_circuit

OUT = Path(__file__).resolve().parents[1] / "docs" / "fixtures"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for ecs, x, xp in ((square_circuit(), [], [3]), (sqrt_circuit(), [9], [3])):
        (OUT / f"{ecs.name}.ecs.json").write_bytes(encode_circuit(ecs))
        pk, vk = backend.setup(ecs, 30)
        w, outputs = solve_witness(ecs, x, xp)
        proof = backend.prove(pk, ecs, w, x, outputs)
        (OUT / f"{ecs.name}.proof.json").write_bytes(proof.to_bytes())
        (OUT / f"{ecs.name}.vk.json").write_bytes(vk.to_bytes())
        print(ecs.name, circuit_id(ecs))
    (OUT / "sqrt.input.json").write_text('{"public": ["9"], "private": ["3"]}\n')


if __name__ == "__main__":
    main()
