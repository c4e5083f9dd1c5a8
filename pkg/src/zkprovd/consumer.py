"""Consumer service client: turns external data into a proof request, then
forwards the proof to the verifier.

Input file schema (JSON)::

    {"public": ["9"], "private": ["3"]}

Exit codes of ``consumer run``:

    0  proof accepted by the verifier
    1  proof rejected by the verifier
    2  unreadable or malformed input file
    3  prover rejected the inputs as unsatisfiable (HTTP 422)
    4  prover returned another error (400/404/503/5xx)
    5  prover unreachable
    6  verifier returned an error
    7  verifier unreachable
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import httpx

EXIT_ACCEPTED = 0
EXIT_REJECTED = 1
EXIT_BAD_INPUT = 2
EXIT_UNSATISFIABLE = 3
EXIT_PROVER_ERROR = 4
EXIT_PROVER_UNREACHABLE = 5
EXIT_VERIFIER_ERROR = 6
EXIT_VERIFIER_UNREACHABLE = 7


class ConsumerError(Exception):
    def __init__(self, exit_code: int, message: str, status: int | None = None, body=None):
        super().__init__(message)
        self.exit_code = exit_code
        self.status = status
        self.body = body


def load_input(path) -> tuple[list[str], list[str]]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConsumerError(EXIT_BAD_INPUT, f"cannot read input {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConsumerError(EXIT_BAD_INPUT, "input must be an object with 'public' and 'private' arrays")
    pub, priv = doc.get("public", []), doc.get("private", [])
    for name, xs in (("public", pub), ("private", priv)):
        if not isinstance(xs, list) or not all(isinstance(v, str) for v in xs):
            raise ConsumerError(EXIT_BAD_INPUT, f"'{name}' must be an array of decimal strings")
    return pub, priv


def _body(r: httpx.Response):
    try:
        return r.json()
    except ValueError:
        return r.text


def request_proof(client: httpx.Client, prover_url: str, circuit_id: str, public, private) -> dict:
    try:
        r = client.post(f"{prover_url.rstrip('/')}/v1/proofs", json={
            "circuit_id": circuit_id, "public_inputs": public, "private_inputs": private, "mode": "sync"})
    except httpx.TransportError as exc:
        raise ConsumerError(EXIT_PROVER_UNREACHABLE, f"prover unreachable: {exc}") from exc
    if r.status_code == 422:
        raise ConsumerError(EXIT_UNSATISFIABLE, "prover: unsatisfiable input", r.status_code, _body(r))
    if r.status_code != 200:
        raise ConsumerError(EXIT_PROVER_ERROR, f"prover returned {r.status_code}", r.status_code, _body(r))
    return r.json()


def submit_verification(client: httpx.Client, verifier_url: str, circuit_id: str, public, outputs, proof) -> dict:
    try:
        r = client.post(f"{verifier_url.rstrip('/')}/v1/verify", json={
            "circuit_id": circuit_id, "public_inputs": public, "outputs": outputs, "proof": proof})
    except httpx.TransportError as exc:
        raise ConsumerError(EXIT_VERIFIER_UNREACHABLE, f"verifier unreachable: {exc}") from exc
    if r.status_code != 200:
        raise ConsumerError(EXIT_VERIFIER_ERROR, f"verifier returned {r.status_code}", r.status_code, _body(r))
    return r.json()


def consumer_run(public, private, circuit_id: str, prover_url: str, verifier_url: str,
                 client: httpx.Client | None = None, timeout: float = 300.0) -> dict:
    """Prove then verify. Returns a report; raises ConsumerError on any failure before a decision."""
    own = client is None
    client = client or httpx.Client(timeout=timeout)
    try:
        t0 = time.perf_counter()
        resp = request_proof(client, prover_url, circuit_id, public, private)
        proof_time = time.perf_counter() - t0
        decision = submit_verification(client, verifier_url, circuit_id, public, resp["outputs"], resp["proof"])
    finally:
        if own:
            client.close()
    return {
        "circuit_id": circuit_id,
        "outputs": resp["outputs"],
        "proof_time": proof_time,
        "timings": resp["timings"],
        "decision": decision,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="consumer")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="request a proof and forward it to the verifier")
    run.add_argument("--input", required=True, type=Path)
    run.add_argument("--circuit", required=True)
    run.add_argument("--prover", required=True)
    run.add_argument("--verifier", required=True)
    run.add_argument("--timeout", type=float, default=300.0)
    args = parser.parse_args(argv)

    try:
        public, private = load_input(args.input)
        report = consumer_run(public, private, args.circuit, args.prover, args.verifier, timeout=args.timeout)
    except ConsumerError as exc:
        print(json.dumps({"error": str(exc), "status": exc.status, "body": exc.body}), file=sys.stderr)
        return exc.exit_code
    print(json.dumps(report, indent=2))
    return EXIT_ACCEPTED if report["decision"]["accepted"] else EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
