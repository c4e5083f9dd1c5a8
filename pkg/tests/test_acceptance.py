"""Acceptance criteria, one test per criterion (criterion 7 split into its invariants).

Each test records a PASS/FAIL/SKIP line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import copy
import hashlib
import json
import os
import random
import subprocess
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import httpx
import pytest

from conftest import FIXTURES
from test_circuit import _oracle_agreement
from zkprovd import backend
from zkprovd.backend import get_backend
from zkprovd.bench.experiment import ExperimentConfig, Instance, run_experiment
from zkprovd.bench.report import emit_report, read_csv
from zkprovd.circuits import random_circuit, random_satisfiable_instance, sqrt_circuit, square_circuit, squaring_chain
from zkprovd.consumer import consumer_run
from zkprovd.encoding import circuit_id, encode_circuit
from zkprovd.field import FieldConfig
from zkprovd.service import ProvingService, ServiceConfig, create_app
from zkprovd.verifier import create_verifier_app

USABLE_THREADS = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()


@pytest.fixture
def stack(tmp_path, live_server):
    root = tmp_path / "reg"
    svc = ProvingService(ServiceConfig(registry_root=str(root), executor="thread", workers=2, queue_capacity=64))
    with live_server(create_app(svc)) as prover, live_server(create_verifier_app(root)) as verifier:
        yield prover.url, verifier.url, svc


def _register(url, ecs, k=None):
    r = httpx.post(f"{url}/v1/circuits", content=encode_circuit(ecs), params={} if k is None else {"k": k})
    assert r.status_code == 201, r.text
    return r.json()["id"]


def test_criterion_1_end_to_end_completeness(stack, criterion):
    prover, verifier, _ = stack
    cid = _register(prover, sqrt_circuit())
    t0 = time.perf_counter()
    report = consumer_run(["9"], ["3"], cid, prover, verifier)
    elapsed = time.perf_counter() - t0
    criterion.note(f"sqrt x=[9] x'=[3] accepted={report['decision']['accepted']} in {elapsed:.3f}s (< 5 s)")
    assert report["decision"]["accepted"] and elapsed < 5

    rng = random.Random(1)
    fields = [FieldConfig(7), FieldConfig(97), FieldConfig()]
    accepted = 0
    with httpx.Client(timeout=60) as client:
        for i in range(500):
            inst = random_satisfiable_instance(rng, fields[i % 3])
            cid = _register(prover, inst.ecs)
            rep = consumer_run([str(v) for v in inst.x], [str(v) for v in inst.x_prime], cid, prover, verifier,
                               client=client)
            accepted += rep["decision"]["accepted"]
    criterion.note(f"{accepted}/500 random satisfiable instances accepted (need 500)")
    assert accepted == 500


def test_criterion_2_plumbing_soundness(stack, criterion):
    prover, verifier, _ = stack
    cid = _register(prover, sqrt_circuit())
    other = _register(prover, square_circuit())
    resp = httpx.post(f"{prover}/v1/proofs", json={"circuit_id": cid, "public_inputs": ["9"],
                                                   "private_inputs": ["3"]}).json()

    def send(cid_, public, outputs, proof):
        return httpx.post(f"{verifier}/v1/verify", json={"circuit_id": cid_, "public_inputs": public,
                                                         "outputs": outputs, "proof": proof})

    assert send(cid, ["9"], resp["outputs"], resp["proof"]).json()["accepted"]

    # output: the sqrt circuit has none, so use a square proof for the output mutation
    sq = httpx.post(f"{prover}/v1/proofs", json={"circuit_id": other, "private_inputs": ["3"]}).json()
    assert send(other, [], sq["outputs"], sq["proof"]).json()["accepted"]

    flipped = copy.deepcopy(resp["proof"])
    q = flipped["query_openings"][0]["openings"][0]["path"]["siblings"]
    q[0] = format(int(q[0][:2], 16) ^ 0x01, "02x") + q[0][2:]

    results = {
        "public input 9->10": send(cid, ["10"], resp["outputs"], resp["proof"]),
        "output 9->10": send(other, [], ["10"], sq["proof"]),
        "one proof byte": send(cid, ["9"], resp["outputs"], flipped),
        "circuit id": send(other, ["9"], resp["outputs"], resp["proof"]),
    }
    expected = {"public input 9->10": "bad-public-wire", "output 9->10": "bad-public-wire",
                "one proof byte": "bad-path", "circuit id": "bad-public-wire"}
    ok = True
    for name, r in results.items():
        doc = r.json()
        reason = doc.get("reason") if r.status_code == 200 else doc["error"]["code"]
        criterion.note(f"{name}: HTTP {r.status_code} {reason}")
        ok &= r.status_code == 200 and doc["accepted"] is False and reason == expected[name]
    # an unregistered id (one hex digit changed) is refused outright
    bogus = ("0" if cid[0] != "0" else "1") + cid[1:]
    r = send(bogus, ["9"], resp["outputs"], resp["proof"])
    criterion.note(f"unknown circuit id: HTTP {r.status_code} {r.json()['error']['code']}")
    assert ok and r.status_code == 404


def test_criterion_3_statistical_soundness(criterion):
    from zkprovd.circuits import violating_circuit

    spot = get_backend("merkle-spotcheck")
    t0 = time.perf_counter()
    ecs, w = violating_circuit(100, 10)
    pk, vk = backend.setup(ecs, 30)
    cid = circuit_id(ecs)
    accepted = 0
    for t in range(1000):
        w[1] = t
        proof = spot.commit_and_open(pk, ecs, w, [], [])
        accepted += spot.verify(vk, [], [], proof, ecs, ecs_id=cid).accepted
    elapsed = time.perf_counter() - t0
    rate = accepted / 1000
    criterion.note(f"accept rate {rate:.3f} (bound 0.9**30={0.9 ** 30:.4f}, limit 0.07) in {elapsed:.1f}s (< 120 s)")
    assert rate <= 0.07 and elapsed < 120


def test_criterion_4_oracle_equivalence(criterion):
    fc = FieldConfig(7)
    n = 0
    for seed in range(300):
        _oracle_agreement(random_circuit(random.Random(seed), fc, max_inputs=1, max_private=2, max_outputs=1,
                                         max_ops=4))
        n += 1
    for seed in range(60):
        inst = random_satisfiable_instance(random.Random(seed), fc, max_free=1, max_claims=1, max_private=2,
                                           max_ops=2)
        _oracle_agreement(inst.ecs)
        n += 1
    criterion.note(f"{n} generated circuits over p=7 agree with exhaustive enumeration")


_CRASH_SCRIPT = """
import os, sys
from zkprovd.registry import Registry
from zkprovd.circuits import squaring_chain

step = int(sys.argv[2])
original = Registry._write_file
count = [0]

def write(self, path, data):
    if count[0] == step:
        with open(path.with_name(path.name + ".tmp"), "wb") as fh:
            fh.write(data[: len(data) // 2])
            fh.flush()
        os.kill(os.getpid(), 9)
    count[0] += 1
    original(self, path, data)

Registry._write_file = write
if step == 4:
    os.rename = lambda *a: os.kill(os.getpid(), 9)
Registry(sys.argv[1]).register_circuit(squaring_chain(7), 30)
"""


def _entry_bytes(root: Path, cid: str) -> dict:
    return {p.name: p.read_bytes() for p in sorted((root / cid).iterdir())}


def test_criterion_5_registry_durability(tmp_path, criterion):
    root = tmp_path / "reg"
    client = httpx.Client(timeout=60)
    inst = Instance(root, 1, 4, None, tmp_path)
    try:
        inst.wait_ready(client, 120)
        ids = [_register(inst.url, e) for e in (square_circuit(), sqrt_circuit(), squaring_chain(50))]
        before_http = [client.get(f"{inst.url}/v1/circuits/{i}").content for i in ids]
        before_files = {i: _entry_bytes(root, i) for i in ids}
        inst.proc.kill()  # SIGKILL, no shutdown hooks
        inst.proc.wait()
    finally:
        inst.stop()
    criterion.note("3 circuits registered, service killed with SIGKILL")

    for step in range(5):
        r = subprocess.run([sys.executable, "-c", _CRASH_SCRIPT, str(root), str(step)], capture_output=True)
        assert r.returncode == -9, r.stderr.decode()
    crashed = circuit_id(squaring_chain(7))

    inst = Instance(root, 1, 4, None, tmp_path)
    try:
        inst.wait_ready(client, 120)
        after_http = [client.get(f"{inst.url}/v1/circuits/{i}").content for i in ids]
        listed = [m["id"] for m in client.get(f"{inst.url}/v1/circuits").json()]
        crashed_status = client.get(f"{inst.url}/v1/circuits/{crashed}").status_code
        proof = client.post(f"{inst.url}/v1/proofs", json={"circuit_id": ids[1], "public_inputs": ["9"],
                                                           "private_inputs": ["3"]})
    finally:
        inst.stop()
        client.close()
    after_files = {i: _entry_bytes(root, i) for i in ids}
    leftovers = sorted(p.name for p in root.iterdir() if p.name not in ids)
    same = before_http == after_http and before_files == after_files
    criterion.note(f"after restart entries byte-identical={same}, listed={len(listed)}")
    criterion.note(f"5 mid-write SIGKILLs: crashed id -> HTTP {crashed_status}, leftover paths {leftovers}")
    assert same and sorted(listed) == sorted(ids) and proof.status_code == 200
    assert crashed_status == 404 and crashed not in listed and leftovers == []


def test_criterion_6_concurrency_isolation(tmp_path, live_server, criterion):
    svc = ProvingService(ServiceConfig(registry_root=str(tmp_path / "a"), executor="thread", workers=4,
                                       queue_capacity=64))
    with live_server(create_app(svc)) as srv:
        cid = _register(srv.url, sqrt_circuit(FieldConfig()))
        rng = random.Random(6)
        p = FieldConfig().modulus
        roots = [rng.randrange(1, p) for _ in range(64)]
        xs = [a * a % p for a in roots]
        with httpx.Client(timeout=120, limits=httpx.Limits(max_connections=64)) as client, ThreadPoolExecutor(64) as ex:
            resps = list(ex.map(lambda i: client.post(f"{srv.url}/v1/proofs", json={
                "circuit_id": cid, "public_inputs": [str(xs[i])], "private_inputs": [str(roots[i])]}), range(64)))
    assert all(r.status_code == 200 for r in resps)
    entry = svc.registry.fetch_entry(cid)
    from zkprovd.backend.proof import Proof

    proofs = [Proof.from_doc(r.json()["proof"]) for r in resps]
    own = sum(backend.verify(entry.vk, [xs[i]], [], proofs[i], entry.ecs).accepted for i in range(64))
    cross = sum(backend.verify(entry.vk, [xs[j]], [], proofs[i], entry.ecs).accepted
                for i in range(64) for j in range(64) if xs[i] != xs[j])
    criterion.note(f"64 concurrent: {own} own verifications accepted, {cross} swapped acceptances")

    gate = threading.Event()
    svc2 = ProvingService(ServiceConfig(registry_root=str(tmp_path / "b"), executor="thread", workers=2,
                                        queue_capacity=4), job_hook=lambda _: gate.wait(60))
    with live_server(create_app(svc2)) as srv:
        cid = _register(srv.url, square_circuit())
        with httpx.Client(timeout=120, limits=httpx.Limits(max_connections=16)) as client, ThreadPoolExecutor(10) as ex:
            futs = [ex.submit(client.post, f"{srv.url}/v1/proofs", json={"circuit_id": cid, "private_inputs": [str(i)]})
                    for i in range(10)]
            deadline = time.monotonic() + 30
            while sum(f.done() for f in futs) < 4 and time.monotonic() < deadline:
                time.sleep(0.01)
            time.sleep(0.2)
            early = [f.result().status_code for f in futs if f.done()]
            gate.set()
            codes = [f.result().status_code for f in futs]
    overloaded = codes.count(503)
    criterion.note(f"workers=2 queue=4 burst=10: {overloaded} overloaded, {codes.count(200)} completed")
    assert own == 64 and cross == 0
    assert overloaded == 4 and codes.count(200) == 6 and early.count(503) == 4


@pytest.fixture(scope="module")
def scaling(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    h = USABLE_THREADS
    t0 = time.perf_counter()
    configs = [
        {"experiment": "C", "workload": {"steps": 20000}, "total_requests": 24, "instance_count": [1, 2],
         "warmup_requests": 2},
        {"experiment": "B", "workload": {"steps": 20000}, "total_requests": 24,
         "workers_per_instance": sorted({1, 2, h, 2 * h}), "warmup_requests": 2},
    ] + [
        {"experiment": "A", "workload": {"steps": n}, "total_requests": 6, "warmup_requests": 1}
        for n in (1000, 10000, 100000)
    ]
    records = []
    for doc in configs:
        records += run_experiment(ExperimentConfig.from_doc(doc), out_dir=out)
    paths = emit_report(records, out)
    return {"records": records, "paths": paths, "out": out, "elapsed": time.perf_counter() - t0}


def _tp(records, exp, **kw):
    (r,) = [r for r in records if r.experiment == exp and all(getattr(r, k) == v for k, v in kw.items())]
    return r


def test_criterion_7a_report_and_runtime(scaling, criterion):
    names = sorted(p.name for p in scaling["paths"])
    reread = read_csv(scaling["out"] / "results.csv")
    criterion.note(f"{names} in {scaling['out']}; experiments ran in {scaling['elapsed']:.0f}s (< 900 s)")
    assert names == ["experiment_A.png", "experiment_B.png", "experiment_C.png", "results.csv"]
    assert all(p.stat().st_size > 0 for p in scaling["paths"])
    assert len(reread) == len(scaling["records"])
    assert scaling["elapsed"] < 900


def test_criterion_7b_horizontal_scaling(scaling, criterion):
    one, two = _tp(scaling["records"], "C", instances=1), _tp(scaling["records"], "C", instances=2)
    speedup = two.throughput_pps / one.throughput_pps
    latency = two.avg_prove_s / one.avg_prove_s
    criterion.note(f"throughput x{speedup:.2f} at 2 instances (need >= 1.6), latency x{latency:.2f} (need <= 1.5), "
                   f"usable hardware threads {USABLE_THREADS}")
    if USABLE_THREADS < 4:
        pytest.skip(f"criterion requires a host with >= 4 hardware threads; this host has {USABLE_THREADS} "
                    f"(measured throughput x{speedup:.2f}, latency x{latency:.2f})")
    assert speedup >= 1.6 and latency <= 1.5


def test_criterion_7c_thread_plateau(scaling, criterion):
    h = USABLE_THREADS
    recs = scaling["records"]
    tp = {w: _tp(recs, "B", workers=w).throughput_pps for w in sorted({1, 2, h, 2 * h})}
    low, high = tp[2] / tp[1], tp[2 * h] / tp[h]
    criterion.note(f"H={h}: tp(2)/tp(1)={low:.2f} >= tp(2H)/tp(H)={high:.2f}")
    assert low >= high


def test_criterion_7d_memory_monotonic(scaling, criterion):
    rss = [_tp(scaling["records"], "A", n_constraints=n).peak_rss_gb for n in (1000, 10000, 100000)]
    criterion.note("peak RSS GB at n=1e3,1e4,1e5: " + ", ".join(f"{v:.3f}" for v in rss))
    assert rss[0] < rss[1] < rss[2]


_DETERMINISM_SCRIPT = """
import hashlib, json
from zkprovd import backend
from zkprovd.circuit import solve_witness
from zkprovd.circuits import square_circuit
from zkprovd.encoding import circuit_id, encode_circuit

ecs = square_circuit()
pk, vk = backend.setup(ecs, 30)
w, outs = solve_witness(ecs, [], [3])
proof = backend.prove(pk, ecs, w, [], outs)
h = lambda b: hashlib.sha256(b).hexdigest()
print(json.dumps({"id": circuit_id(ecs), "ecs": h(encode_circuit(ecs)), "pk": h(pk.to_bytes()),
                  "vk": h(vk.to_bytes()), "proof": h(proof.to_bytes())}))
"""

# Digests of the checked-in fixtures; any platform must reproduce them.
FROZEN = {
    "id": "10e4382478a6a8ada9c837477c3030c5b4470fd43d59efa1f2c087f5513ea8ab",
    "ecs": "10e4382478a6a8ada9c837477c3030c5b4470fd43d59efa1f2c087f5513ea8ab",
    "pk": "00ca929502ebf2d40f81d59ccda1c1db348dc3634f097e065b33af46d0cad147",
    "vk": "cd2c37ec0dbdfe7e6407697779c491804d77111fff4827868d1f3a78140eb8f1",
    "proof": "838d0f044ef431ed2bbef888a782d3f9df8ce62c96a3fc249029b8171cd8afe3",
}


def test_criterion_8_determinism(criterion):
    runs = []
    for seed in ("0", "12345"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        out = subprocess.run([sys.executable, "-c", _DETERMINISM_SCRIPT], capture_output=True, env=env, check=True)
        runs.append(json.loads(out.stdout))
    files = {
        "vk": hashlib.sha256((FIXTURES / "square.vk.json").read_bytes()).hexdigest(),
        "proof": hashlib.sha256((FIXTURES / "square.proof.json").read_bytes()).hexdigest(),
        "ecs": hashlib.sha256((FIXTURES / "square.ecs.json").read_bytes()).hexdigest(),
    }
    criterion.note(f"two runs identical={runs[0] == runs[1]}, match frozen digests={runs[0] == FROZEN}, "
                   f"match checked-in fixture files={all(FROZEN[k] == v for k, v in files.items())}")
    assert runs[0] == runs[1] == FROZEN
    assert all(FROZEN[k] == v for k, v in files.items())
