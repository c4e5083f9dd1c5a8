import threading
import time
from pathlib import Path

import pytest
import uvicorn

from zkprovd.circuits import sqrt_circuit, square_circuit
from zkprovd.field import FieldConfig

FIXTURES = Path(__file__).resolve().parents[1] / "docs" / "fixtures"


@pytest.fixture
def f97():
    return FieldConfig(97)


@pytest.fixture
def square():
    return square_circuit()


@pytest.fixture
def sqrt():
    return sqrt_circuit()


class LiveServer:
    """Runs an ASGI app with uvicorn on an ephemeral port in a background thread."""

    def __init__(self, app):
        self.server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error",
                                                    lifespan="on"))
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self):
        self.thread.start()
        deadline = time.monotonic() + 30
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.url = f"http://127.0.0.1:{port}"
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(10)


@pytest.fixture
def live_server():
    return LiveServer


CRITERIA: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one result line per acceptance criterion; printed in the terminal summary."""

    class Recorder:
        def __init__(self):
            self.name = request.node.name
            self.notes: list[str] = []

        def note(self, text):
            self.notes.append(text)

    rec = Recorder()
    yield rec
    rep = getattr(request.node, "rep_call", None)
    if rep is None:
        status = "ERROR"
    elif rep.skipped:
        status = "SKIP"
    else:
        status = "PASS" if rep.passed else "FAIL"
    CRITERIA.append(f"{status:5} {rec.name}: " + "; ".join(rec.notes))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
