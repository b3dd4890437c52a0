import socket
import threading
import time
from pathlib import Path

import pytest
import uvicorn
from fastapi.testclient import TestClient

from c2po_sidecar.app import build_app
from c2po_sidecar.config import BridgeConfig

FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def stub_config() -> BridgeConfig:
    return BridgeConfig(infer_model=f"stub:{FIXTURES / 'mini_table.tsv'}")


@pytest.fixture(scope="session")
def client(stub_config) -> TestClient:
    return TestClient(build_app(stub_config))


class LiveServer:
    """uvicorn in a thread on an ephemeral port, for subprocess clients."""

    def __init__(self, app):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            self.port = probe.getsockname()[1]
        self.url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(app, host="127.0.0.1", port=self.port, log_level="error")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self):
        self.thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("sidecar server did not start")
            time.sleep(0.02)
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=5)


@pytest.fixture(scope="session")
def live_server(stub_config):
    with LiveServer(build_app(stub_config)) as server:
        yield server
