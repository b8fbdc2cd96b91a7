"""Adapter test fixtures: a generated world bundle plus a live TCP engine.

sidewalk_sim is a test-only dependency here: it builds the fixture world
and provides the engine-native episodes the fidelity checks compare
against. The adapter under test talks only to the wire protocol.
"""

from __future__ import annotations

import threading

import pytest

from sidewalk_sim.protocol import ProtocolServer
from sidewalk_sim.synth_world import WorldSpec, generate
from sidewalk_sim.world_io import save_bundle


@pytest.fixture(scope="session")
def smoke_world():
    """One-segment world used by every adapter test."""
    return generate(WorldSpec(seed=7, rows=1, cols=0, segment_length=14.0, addresses_per_side=2))


@pytest.fixture(scope="session")
def world_bundle(tmp_path_factory, smoke_world):
    path = tmp_path_factory.mktemp("bundle") / "smoke"
    save_bundle(smoke_world, path)
    return path


@pytest.fixture(scope="session")
def engine_endpoint(smoke_world):
    server = ProtocolServer(smoke_world, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.address
    yield f"{host}:{port}"
    server.shutdown()
