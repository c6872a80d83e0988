"""Shared fixtures: a populated simulator and an in-process bridge stack."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Callable, Optional

import pytest
import requests

from lightbridge.api import BridgeApp
from lightbridge.reconciler import Reconciler, ReconcilerConfig
from lightbridge.registry import CodeGenerator, DeviceRegistry
from lightbridge.sessions import SessionManager
from lightbridge.simulator import (
    DEMO_FIXTURE,
    CloudSimulator,
    LocalVendorClient,
    SimulatorApp,
    load_fixture,
)
from lightbridge.storage import KeyValueStore, MemoryStore
from lightbridge.vendor import HttpVendorClient, SessionCache, VendorClient
from lightbridge.webserver import HttpServer


def wait_until(
    predicate: Callable[[], bool], timeout_s: float = 5.0, interval_s: float = 0.005
) -> bool:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(interval_s)
    return predicate()


def make_sim(
    latency_ms: int = 0,
    fault_seed: Optional[int] = None,
    fail_probability: float = 0.0,
) -> CloudSimulator:
    sim = CloudSimulator(fault_seed=fault_seed, default_latency_ms=latency_ms)
    load_fixture(sim, DEMO_FIXTURE)
    if fail_probability:
        for devices in sim._devices.values():
            for device in devices.values():
                device.fail_probability = fail_probability
    return sim


@pytest.fixture
def sim() -> CloudSimulator:
    return make_sim()


@dataclass
class Stack:
    """Everything `bridge serve` wires up, runnable inside a test process."""

    sim: CloudSimulator
    vendor: VendorClient
    registry: DeviceRegistry
    session_cache: SessionCache
    manager: SessionManager
    app: BridgeApp
    server: Optional[HttpServer] = None
    sim_server: Optional[HttpServer] = None
    reconciler: Optional[Reconciler] = None

    @property
    def base_url(self) -> str:
        assert self.server is not None
        return self.server.url

    def api(self, method: str, path: str, body: Any = None) -> requests.Response:
        return requests.request(
            method, self.base_url + path, json=body, timeout=10
        )

    def pair(self, device_id: str = "bulb-1") -> str:
        resp = self.api(
            "POST",
            "/api/pair",
            {
                "vendor_username": "demo",
                "vendor_password": "demo",
                "vendor_device_id": device_id,
            },
        )
        assert resp.status_code == 200, resp.text
        return resp.json()["code"]

    def stop(self) -> None:
        if self.reconciler is not None:
            self.reconciler.stop()
        self.manager.shutdown()
        if self.server is not None:
            self.server.stop()
        if self.sim_server is not None:
            self.sim_server.stop()


def make_stack(
    sim: Optional[CloudSimulator] = None,
    store: Optional[KeyValueStore] = None,
    http_vendor: bool = False,
    serve: bool = True,
    reconcile: bool = True,
    config: Optional[ReconcilerConfig] = None,
    code_seed: Optional[int] = None,
) -> Stack:
    sim = sim if sim is not None else make_sim()
    sim_server = None
    if http_vendor:
        sim_server = HttpServer(SimulatorApp(sim)).start()
        vendor: VendorClient = HttpVendorClient(sim_server.url)
    else:
        vendor = LocalVendorClient(sim)
    registry = DeviceRegistry(
        store=store if store is not None else MemoryStore(),
        code_generator=CodeGenerator(seed=code_seed),
    )
    session_cache = SessionCache()
    manager = SessionManager(registry)
    app = BridgeApp(registry, vendor, manager, session_cache)
    stack = Stack(
        sim=sim,
        vendor=vendor,
        registry=registry,
        session_cache=session_cache,
        manager=manager,
        app=app,
        sim_server=sim_server,
    )
    if serve:
        stack.server = HttpServer(app).start()
    if reconcile:
        stack.reconciler = Reconciler(
            registry,
            vendor,
            session_cache,
            config=config
            if config is not None
            else ReconcilerConfig(poll_interval_ms=20, retry_backoff_ms=5),
        ).start()
    return stack


@pytest.fixture
def stack():
    s = make_stack()
    yield s
    s.stop()
