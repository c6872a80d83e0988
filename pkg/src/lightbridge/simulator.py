"""Simulated vendor cloud: accounts, bulbs, latency, and seeded faults.

The simulator stands in for the real bulb vendor during development and
tests. It enforces the same contract the bridge would face in production
(auth tokens, per-device state, offline devices) and adds two test knobs:
per-device artificial latency and a seeded per-call failure probability, so
retry and convergence behavior can be exercised deterministically.
"""

from __future__ import annotations

import json
import logging
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .model import LightState, validate_state
from .vendor import (
    BadCredentialsError,
    CloudUnavailableError,
    DeviceOfflineError,
    InvalidTokenError,
    TransientFailureError,
    UnknownDeviceError,
    VendorClient,
    VendorDevice,
    VendorError,
    VendorSession,
)
from .webserver import JsonHttpApp, Request, require_object

log = logging.getLogger(__name__)

DEFAULT_LATENCY_MS = 30
SESSION_TTL_S = 24 * 3600


@dataclass
class SimDevice:
    """One simulated bulb.

    latency_ms of None means "use the simulator default". fail_probability
    applies to set calls only; a failed set never changes the stored state.
    """

    vendor_device_id: str
    alias: str
    state: LightState
    online: bool = True
    latency_ms: Optional[int] = None
    fail_probability: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class CloudSimulator:
    """In-memory vendor cloud with deterministic fault injection.

    All fault draws come from one seeded RNG in call order, so a run with a
    fixed seed and a serial caller (like the reconciler) sees an identical
    failure schedule every time. Setting ``down`` makes every call raise
    CloudUnavailableError until cleared.
    """

    def __init__(
        self,
        fault_seed: Optional[int] = None,
        default_latency_ms: int = DEFAULT_LATENCY_MS,
        session_ttl_s: float = SESSION_TTL_S,
        now_fn: Callable[[], float] = time.time,
    ):
        self.default_latency_ms = default_latency_ms
        self.session_ttl_s = session_ttl_s
        self.now_fn = now_fn
        self.down = False
        self._accounts: dict[str, str] = {}
        self._devices: dict[str, dict[str, SimDevice]] = {}
        self._sessions: dict[str, tuple[str, float]] = {}
        self._fault_rng = random.Random(fault_seed)
        self._lock = threading.Lock()
        self.counters = {
            "logins": 0,
            "device_lists": 0,
            "state_gets": 0,
            "set_calls": 0,
            "set_failures": 0,
            "mutations": 0,
        }

    # -- fixture population -------------------------------------------------

    def add_account(self, username: str, password: str) -> None:
        with self._lock:
            self._accounts[username] = password
            self._devices.setdefault(username, {})

    def add_device(self, username: str, device: SimDevice) -> None:
        with self._lock:
            if username not in self._accounts:
                raise ValueError(f"no such account: {username}")
            self._devices[username][device.vendor_device_id] = device

    # -- internals ----------------------------------------------------------

    def _check_up(self) -> None:
        if self.down:
            raise CloudUnavailableError("cloud is down")

    def _count(self, key: str) -> None:
        with self._lock:
            self.counters[key] += 1

    def _account_for(self, token: Optional[str]) -> str:
        with self._lock:
            entry = self._sessions.get(token or "")
        if entry is None:
            raise InvalidTokenError("unknown session token")
        account, expires_at = entry
        if expires_at <= self.now_fn():
            raise InvalidTokenError("session token expired")
        return account

    def _device(self, account: str, device_id: str) -> SimDevice:
        with self._lock:
            device = self._devices.get(account, {}).get(device_id)
        if device is None:
            raise UnknownDeviceError(f"account owns no device {device_id}")
        return device

    def _simulate_latency(self, device: SimDevice) -> None:
        latency = (
            device.latency_ms
            if device.latency_ms is not None
            else self.default_latency_ms
        )
        if latency > 0:
            time.sleep(latency / 1000.0)

    # -- vendor operations --------------------------------------------------

    def login(self, username: str, password: str) -> VendorSession:
        self._check_up()
        self._count("logins")
        with self._lock:
            known = self._accounts.get(username)
        if known is None or known != password:
            raise BadCredentialsError("bad username or password")
        token = secrets.token_hex(16)
        expires_at = self.now_fn() + self.session_ttl_s
        with self._lock:
            self._sessions[token] = (username, expires_at)
        return VendorSession(token=token, account=username, expires_at=expires_at)

    def list_devices(self, token: Optional[str]) -> list[VendorDevice]:
        self._check_up()
        account = self._account_for(token)
        self._count("device_lists")
        with self._lock:
            devices = list(self._devices[account].values())
        return [
            VendorDevice(d.vendor_device_id, d.alias, d.online)
            for d in sorted(devices, key=lambda d: d.vendor_device_id)
        ]

    def get_state(self, token: Optional[str], device_id: str) -> LightState:
        self._check_up()
        account = self._account_for(token)
        device = self._device(account, device_id)
        self._count("state_gets")
        if not device.online:
            raise DeviceOfflineError(f"device {device_id} is offline")
        self._simulate_latency(device)
        with device.lock:
            return device.state

    def set_state(self, token: Optional[str], device_id: str, state: LightState) -> None:
        self._check_up()
        account = self._account_for(token)
        device = self._device(account, device_id)
        self._count("set_calls")
        if not device.online:
            raise DeviceOfflineError(f"device {device_id} is offline")
        self._simulate_latency(device)
        with self._lock:
            failed = self._fault_rng.random() < device.fail_probability
        if failed:
            self._count("set_failures")
            raise TransientFailureError("injected fault")
        with device.lock:
            device.state = state
        self._count("mutations")

    def stats(self) -> dict[str, int]:
        with self._lock:
            return dict(self.counters)


class LocalVendorClient(VendorClient):
    """Drives a CloudSimulator in-process; used by fast tests."""

    def __init__(self, sim: CloudSimulator):
        self.sim = sim

    def login(self, username: str, password: str) -> VendorSession:
        return self.sim.login(username, password)

    def list_devices(self, session: VendorSession) -> list[VendorDevice]:
        return self.sim.list_devices(session.token)

    def get_state(self, session: VendorSession, device_id: str) -> LightState:
        return self.sim.get_state(session.token, device_id)

    def set_state(
        self, session: VendorSession, device_id: str, state: LightState
    ) -> None:
        self.sim.set_state(session.token, device_id, state)


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

# Loaded when no --fixture file is given: one demo account, two bulbs.
DEMO_FIXTURE: dict[str, Any] = {
    "accounts": [
        {
            "username": "demo",
            "password": "demo",
            "devices": [
                {
                    "id": "bulb-1",
                    "alias": "Living Room",
                    "state": {"power": True, "hue": 30, "saturation": 40, "brightness": 80},
                },
                {
                    "id": "bulb-2",
                    "alias": "Hallway",
                    "state": {"power": False, "hue": 0, "saturation": 0, "brightness": 100},
                },
            ],
        }
    ]
}


def load_fixture(sim: CloudSimulator, fixture: dict[str, Any]) -> None:
    """Populate accounts and devices from a fixture dict (see DEMO_FIXTURE)."""
    for account in fixture.get("accounts", []):
        sim.add_account(account["username"], account["password"])
        for dev in account.get("devices", []):
            sim.add_device(
                account["username"],
                SimDevice(
                    vendor_device_id=dev["id"],
                    alias=dev.get("alias", dev["id"]),
                    state=validate_state(dev["state"]),
                    online=dev.get("online", True),
                    latency_ms=dev.get("latency_ms"),
                    fail_probability=dev.get("fail_probability", 0.0),
                ),
            )


def build_simulator(
    fixture: Optional[dict[str, Any]] = None,
    fixture_path: Optional[str] = None,
    fault_seed: Optional[int] = None,
    default_latency_ms: int = DEFAULT_LATENCY_MS,
) -> CloudSimulator:
    """Construct a populated simulator from a fixture dict or file."""
    sim = CloudSimulator(fault_seed=fault_seed, default_latency_ms=default_latency_ms)
    if fixture_path is not None:
        with open(fixture_path, encoding="utf-8") as fh:
            fixture = json.load(fh)
    load_fixture(sim, fixture if fixture is not None else DEMO_FIXTURE)
    return sim


# ---------------------------------------------------------------------------
# HTTP front end
# ---------------------------------------------------------------------------

class SimulatorApp(JsonHttpApp):
    """HTTP dialect over the simulator; mirrored by HttpVendorClient."""

    name = "simulator"

    def __init__(self, sim: CloudSimulator):
        super().__init__()
        self.sim = sim

        @self.route("POST", "/v1/login")
        def login(req: Request) -> tuple[int, Any]:
            body = require_object(req)
            session = sim.login(
                str(body.get("username", "")), str(body.get("password", ""))
            )
            return 200, {
                "token": session.token,
                "account": session.account,
                "expires_at": session.expires_at,
            }

        @self.route("GET", "/v1/devices")
        def list_devices(req: Request) -> tuple[int, Any]:
            devices = sim.list_devices(req.bearer_token())
            return 200, {
                "devices": [
                    {
                        "vendor_device_id": d.vendor_device_id,
                        "alias": d.alias,
                        "online": d.online,
                    }
                    for d in devices
                ]
            }

        @self.route("GET", "/v1/devices/(?P<device_id>[^/]+)/state")
        def get_state(req: Request) -> tuple[int, Any]:
            state = sim.get_state(req.bearer_token(), req.params["device_id"])
            return 200, state.to_dict()

        @self.route("PUT", "/v1/devices/(?P<device_id>[^/]+)/state")
        def set_state(req: Request) -> tuple[int, Any]:
            state = validate_state(require_object(req))
            sim.set_state(req.bearer_token(), req.params["device_id"], state)
            return 200, {"ok": True}

        @self.route("GET", "/v1/stats")
        def stats(req: Request) -> tuple[int, Any]:
            return 200, sim.stats()

    def map_exception(self, exc: Exception) -> Optional[tuple[int, Any]]:
        from .model import OutOfRangeError

        if isinstance(exc, VendorError):
            return exc.http_status, {"error": exc.wire_code, "message": str(exc)}
        if isinstance(exc, OutOfRangeError):
            return 422, {
                "error": "out_of_range",
                "message": str(exc),
                "violations": exc.violations,
            }
        return None
