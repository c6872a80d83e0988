"""Client interface to the bulb vendor's cloud.

The bridge never talks to bulbs directly; everything goes through a vendor
cloud that owns the devices. This module defines the backend-agnostic client
contract plus the HTTP implementation used against the bundled simulator.
A real vendor adapter can slot in behind the same interface without touching
any other module.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Optional

import requests

from .model import LightState, validate_state

DEFAULT_TIMEOUT_S = 10.0


# ---------------------------------------------------------------------------
# Errors (wire codes shared with the simulator)
# ---------------------------------------------------------------------------

class VendorError(Exception):
    """Base class for vendor cloud failures."""

    wire_code = "vendor_error"
    http_status = 502


class BadCredentialsError(VendorError):
    """Login rejected; wrong username or password."""

    wire_code = "bad_credentials"
    http_status = 401


class InvalidTokenError(VendorError):
    """The session token is unknown or expired."""

    wire_code = "invalid_token"
    http_status = 401


class UnknownDeviceError(VendorError):
    """The account owns no device with that id."""

    wire_code = "unknown_device"
    http_status = 404


class DeviceOfflineError(VendorError):
    """The bulb is not reachable from the cloud right now."""

    wire_code = "device_offline"
    http_status = 409


class TransientFailureError(VendorError):
    """The call failed but may succeed if retried."""

    wire_code = "transient_failure"
    http_status = 502


class CloudUnavailableError(VendorError):
    """The vendor cloud itself is unreachable or down."""

    wire_code = "cloud_unavailable"
    http_status = 503


_ERRORS_BY_CODE = {
    cls.wire_code: cls
    for cls in (
        BadCredentialsError,
        InvalidTokenError,
        UnknownDeviceError,
        DeviceOfflineError,
        TransientFailureError,
        CloudUnavailableError,
    )
}


def error_for_code(code: str, message: str) -> VendorError:
    """Rehydrate a typed error from its wire code."""
    return _ERRORS_BY_CODE.get(code, VendorError)(message)


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VendorSession:
    """An authenticated vendor login; expires_at is epoch seconds."""

    token: str
    account: str
    expires_at: float


@dataclass(frozen=True)
class VendorDevice:
    """Listing entry for one device owned by an account."""

    vendor_device_id: str
    alias: str
    online: bool


# ---------------------------------------------------------------------------
# Client contract
# ---------------------------------------------------------------------------

class VendorClient:
    """What the bridge needs from any vendor cloud backend."""

    def login(self, username: str, password: str) -> VendorSession:
        raise NotImplementedError

    def list_devices(self, session: VendorSession) -> list[VendorDevice]:
        """All devices owned by the account, ordered by vendor_device_id."""
        raise NotImplementedError

    def get_state(self, session: VendorSession, device_id: str) -> LightState:
        raise NotImplementedError

    def set_state(
        self, session: VendorSession, device_id: str, state: LightState
    ) -> None:
        raise NotImplementedError


class HttpVendorClient(VendorClient):
    """Talks the simulator's HTTP dialect; see lightbridge.simulator."""

    def __init__(self, base_url: str, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._http = requests.Session()

    def _request(self, method: str, path: str, token: Optional[str] = None, **kwargs):
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        try:
            resp = self._http.request(
                method,
                self.base_url + path,
                headers=headers,
                timeout=self.timeout_s,
                **kwargs,
            )
        except requests.RequestException as exc:
            raise CloudUnavailableError(f"vendor cloud unreachable: {exc}") from exc
        if resp.status_code >= 400:
            try:
                body = resp.json()
                raise error_for_code(body["error"], body.get("message", ""))
            except (ValueError, KeyError):
                raise CloudUnavailableError(
                    f"vendor cloud returned {resp.status_code}"
                ) from None
        return resp.json()

    def login(self, username: str, password: str) -> VendorSession:
        body = self._request(
            "POST", "/v1/login", json={"username": username, "password": password}
        )
        return VendorSession(
            token=body["token"],
            account=body["account"],
            expires_at=body["expires_at"],
        )

    def list_devices(self, session: VendorSession) -> list[VendorDevice]:
        body = self._request("GET", "/v1/devices", token=session.token)
        return [
            VendorDevice(
                vendor_device_id=d["vendor_device_id"],
                alias=d["alias"],
                online=d["online"],
            )
            for d in body["devices"]
        ]

    def get_state(self, session: VendorSession, device_id: str) -> LightState:
        body = self._request(
            "GET", f"/v1/devices/{device_id}/state", token=session.token
        )
        return validate_state(body)

    def set_state(
        self, session: VendorSession, device_id: str, state: LightState
    ) -> None:
        self._request(
            "PUT",
            f"/v1/devices/{device_id}/state",
            token=session.token,
            json=state.to_dict(),
        )


class RealVendorAdapter(VendorClient):
    """Extension point for an actual bulb vendor's cloud.

    Each vendor speaks its own dialect (auth flows, device addressing,
    color models), so this adapter ships unimplemented. Subclass it, map
    the four calls onto the vendor's API, and hand the instance to the
    bridge; nothing outside this module changes.
    """

    def login(self, username: str, password: str) -> VendorSession:
        raise NotImplementedError("plug in a concrete vendor adapter")

    def list_devices(self, session: VendorSession) -> list[VendorDevice]:
        raise NotImplementedError("plug in a concrete vendor adapter")

    def get_state(self, session: VendorSession, device_id: str) -> LightState:
        raise NotImplementedError("plug in a concrete vendor adapter")

    def set_state(
        self, session: VendorSession, device_id: str, state: LightState
    ) -> None:
        raise NotImplementedError("plug in a concrete vendor adapter")


class SessionCache:
    """In-memory vendor sessions keyed by account.

    Tokens are deliberately never written to the registry store; only the
    session-scoped token lives here, so restarting the bridge forgets all
    vendor logins until devices are paired again.
    """

    def __init__(self) -> None:
        self._sessions: dict[str, VendorSession] = {}
        self._lock = threading.Lock()

    def put(self, session: VendorSession) -> None:
        with self._lock:
            self._sessions[session.account] = session

    def get(self, account: str) -> Optional[VendorSession]:
        with self._lock:
            session = self._sessions.get(account)
        if session is not None and session.expires_at <= time.time():
            return None
        return session

    def drop(self, account: str) -> None:
        with self._lock:
            self._sessions.pop(account, None)
