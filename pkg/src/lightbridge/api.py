"""Bridge HTTP API: pairing, device state, and game sessions.

This is the surface the game client and the web console talk to. Every
domain error maps to exactly one (HTTP status, error_code) pair, listed in
ERROR_TABLE; anything a client can trigger produces a documented JSON error,
never a bare 500. Vendor credentials pass through pairing in memory only;
the registry stores account names, never passwords or tokens.
"""

from __future__ import annotations

import logging
from typing import Any, Optional

from .game import (
    EventKind,
    GameEvent,
    InvalidTransitionError,
    UnknownGestureError,
)
from .model import OutOfRangeError, validate_state
from .registry import (
    CodeSpaceExhaustedError,
    DeviceRegistry,
    RevokedCodeError,
    StoreUnavailableError,
    UnknownCodeError,
)
from .sessions import SessionManager, UnknownSessionError
from .vendor import (
    BadCredentialsError,
    CloudUnavailableError,
    DeviceOfflineError,
    InvalidTokenError,
    SessionCache,
    TransientFailureError,
    UnknownDeviceError,
    VendorClient,
)
from .webserver import BadRequestBody, JsonHttpApp, Request, require_object

log = logging.getLogger(__name__)

# One row per error a client can provoke: exception -> (status, error_code).
ERROR_TABLE: dict[type, tuple[int, str]] = {
    OutOfRangeError: (422, "out_of_range"),
    UnknownCodeError: (404, "unknown_code"),
    RevokedCodeError: (410, "revoked"),
    CodeSpaceExhaustedError: (507, "code_space_exhausted"),
    StoreUnavailableError: (503, "store_unavailable"),
    UnknownSessionError: (404, "unknown_session"),
    InvalidTransitionError: (409, "invalid_transition"),
    UnknownGestureError: (422, "unknown_gesture"),
    BadCredentialsError: (401, "bad_credentials"),
    UnknownDeviceError: (404, "unknown_device"),
    DeviceOfflineError: (409, "device_offline"),
    CloudUnavailableError: (502, "cloud_unavailable"),
    TransientFailureError: (502, "vendor_transient_failure"),
    InvalidTokenError: (502, "invalid_vendor_session"),
}


def _require_str(body: dict[str, Any], key: str) -> str:
    value = body.get(key)
    if not isinstance(value, str) or not value:
        raise BadRequestBody(f"{key} must be a nonempty string")
    return value


def _optional_int(body: dict[str, Any], key: str) -> Optional[int]:
    value = body.get(key)
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise BadRequestBody(f"{key} must be an integer")
    return value


class BridgeApp(JsonHttpApp):
    """Routes over a registry, a vendor client, and a session manager."""

    name = "api"

    def __init__(
        self,
        registry: DeviceRegistry,
        vendor: VendorClient,
        session_manager: SessionManager,
        session_cache: SessionCache,
        static_dir: Optional[str] = None,
    ):
        super().__init__()
        self.registry = registry
        self.vendor = vendor
        self.session_manager = session_manager
        self.session_cache = session_cache
        self.static_dir = static_dir
        self._register_routes()

    def map_exception(self, exc: Exception) -> Optional[tuple[int, Any]]:
        row = ERROR_TABLE.get(type(exc))
        if row is None:
            return None
        status, code = row
        payload: dict[str, Any] = {"error": code, "message": str(exc)}
        if isinstance(exc, OutOfRangeError):
            payload["violations"] = exc.violations
        return status, payload

    # -- routes -------------------------------------------------------------

    def _register_routes(self) -> None:
        @self.route("GET", "/api/health")
        def health(req: Request) -> tuple[int, Any]:
            return 200, {"ok": True}

        @self.route("POST", "/api/pair")
        def pair(req: Request) -> tuple[int, Any]:
            body = require_object(req)
            username = _require_str(body, "vendor_username")
            password = _require_str(body, "vendor_password")
            device_id = _require_str(body, "vendor_device_id")

            # Login, prove the account owns the device, and capture its
            # current state; only then does a record come into existence.
            session = self.vendor.login(username, password)
            devices = {
                d.vendor_device_id: d for d in self.vendor.list_devices(session)
            }
            if device_id not in devices:
                raise UnknownDeviceError(f"account owns no device {device_id}")
            state = self.vendor.get_state(session, device_id)
            record = self.registry.register_device(
                vendor_account=session.account,
                vendor_device_id=device_id,
                alias=devices[device_id].alias,
                initial_reported=state,
            )
            # Keep the token so the reconciler can push without credentials.
            self.session_cache.put(session)
            return 200, {"code": record.code, "alias": record.alias}

        @self.route("POST", "/api/vendor/devices")
        def list_vendor_devices(req: Request) -> tuple[int, Any]:
            # The pairing page's device picker: same login the pair flow
            # performs, stopping before any record is created.
            body = require_object(req)
            username = _require_str(body, "vendor_username")
            password = _require_str(body, "vendor_password")
            session = self.vendor.login(username, password)
            self.session_cache.put(session)
            return 200, {
                "devices": [
                    {
                        "vendor_device_id": d.vendor_device_id,
                        "alias": d.alias,
                        "online": d.online,
                    }
                    for d in self.vendor.list_devices(session)
                ]
            }

        @self.route("GET", "/api/device/(?P<code>[^/]+)/state")
        def get_device_state(req: Request) -> tuple[int, Any]:
            record = self.registry.get_record(req.params["code"])
            return 200, {
                "desired": record.desired.to_dict(),
                "reported": record.reported.to_dict() if record.reported else None,
                "desired_revision": record.desired_revision,
                "reported_revision": record.reported_revision,
                "in_sync": record.in_sync,
            }

        @self.route("PUT", "/api/device/(?P<code>[^/]+)/state")
        def put_device_state(req: Request) -> tuple[int, Any]:
            state = validate_state(req.body)
            revision = self.registry.set_desired(req.params["code"], state)
            return 200, {"desired_revision": revision}

        @self.route("DELETE", "/api/device/(?P<code>[^/]+)")
        def revoke_device(req: Request) -> tuple[int, Any]:
            self.registry.revoke(req.params["code"])
            return 200, {"ok": True}

        @self.route("POST", "/api/session")
        def create_session(req: Request) -> tuple[int, Any]:
            body = require_object(req)
            code = _require_str(body, "code")
            seed = _optional_int(body, "seed")
            answer_hold_ms = _optional_int(body, "answer_hold_ms")
            if answer_hold_ms is not None and answer_hold_ms < 0:
                raise BadRequestBody("answer_hold_ms must be >= 0")
            game = self.session_manager.create(
                code, seed=seed, answer_hold_ms=answer_hold_ms
            )
            return 200, {"session_id": game.session_id, "phase": game.phase.value}

        @self.route("POST", "/api/session/(?P<session_id>[^/]+)/event")
        def post_event(req: Request) -> tuple[int, Any]:
            body = require_object(req)
            kind_raw = body.get("kind")
            try:
                kind = EventKind(kind_raw)
            except ValueError:
                raise BadRequestBody(f"unknown event kind: {kind_raw!r}")
            gesture_id = body.get("gesture_id")
            if gesture_id is not None and not isinstance(gesture_id, str):
                raise BadRequestBody("gesture_id must be a string")
            game, cues = self.session_manager.apply(
                req.params["session_id"], GameEvent(kind, gesture_id=gesture_id)
            )
            return 200, {
                "phase": game.phase.value,
                "cues": [cue.value for cue in cues],
                "question_index": game.question_index,
            }

        @self.route("GET", "/api/session/(?P<session_id>[^/]+)")
        def get_session(req: Request) -> tuple[int, Any]:
            session_id = req.params["session_id"]
            game = self.session_manager.get(session_id)
            view = game.to_dict()
            view["events"] = self.session_manager.events_for(session_id)
            return 200, view
