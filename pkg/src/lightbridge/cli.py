"""Command line front end: run the servers, pair a bulb, play the seance.

Subcommands:

* ``bridge simulate``  vendor cloud simulator
* ``bridge serve``     bridge API plus reconciler
* ``bridge pair``      onboard a bulb, printing its 5-digit code
* ``bridge play``      interactive ritual driver against a paired code
* ``bridge set``       push a named color cue directly
* ``bridge get``       show desired/reported state and sync status

Exit codes: 0 success, 2 usage, 3 the bridge answered with an error,
4 the bridge could not be reached.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
import threading
import time
from typing import Any, Optional

import requests

from .model import CUE_STATES, Cue
from .reconciler import Reconciler, ReconcilerConfig
from .registry import DeviceRegistry
from .sessions import SessionManager
from .simulator import DEFAULT_LATENCY_MS, SimulatorApp, build_simulator
from .storage import AppendLogStore, MemoryStore
from .vendor import HttpVendorClient, SessionCache
from .webserver import HttpServer

DEFAULT_API_URL = "http://127.0.0.1:8080"
DEFAULT_VENDOR_URL = "http://127.0.0.1:9090"

EXIT_OK = 0
EXIT_API_ERROR = 3
EXIT_UNREACHABLE = 4

CUE_BY_COLOR = {
    "blue": Cue.SPOOKY_AMBIANCE,
    "white": Cue.LISTENING,
    "green": Cue.ANSWER_YES,
    "red": Cue.ANSWER_NO,
}


class ApiCallError(Exception):
    """The bridge replied with a documented error payload."""

    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        super().__init__(message)


class UnreachableError(Exception):
    """No bridge answered at the given URL."""


class BridgeClient:
    """Thin JSON client for the bridge API."""

    def __init__(self, base_url: str, timeout_s: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._http = requests.Session()

    def call(self, method: str, path: str, body: Optional[dict] = None) -> dict:
        try:
            resp = self._http.request(
                method, self.base_url + path, json=body, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise UnreachableError(f"cannot reach bridge at {self.base_url}: {exc}")
        try:
            payload = resp.json()
        except ValueError:
            raise ApiCallError(resp.status_code, "bad_response", resp.text[:200])
        if resp.status_code >= 400:
            raise ApiCallError(
                resp.status_code,
                payload.get("error", "unknown"),
                payload.get("message", ""),
            )
        return payload


# ---------------------------------------------------------------------------
# Server commands
# ---------------------------------------------------------------------------

def _wait_for_shutdown() -> threading.Event:
    stop = threading.Event()

    def handler(signum: int, frame: Any) -> None:
        stop.set()

    signal.signal(signal.SIGINT, handler)
    signal.signal(signal.SIGTERM, handler)
    return stop


def cmd_simulate(args: argparse.Namespace) -> int:
    sim = build_simulator(
        fixture_path=args.fixture,
        fault_seed=args.fault_seed,
        default_latency_ms=args.latency_ms,
    )
    server = HttpServer(SimulatorApp(sim), host=args.host, port=args.port)
    stop = _wait_for_shutdown()
    server.start()
    print(f"listening on {server.host}:{server.port}", flush=True)
    stop.wait()
    server.stop()
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    store = AppendLogStore(args.store) if args.store else MemoryStore()
    registry = DeviceRegistry(store=store)
    vendor = HttpVendorClient(args.vendor_url)
    session_cache = SessionCache()
    manager = SessionManager(registry, log_path=args.session_log)
    config = ReconcilerConfig(
        poll_interval_ms=args.poll_interval_ms,
        retry_backoff_ms=args.retry_backoff_ms,
        max_retries_per_cycle=args.max_retries,
    )
    reconciler = Reconciler(registry, vendor, session_cache, config=config)

    from .api import BridgeApp

    app = BridgeApp(
        registry, vendor, manager, session_cache, static_dir=args.static
    )
    server = HttpServer(app, host=args.host, port=args.port)
    stop = _wait_for_shutdown()
    reconciler.start()
    server.start()
    print(f"listening on {server.host}:{server.port}", flush=True)
    stop.wait()
    server.stop()
    reconciler.stop()
    manager.shutdown()
    store.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Client commands
# ---------------------------------------------------------------------------

def cmd_pair(args: argparse.Namespace) -> int:
    client = BridgeClient(args.api)
    result = client.call(
        "POST",
        "/api/pair",
        {
            "vendor_username": args.user,
            "vendor_password": args.password,
            "vendor_device_id": args.device,
        },
    )
    print(f"pairing code: {result['code']}")
    print(f"device: {result['alias']}")
    return EXIT_OK


def cmd_set(args: argparse.Namespace) -> int:
    client = BridgeClient(args.api)
    state = CUE_STATES[CUE_BY_COLOR[args.cue]]
    result = client.call(
        "PUT", f"/api/device/{args.code}/state", state.to_dict()
    )
    print(f"desired revision: {result['desired_revision']}")
    return EXIT_OK


def cmd_get(args: argparse.Namespace) -> int:
    client = BridgeClient(args.api)
    result = client.call("GET", f"/api/device/{args.code}/state")
    print(json.dumps(result, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# The play driver
# ---------------------------------------------------------------------------

PROMPTS = {
    "Created": "press enter to begin the seance (q to leave)",
    "Ambiance": "direct your partner to strike a T pose, then press enter (q to leave)",
    "Listening": "ask your yes-no question aloud, then press enter (q to leave)",
    "Answering": "press enter when the answer has sunk in (q to leave)",
}

EVENTS_BY_PHASE = {
    "Created": {"kind": "Start"},
    "Ambiance": {"kind": "GestureDetected", "gesture_id": "TPose"},
    "Listening": {"kind": "QuestionAsked"},
    "Answering": {"kind": "AnswerHoldElapsed"},
}

SYNC_WAIT_S = 5.0


def _say(text: str = "") -> None:
    print(text, flush=True)


def _wait_in_sync(client: BridgeClient, code: str) -> bool:
    deadline = time.monotonic() + SYNC_WAIT_S
    while time.monotonic() < deadline:
        state = client.call("GET", f"/api/device/{code}/state")
        if state["in_sync"]:
            return True
        time.sleep(0.025)
    return False


def _report_step(client: BridgeClient, code: str, phase: str, cues: list[str]) -> None:
    sync = "light in sync" if _wait_in_sync(client, code) else "light out of sync"
    cue_text = cues[0] if cues else "none"
    _say(f"> cue {cue_text} | phase {phase} | {sync}")
    if cue_text == "AnswerYes":
        _say("the spirits say YES (green)")
    elif cue_text == "AnswerNo":
        _say("the spirits say NO (red)")
    elif cue_text == "Listening":
        _say("the spirits are listening")


def cmd_play(args: argparse.Namespace) -> int:
    client = BridgeClient(args.api)
    body: dict[str, Any] = {"code": args.code}
    if args.seed is not None:
        body["seed"] = args.seed
    if args.test_mode:
        # The answer hold advances on keypress instead of a server timer,
        # which keeps scripted transcripts deterministic.
        body["answer_hold_ms"] = 0
    created = client.call("POST", "/api/session", body)
    session_id = created["session_id"]
    phase = created["phase"]

    _say("~ the spirits gather ~")
    while phase != "Ended":
        if phase == "Answering" and not args.test_mode:
            # The server's hold timer will move us back to Listening.
            phase = _await_hold(client, session_id, args.code)
            continue
        _say()
        _say(PROMPTS[phase])
        try:
            line = input()
        except EOFError:
            line = "q"
        event = {"kind": "End"} if line.strip().lower() == "q" else EVENTS_BY_PHASE[phase]
        result = client.call("POST", f"/api/session/{session_id}/event", event)
        phase = result["phase"]
        _report_step(client, args.code, phase, result["cues"])
    _say()
    _say("~ the spirits have departed ~")
    return EXIT_OK


def _await_hold(client: BridgeClient, session_id: str, code: str) -> str:
    deadline = time.monotonic() + 60
    while time.monotonic() < deadline:
        view = client.call("GET", f"/api/session/{session_id}")
        if view["phase"] != "Answering":
            events = view.get("events", [])
            cues = events[-1]["cues"] if events else []
            _report_step(client, code, view["phase"], cues)
            return view["phase"]
        time.sleep(0.1)
    _say("the spirits never moved on; giving up")
    return "Ended"


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="Drive smart color bulbs from a co-located guessing game.",
    )
    parser.add_argument(
        "--verbose", action="store_true", help="log at DEBUG instead of INFO"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the bridge API and reconciler")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--store", help="append-log store path (default: in-memory)")
    serve.add_argument("--vendor-url", default=DEFAULT_VENDOR_URL)
    serve.add_argument("--poll-interval-ms", type=int, default=250)
    serve.add_argument("--retry-backoff-ms", type=int, default=100)
    serve.add_argument("--max-retries", type=int, default=3)
    serve.add_argument("--static", help="directory of web console files to serve")
    serve.add_argument("--session-log", help="append session events as JSON lines")
    serve.set_defaults(func=cmd_serve)

    simulate = sub.add_parser("simulate", help="run the vendor cloud simulator")
    simulate.add_argument("--host", default="127.0.0.1")
    simulate.add_argument("--port", type=int, default=9090)
    simulate.add_argument("--fixture", help="accounts/devices JSON (default: demo)")
    simulate.add_argument("--fault-seed", type=int)
    simulate.add_argument("--latency-ms", type=int, default=DEFAULT_LATENCY_MS)
    simulate.set_defaults(func=cmd_simulate)

    pair = sub.add_parser("pair", help="onboard a bulb and print its code")
    pair.add_argument("--user", required=True)
    pair.add_argument("--pass", dest="password", required=True)
    pair.add_argument("--device", required=True)
    pair.add_argument("--api", default=DEFAULT_API_URL)
    pair.set_defaults(func=cmd_pair)

    play = sub.add_parser("play", help="run the interactive seance")
    play.add_argument("--code", required=True)
    play.add_argument("--seed", type=int)
    play.add_argument("--api", default=DEFAULT_API_URL)
    play.add_argument(
        "--test-mode",
        action="store_true",
        help="advance the answer hold on keypress for reproducible transcripts",
    )
    play.set_defaults(func=cmd_play)

    set_cmd = sub.add_parser("set", help="push a named color cue")
    set_cmd.add_argument("--code", required=True)
    set_cmd.add_argument("--cue", required=True, choices=sorted(CUE_BY_COLOR))
    set_cmd.add_argument("--api", default=DEFAULT_API_URL)
    set_cmd.set_defaults(func=cmd_set)

    get_cmd = sub.add_parser("get", help="show a device's state and sync status")
    get_cmd.add_argument("--code", required=True)
    get_cmd.add_argument("--api", default=DEFAULT_API_URL)
    get_cmd.set_defaults(func=cmd_get)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ApiCallError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_API_ERROR
    except UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
