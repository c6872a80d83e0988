"""Minimal threaded JSON-over-HTTP scaffold.

Both the vendor simulator and the bridge API are small JSON services with a
handful of routes, threaded handlers, and typed error mapping. This module
gives them a shared core on top of http.server so each stays focused on its
own semantics. Handlers run on one thread per request (ThreadingHTTPServer);
serialization beyond that is each app's business.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Optional
from urllib.parse import parse_qs, urlsplit

log = logging.getLogger(__name__)

Handler = Callable[["Request"], tuple[int, Any]]


class Request:
    """One parsed request: routed path params, JSON body, headers."""

    def __init__(
        self,
        method: str,
        path: str,
        params: dict[str, str],
        query: dict[str, list[str]],
        body: Any,
        headers: dict[str, str],
    ):
        self.method = method
        self.path = path
        self.params = params
        self.query = query
        self.body = body
        self.headers = headers

    def bearer_token(self) -> Optional[str]:
        auth = self.headers.get("authorization", "")
        if auth.lower().startswith("bearer "):
            return auth[7:].strip()
        return None


class BadRequestBody(Exception):
    """The request body was not the JSON the route expects."""


class JsonHttpApp:
    """Route table plus exception-to-response mapping."""

    name = "http"

    def __init__(self) -> None:
        self._routes: list[tuple[str, re.Pattern[str], Handler]] = []
        self.static_dir: Optional[str] = None

    def route(self, method: str, pattern: str) -> Callable[[Handler], Handler]:
        """Register a handler; pattern is a full-path regex with named groups."""
        compiled = re.compile(f"^{pattern}$")

        def register(fn: Handler) -> Handler:
            self._routes.append((method, compiled, fn))
            return fn

        return register

    def map_exception(self, exc: Exception) -> Optional[tuple[int, dict[str, Any]]]:
        """Translate a domain exception into (status, payload); None if unknown."""
        return None

    # -- dispatch -----------------------------------------------------------

    def handle(self, request: Request) -> tuple[int, Any]:
        path_matched = False
        for method, pattern, fn in self._routes:
            match = pattern.match(request.path)
            if not match:
                continue
            path_matched = True
            if method != request.method:
                continue
            request.params = match.groupdict()
            try:
                return fn(request)
            except BadRequestBody as exc:
                return 400, {"error": "bad_request", "message": str(exc)}
            except Exception as exc:
                mapped = self.map_exception(exc)
                if mapped is not None:
                    return mapped
                log.exception("unhandled error in %s %s", request.method, request.path)
                return 500, {"error": "internal_error", "message": str(exc)}
        if path_matched:
            return 405, {"error": "method_not_allowed", "message": request.method}
        return 404, {"error": "not_found", "message": request.path}


def require_object(request: Request) -> dict[str, Any]:
    """The route needs a JSON object body; anything else is a 400."""
    if not isinstance(request.body, dict):
        raise BadRequestBody("expected a JSON object body")
    return request.body


class _RequestHandler(BaseHTTPRequestHandler):
    app: JsonHttpApp  # set by HttpServer
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args: Any) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)

    def _read_body(self) -> Any:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return None
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except (UnicodeDecodeError, json.JSONDecodeError):
            return _MALFORMED

    def _send_json(self, status: int, payload: Any) -> None:
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _serve_static(self) -> bool:
        root = self.app.static_dir
        if root is None or self.command != "GET":
            return False
        rel = urlsplit(self.path).path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(root, rel))
        if not full.startswith(os.path.realpath(root) + os.sep) and full != os.path.realpath(root):
            return False
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            return False
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)
        return True

    def _dispatch(self) -> None:
        started = time.monotonic()
        parts = urlsplit(self.path)
        body = self._read_body()
        if body is _MALFORMED:
            self._send_json(400, {"error": "bad_request", "message": "malformed JSON"})
            return
        request = Request(
            method=self.command,
            path=parts.path,
            params={},
            query=parse_qs(parts.query),
            body=body,
            headers={k.lower(): v for k, v in self.headers.items()},
        )
        status, payload = self.app.handle(request)
        if status == 404 and self._serve_static():
            return
        self._send_json(status, payload)
        elapsed_ms = int((time.monotonic() - started) * 1000)
        logging.getLogger(f"lightbridge.{self.app.name}").info(
            "request method=%s path=%s status=%d elapsed_ms=%d",
            self.command,
            parts.path,
            status,
            elapsed_ms,
        )

    do_GET = do_POST = do_PUT = do_DELETE = _dispatch


_MALFORMED = object()


class HttpServer:
    """A JsonHttpApp bound to a port, served from a background thread."""

    def __init__(self, app: JsonHttpApp, host: str = "127.0.0.1", port: int = 0):
        handler = type("BoundHandler", (_RequestHandler,), {"app": app})
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._httpd.daemon_threads = True
        self._thread: Optional[threading.Thread] = None
        self.host = host

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self) -> "HttpServer":
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="http-server", daemon=True
        )
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
