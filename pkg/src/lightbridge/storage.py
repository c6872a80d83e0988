"""Key-value persistence for device records.

Two interchangeable backends: a dict for tests and a single-file append log
with periodic snapshot compaction for real runs. Values are JSON-serializable
dicts; keys are strings.

File format (documented contract):

* ``<path>`` is the append log, one JSON object per line:
  ``{"op": "put", "key": K, "value": {...}}`` or ``{"op": "delete", "key": K}``.
* ``<path>.snapshot`` holds the compacted view, one ``{"key": K, "value": {...}}``
  per line. Load order is snapshot first, then log replay; a torn final log
  line (crash mid-append) is skipped.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from typing import Any, Iterator, Optional

log = logging.getLogger(__name__)


class StoreError(Exception):
    """The backing store could not serve the request."""


class KeyValueStore:
    """Interface shared by the in-memory and file-backed stores."""

    def get(self, key: str) -> Optional[dict[str, Any]]:
        raise NotImplementedError

    def put(self, key: str, value: dict[str, Any]) -> None:
        raise NotImplementedError

    def delete(self, key: str) -> None:
        raise NotImplementedError

    def items(self) -> Iterator[tuple[str, dict[str, Any]]]:
        raise NotImplementedError

    def close(self) -> None:
        pass


class MemoryStore(KeyValueStore):
    """Dict-backed store; the default for tests and ad-hoc runs."""

    def __init__(self) -> None:
        self._data: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[dict[str, Any]]:
        with self._lock:
            value = self._data.get(key)
            return json.loads(json.dumps(value)) if value is not None else None

    def put(self, key: str, value: dict[str, Any]) -> None:
        with self._lock:
            # round-trip through JSON so callers cannot mutate stored state
            self._data[key] = json.loads(json.dumps(value))

    def delete(self, key: str) -> None:
        with self._lock:
            self._data.pop(key, None)

    def items(self) -> Iterator[tuple[str, dict[str, Any]]]:
        with self._lock:
            snapshot = {k: json.loads(json.dumps(v)) for k, v in self._data.items()}
        return iter(snapshot.items())


class AppendLogStore(KeyValueStore):
    """Single-file append log with snapshot compaction.

    Every mutation is appended and flushed before the call returns, so a
    crash loses at most the line being written. ``compact_threshold`` bounds
    log growth: after that many appends the current view is rewritten to the
    snapshot file and the log is truncated.
    """

    def __init__(self, path: str, compact_threshold: int = 1000):
        self.path = path
        self.snapshot_path = path + ".snapshot"
        self.compact_threshold = compact_threshold
        self._lock = threading.RLock()
        self._data: dict[str, dict[str, Any]] = {}
        self._appends_since_compact = 0
        try:
            self._load()
            self._log = open(self.path, "a", encoding="utf-8")
        except OSError as exc:
            raise StoreError(f"cannot open store at {path}: {exc}") from exc

    # -- loading ------------------------------------------------------------

    def _load(self) -> None:
        if os.path.exists(self.snapshot_path):
            with open(self.snapshot_path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    self._data[entry["key"]] = entry["value"]
        if os.path.exists(self.path):
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        entry = json.loads(line)
                    except json.JSONDecodeError:
                        log.warning("dropping torn log line in %s", self.path)
                        continue
                    if entry["op"] == "put":
                        self._data[entry["key"]] = entry["value"]
                    elif entry["op"] == "delete":
                        self._data.pop(entry["key"], None)

    # -- mutation -----------------------------------------------------------

    def _append(self, entry: dict[str, Any]) -> None:
        try:
            self._log.write(json.dumps(entry, separators=(",", ":")) + "\n")
            self._log.flush()
        except (OSError, ValueError) as exc:
            raise StoreError(f"append failed: {exc}") from exc
        self._appends_since_compact += 1
        if self._appends_since_compact >= self.compact_threshold:
            self._compact_locked()

    def get(self, key: str) -> Optional[dict[str, Any]]:
        with self._lock:
            value = self._data.get(key)
            return json.loads(json.dumps(value)) if value is not None else None

    def put(self, key: str, value: dict[str, Any]) -> None:
        with self._lock:
            value = json.loads(json.dumps(value))
            self._append({"op": "put", "key": key, "value": value})
            self._data[key] = value

    def delete(self, key: str) -> None:
        with self._lock:
            if key in self._data:
                self._append({"op": "delete", "key": key})
                del self._data[key]

    def items(self) -> Iterator[tuple[str, dict[str, Any]]]:
        with self._lock:
            snapshot = {k: json.loads(json.dumps(v)) for k, v in self._data.items()}
        return iter(snapshot.items())

    # -- compaction ---------------------------------------------------------

    def compact(self) -> None:
        """Fold the log into the snapshot file and truncate the log."""
        with self._lock:
            self._compact_locked()

    def _compact_locked(self) -> None:
        tmp = self.snapshot_path + ".tmp"
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                for key, value in self._data.items():
                    fh.write(
                        json.dumps(
                            {"key": key, "value": value}, separators=(",", ":")
                        )
                        + "\n"
                    )
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.snapshot_path)
            self._log.close()
            self._log = open(self.path, "w", encoding="utf-8")
            self._appends_since_compact = 0
        except OSError as exc:
            raise StoreError(f"compaction failed: {exc}") from exc

    def close(self) -> None:
        with self._lock:
            if not self._log.closed:
                self._compact_locked()
                self._log.close()
