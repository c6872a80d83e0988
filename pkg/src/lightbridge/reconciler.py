"""Reconciliation loop: pushes desired light state to the vendor cloud.

The loop polls the registry for dirty records (desired ahead of reported)
and pushes each one with bounded retries and exponential backoff. The write
rule is last-writer-wins: the desired revision is read once at the start of
a record's cycle and only that revision is confirmed, so an intent that
lands mid-push simply leaves the record dirty for the next cycle.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

from .registry import DeviceRegistry, RegistryError, RevokedCodeError, UnknownCodeError
from .vendor import SessionCache, VendorClient, VendorError
from .model import DeviceRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReconcilerConfig:
    """Timing knobs; defaults suit a desk-scale demo."""

    poll_interval_ms: int = 250
    retry_backoff_ms: int = 100
    backoff_multiplier: float = 2.0
    backoff_cap_ms: int = 5000
    max_retries_per_cycle: int = 3


class Outcome(str, Enum):
    NOOP = "noop"
    CONVERGED = "converged"
    FAILED = "failed"


@dataclass(frozen=True)
class ReconcileResult:
    outcome: Outcome
    code: str
    revision: Optional[int] = None
    error: Optional[str] = None
    attempts: int = 0
    elapsed_ms: int = 0


class Reconciler:
    """Owns the poll loop and the per-record push protocol."""

    def __init__(
        self,
        registry: DeviceRegistry,
        vendor: VendorClient,
        sessions: SessionCache,
        config: Optional[ReconcilerConfig] = None,
        sleep_fn: Callable[[float], None] = time.sleep,
    ):
        self.registry = registry
        self.vendor = vendor
        self.sessions = sessions
        self.config = config if config is not None else ReconcilerConfig()
        self.sleep_fn = sleep_fn
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    # -- single record ------------------------------------------------------

    def reconcile_once(self, record: Union[DeviceRecord, str]) -> ReconcileResult:
        """Push one record toward its desired state.

        Re-reads the record first so the freshest desired revision wins, and
        makes zero vendor calls when the revisions already match. On success
        the registry's reported side is confirmed at exactly the revision
        read here; on retry exhaustion the record is left untouched for the
        next cycle.
        """
        code = record if isinstance(record, str) else record.code
        started = time.monotonic()

        def done(
            outcome: Outcome,
            revision: Optional[int] = None,
            error: Optional[str] = None,
            attempts: int = 0,
        ) -> ReconcileResult:
            result = ReconcileResult(
                outcome=outcome,
                code=code,
                revision=revision,
                error=error,
                attempts=attempts,
                elapsed_ms=int((time.monotonic() - started) * 1000),
            )
            log.info(
                "reconcile code=%s revision=%s outcome=%s error=%s attempts=%d elapsed_ms=%d",
                result.code,
                result.revision,
                result.outcome.value,
                result.error,
                result.attempts,
                result.elapsed_ms,
            )
            return result

        try:
            fresh = self.registry.get_record(code)
        except RegistryError as exc:
            return done(Outcome.FAILED, error=type(exc).__name__)
        if fresh.desired_revision == fresh.reported_revision:
            return done(Outcome.NOOP, revision=fresh.reported_revision)

        # Freeze the target for this cycle; later writes stay dirty.
        target_state = fresh.desired
        target_revision = fresh.desired_revision

        session = self.sessions.get(fresh.vendor_account)
        if session is None:
            return done(Outcome.FAILED, error="no_session", attempts=0)

        backoff_ms = self.config.retry_backoff_ms
        last_error = "unknown"
        for attempt in range(1, self.config.max_retries_per_cycle + 1):
            try:
                self.vendor.set_state(session, fresh.vendor_device_id, target_state)
            except VendorError as exc:
                last_error = exc.wire_code
                if attempt < self.config.max_retries_per_cycle:
                    self.sleep_fn(backoff_ms / 1000.0)
                    backoff_ms = min(
                        int(backoff_ms * self.config.backoff_multiplier),
                        self.config.backoff_cap_ms,
                    )
                continue
            try:
                self.registry.confirm_reported(code, target_state, target_revision)
            except (RevokedCodeError, UnknownCodeError) as exc:
                return done(Outcome.FAILED, error=type(exc).__name__, attempts=attempt)
            return done(Outcome.CONVERGED, revision=target_revision, attempts=attempt)
        return done(
            Outcome.FAILED,
            error=last_error,
            attempts=self.config.max_retries_per_cycle,
        )

    # -- loop ---------------------------------------------------------------

    def run_cycle(self) -> list[ReconcileResult]:
        """One pass over every dirty record; stop is honored between records."""
        results = []
        for record in self.registry.list_dirty():
            if self._stop.is_set():
                break
            results.append(self.reconcile_once(record))
        return results

    def run_loop(self) -> None:
        """Poll until stopped. The record in flight always completes."""
        interval_s = self.config.poll_interval_ms / 1000.0
        while not self._stop.is_set():
            self.run_cycle()
            self._stop.wait(interval_s)

    def start(self) -> "Reconciler":
        self._stop.clear()
        self._thread = threading.Thread(
            target=self.run_loop, name="reconciler", daemon=True
        )
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=10)
            self._thread = None
