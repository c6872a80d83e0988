"""Device registry: pairing-code allocation and desired/reported bookkeeping.

The registry is the single writer for device records. All operations take one
registry-wide lock, which at desk scale (tens of bulbs) is the simplest way to
make every operation linearizable per record: readers always see a complete
record, and concurrent set_desired calls serialize so no revision increment is
ever lost. Records are persisted write-through: the store is updated before
the in-memory view, and a store failure surfaces as StoreUnavailableError with
no partial effect.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import replace
from typing import Collection, Optional

from .model import (
    CODE_SPACE,
    SAFE_DEFAULT_STATE,
    DeviceRecord,
    DeviceStatus,
    LightState,
    format_code,
)
from .storage import KeyValueStore, MemoryStore, StoreError


class RegistryError(Exception):
    """Base class for registry failures."""


class UnknownCodeError(RegistryError):
    """No record exists for the given pairing code."""


class RevokedCodeError(RegistryError):
    """The pairing code exists but has been revoked."""


class CodeSpaceExhaustedError(RegistryError):
    """Could not draw an unused code within the attempt budget."""


class StoreUnavailableError(RegistryError):
    """The persistence backend rejected the operation."""


class CodeGenerator:
    """Draws 5-digit pairing codes uniformly, redrawing on collision.

    The RNG is injectable so tests can replay fixed draw sequences; by
    default a seedable ``random.Random`` is used. After ``max_attempts``
    collisions the generator gives up rather than spin on a nearly full
    code space.
    """

    def __init__(
        self,
        rng: Optional[random.Random] = None,
        seed: Optional[int] = None,
        max_attempts: int = 100,
    ):
        self.rng = rng if rng is not None else random.Random(seed)
        self.max_attempts = max_attempts

    def next_code(self, active: Collection[str]) -> str:
        if len(active) >= CODE_SPACE:
            raise CodeSpaceExhaustedError("all codes are in use")
        for _ in range(self.max_attempts):
            code = format_code(self.rng.randrange(CODE_SPACE))
            if code not in active:
                return code
        raise CodeSpaceExhaustedError(
            f"no unused code after {self.max_attempts} draws"
        )


class DeviceRegistry:
    """Authoritative map from pairing code to device record."""

    def __init__(
        self,
        store: Optional[KeyValueStore] = None,
        code_generator: Optional[CodeGenerator] = None,
    ):
        self.store = store if store is not None else MemoryStore()
        self.codes = code_generator if code_generator is not None else CodeGenerator()
        self._lock = threading.RLock()
        self._records: dict[str, DeviceRecord] = {}
        for key, value in self.store.items():
            self._records[key] = DeviceRecord.from_dict(value)

    # -- helpers ------------------------------------------------------------

    def _persist(self, record: DeviceRecord) -> None:
        try:
            self.store.put(record.code, record.to_dict())
        except StoreError as exc:
            raise StoreUnavailableError(str(exc)) from exc
        self._records[record.code] = record

    def _active_codes(self) -> set[str]:
        return {
            code
            for code, rec in self._records.items()
            if rec.status is DeviceStatus.ACTIVE
        }

    def _lookup(self, code: str) -> DeviceRecord:
        record = self._records.get(code)
        if record is None:
            raise UnknownCodeError(f"no device paired under code {code}")
        if record.status is DeviceStatus.REVOKED:
            raise RevokedCodeError(f"code {code} has been revoked")
        return record

    # -- operations ---------------------------------------------------------

    def register_device(
        self,
        vendor_account: str,
        vendor_device_id: str,
        alias: str,
        initial_reported: Optional[LightState] = None,
    ) -> DeviceRecord:
        """Onboard a bulb under a fresh pairing code.

        The initial desired state mirrors what the bulb already reports (or
        a safe default when unknown) at revision 0, so registration never
        moves the light.
        """
        if not vendor_device_id:
            raise ValueError("vendor_device_id must be nonempty")
        with self._lock:
            code = self.codes.next_code(self._active_codes())
            desired = initial_reported if initial_reported else SAFE_DEFAULT_STATE
            record = DeviceRecord(
                code=code,
                vendor_device_id=vendor_device_id,
                vendor_account=vendor_account,
                alias=alias,
                desired=desired,
                desired_revision=0,
                reported=initial_reported,
                reported_revision=0,
                created_at=time.time(),
            )
            self._persist(record)
            return record

    def set_desired(self, code: str, state: LightState) -> int:
        """Record a new intent for the bulb; returns the new desired revision.

        Every call bumps the revision by exactly one, even when the state
        value is unchanged: revisions count intents, not diffs.
        """
        with self._lock:
            record = self._lookup(code)
            updated = replace(
                record, desired=state, desired_revision=record.desired_revision + 1
            )
            self._persist(updated)
            return updated.desired_revision

    def get_record(self, code: str) -> DeviceRecord:
        with self._lock:
            return self._lookup(code)

    def revoke(self, code: str) -> None:
        """Retire a code. Revoked codes are free for reuse by registration."""
        with self._lock:
            record = self._records.get(code)
            if record is None:
                raise UnknownCodeError(f"no device paired under code {code}")
            if record.status is DeviceStatus.REVOKED:
                return
            self._persist(replace(record, status=DeviceStatus.REVOKED))

    def list_dirty(self) -> list[DeviceRecord]:
        """Active records whose desired revision is ahead of reported."""
        with self._lock:
            dirty = [
                rec
                for rec in self._records.values()
                if rec.status is DeviceStatus.ACTIVE and rec.dirty
            ]
        return sorted(dirty, key=lambda rec: rec.code)

    def list_records(self) -> list[DeviceRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda rec: rec.code)

    def confirm_reported(
        self, code: str, state: LightState, revision: int
    ) -> DeviceRecord:
        """Reconciler write path: the cloud acknowledged ``state`` at ``revision``.

        ``revision`` must be one the caller actually read from this record;
        confirmations for revisions the record never issued are rejected, and
        stale confirmations (older than what is already reported) are ignored
        so reported_revision stays monotonic.
        """
        with self._lock:
            record = self._lookup(code)
            if revision > record.desired_revision:
                raise ValueError(
                    f"cannot confirm revision {revision}: "
                    f"desired is at {record.desired_revision}"
                )
            if revision < record.reported_revision:
                return record
            updated = replace(
                record,
                reported=state,
                reported_revision=revision,
                last_reconciled_at=time.time(),
            )
            self._persist(updated)
            return updated
