"""Reconciler: retries, backoff, last-writer-wins, loop behavior."""

from __future__ import annotations

import time

from conftest import make_sim, wait_until
from lightbridge.model import LightState
from lightbridge.reconciler import Outcome, Reconciler, ReconcilerConfig
from lightbridge.registry import CodeGenerator, DeviceRegistry
from lightbridge.simulator import LocalVendorClient
from lightbridge.vendor import (
    SessionCache,
    TransientFailureError,
    VendorClient,
    VendorSession,
)

GREEN = LightState(power=True, hue=120, saturation=100, brightness=100)
BLUE = LightState(power=True, hue=240, saturation=100, brightness=60)
WHITE = LightState(power=True, hue=0, saturation=0, brightness=100)


class ScriptedVendor(VendorClient):
    """Fails the first N set calls, then succeeds; records everything."""

    def __init__(self, fail_first: int = 0, on_set=None):
        self.fail_remaining = fail_first
        self.on_set = on_set
        self.set_calls: list[tuple[str, LightState]] = []

    def login(self, username, password):
        return VendorSession("tok", username, time.time() + 3600)

    def list_devices(self, session):
        return []

    def get_state(self, session, device_id):
        raise NotImplementedError

    def set_state(self, session, device_id, state):
        self.set_calls.append((device_id, state))
        if self.on_set is not None:
            hook, self.on_set = self.on_set, None
            hook()
        if self.fail_remaining > 0:
            self.fail_remaining -= 1
            raise TransientFailureError("scripted")


class Env:
    def __init__(self, vendor: VendorClient, config: ReconcilerConfig = None):
        self.registry = DeviceRegistry(code_generator=CodeGenerator(seed=1))
        self.record = self.registry.register_device("demo", "bulb-1", "Desk", GREEN)
        self.cache = SessionCache()
        self.cache.put(VendorSession("tok", "demo", time.time() + 3600))
        self.sleeps: list[float] = []
        self.reconciler = Reconciler(
            self.registry,
            vendor,
            self.cache,
            config=config if config is not None else ReconcilerConfig(),
            sleep_fn=self.sleeps.append,
        )


# ---------------------------------------------------------------------------
# reconcile_once
# ---------------------------------------------------------------------------

def test_in_sync_record_is_noop_with_zero_vendor_calls():
    vendor = ScriptedVendor()
    env = Env(vendor)
    result = env.reconciler.reconcile_once(env.record)
    assert result.outcome is Outcome.NOOP
    assert vendor.set_calls == []


def test_dirty_record_converges_first_attempt():
    vendor = ScriptedVendor()
    env = Env(vendor)
    env.registry.set_desired(env.record.code, BLUE)
    result = env.reconciler.reconcile_once(env.record.code)
    assert result.outcome is Outcome.CONVERGED
    assert (result.revision, result.attempts) == (1, 1)
    fresh = env.registry.get_record(env.record.code)
    assert fresh.reported == BLUE and fresh.in_sync
    assert fresh.last_reconciled_at is not None
    assert vendor.set_calls == [("bulb-1", BLUE)]


def test_transient_failures_retry_with_exponential_backoff():
    vendor = ScriptedVendor(fail_first=2)
    env = Env(vendor)
    env.registry.set_desired(env.record.code, BLUE)
    result = env.reconciler.reconcile_once(env.record.code)
    assert result.outcome is Outcome.CONVERGED
    assert result.attempts == 3
    assert env.sleeps == [0.1, 0.2]  # 100ms doubling between attempts


def test_backoff_is_capped():
    vendor = ScriptedVendor(fail_first=3)
    env = Env(
        vendor,
        ReconcilerConfig(
            retry_backoff_ms=4000,
            backoff_cap_ms=5000,
            max_retries_per_cycle=4,
        ),
    )
    env.registry.set_desired(env.record.code, BLUE)
    result = env.reconciler.reconcile_once(env.record.code)
    assert result.outcome is Outcome.CONVERGED
    assert env.sleeps == [4.0, 5.0, 5.0]


def test_retry_exhaustion_fails_cycle_and_leaves_record_dirty():
    vendor = ScriptedVendor(fail_first=3)
    env = Env(vendor)
    env.registry.set_desired(env.record.code, BLUE)
    result = env.reconciler.reconcile_once(env.record.code)
    assert result.outcome is Outcome.FAILED
    assert result.error == "transient_failure"
    assert result.attempts == 3
    fresh = env.registry.get_record(env.record.code)
    assert fresh.reported == GREEN  # untouched by the failed cycle
    assert fresh.reported_revision == 0 and fresh.dirty

    # the next cycle picks the record up again and converges
    second = env.reconciler.reconcile_once(env.record.code)
    assert second.outcome is Outcome.CONVERGED
    assert env.registry.get_record(env.record.code).in_sync


def test_mid_push_write_keeps_record_dirty_until_next_cycle():
    registry = DeviceRegistry(code_generator=CodeGenerator(seed=4))
    record = registry.register_device("demo", "bulb-1", "Desk", GREEN)
    # a newer intent lands while the push for revision 1 is in flight
    vendor = ScriptedVendor(on_set=lambda: registry.set_desired(record.code, WHITE))
    cache = SessionCache()
    cache.put(VendorSession("tok", "demo", time.time() + 3600))
    reconciler = Reconciler(registry, vendor, cache, sleep_fn=lambda s: None)

    registry.set_desired(record.code, BLUE)
    result = reconciler.reconcile_once(record.code)
    assert result.outcome is Outcome.CONVERGED
    assert result.revision == 1

    fresh = registry.get_record(record.code)
    assert fresh.desired == WHITE and fresh.desired_revision == 2
    assert fresh.reported == BLUE and fresh.reported_revision == 1
    assert fresh.dirty  # the newer intent survives the older confirmation

    second = reconciler.reconcile_once(record.code)
    assert second.outcome is Outcome.CONVERGED and second.revision == 2
    assert registry.get_record(record.code).reported == WHITE


def test_missing_vendor_session_fails_cleanly():
    vendor = ScriptedVendor()
    env = Env(vendor)
    env.cache.drop("demo")
    env.registry.set_desired(env.record.code, BLUE)
    result = env.reconciler.reconcile_once(env.record.code)
    assert result.outcome is Outcome.FAILED
    assert result.error == "no_session"
    assert vendor.set_calls == []


def test_revoked_record_fails_without_vendor_calls():
    vendor = ScriptedVendor()
    env = Env(vendor)
    env.registry.set_desired(env.record.code, BLUE)
    env.registry.revoke(env.record.code)
    result = env.reconciler.reconcile_once(env.record.code)
    assert result.outcome is Outcome.FAILED
    assert result.error == "RevokedCodeError"
    assert vendor.set_calls == []


# ---------------------------------------------------------------------------
# The loop against the simulator
# ---------------------------------------------------------------------------

def loop_env(poll_ms: int = 20):
    sim = make_sim()
    vendor = LocalVendorClient(sim)
    registry = DeviceRegistry(code_generator=CodeGenerator(seed=3))
    cache = SessionCache()
    session = vendor.login("demo", "demo")
    cache.put(session)
    state = vendor.get_state(session, "bulb-1")
    record = registry.register_device("demo", "bulb-1", "Desk", state)
    reconciler = Reconciler(
        registry,
        vendor,
        cache,
        config=ReconcilerConfig(poll_interval_ms=poll_ms, retry_backoff_ms=5),
    )
    return sim, registry, record, reconciler


def test_loop_converges_new_intents():
    sim, registry, record, reconciler = loop_env()
    reconciler.start()
    try:
        registry.set_desired(record.code, BLUE)
        assert wait_until(lambda: registry.get_record(record.code).in_sync, 2.0)
        token = sim.login("demo", "demo").token
        assert sim.get_state(token, "bulb-1") == BLUE
    finally:
        reconciler.stop()


def test_loop_is_quiescent_when_clean():
    sim, registry, record, reconciler = loop_env(poll_ms=10)
    reconciler.start()
    try:
        registry.set_desired(record.code, BLUE)
        assert wait_until(lambda: registry.get_record(record.code).in_sync, 2.0)
        before = sim.stats()
        time.sleep(0.3)  # ~30 poll cycles
        after = sim.stats()
        assert after == before  # not a single vendor call while clean
    finally:
        reconciler.stop()


def test_loop_stops_promptly():
    _, registry, record, reconciler = loop_env(poll_ms=500)
    reconciler.start()
    started = time.monotonic()
    reconciler.stop()
    assert time.monotonic() - started < 2.0
    assert reconciler._thread is None
