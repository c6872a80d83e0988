"""Session manager: live game sessions wired to the device registry.

Wraps the pure game engine with the runtime concerns the bridge owns:
per-session serialization, the answer-hold timer, the session event log,
and turning every emitted cue into a set_desired write before the caller
sees a response. Sessions live in memory only; the registry is the sole
persistent state.
"""

from __future__ import annotations

import json
import logging
import secrets
import threading
import time
import uuid
from typing import Any, Callable, Optional

from .game import (
    ANSWER_HOLD_MS,
    DEFAULT_GESTURES,
    EventKind,
    GameEvent,
    GameSession,
    Phase,
    apply_event,
)
from .model import Cue, cue_to_state
from .registry import DeviceRegistry

log = logging.getLogger(__name__)


class UnknownSessionError(Exception):
    """No session with that id."""


class _Managed:
    """A session plus its lock, timer slot, and event log."""

    def __init__(self, game: GameSession):
        self.game = game
        self.lock = threading.RLock()
        self.timer: Optional[threading.Timer] = None
        self.generation = 0
        self.events: list[dict[str, Any]] = []


class SessionManager:
    """Creates sessions and applies events, one at a time per session.

    A threading.Timer is armed each time a session enters Answering and
    fires AnswerHoldElapsed exactly once: every applied event bumps the
    session's generation counter and cancels the outstanding timer, and a
    stale timer that already raced past cancel() finds the generation
    changed and does nothing. Sessions created with answer_hold_ms=0 get
    no timer at all; the client sends AnswerHoldElapsed itself.
    """

    def __init__(
        self,
        registry: DeviceRegistry,
        log_path: Optional[str] = None,
        now_fn: Callable[[], float] = time.time,
    ):
        self.registry = registry
        self.log_path = log_path
        self.now_fn = now_fn
        self._sessions: dict[str, _Managed] = {}
        self._lock = threading.Lock()
        self._log_lock = threading.Lock()

    # -- lifecycle ----------------------------------------------------------

    def create(
        self,
        code: str,
        seed: Optional[int] = None,
        answer_hold_ms: Optional[int] = None,
        gestures: Optional[frozenset[str]] = None,
    ) -> GameSession:
        """Open a session against a paired code.

        The baseline captured here is what Restore will bring back: the
        bulb's reported state, or the current desired state if the cloud
        has not confirmed anything yet.
        """
        record = self.registry.get_record(code)
        baseline = record.reported if record.reported else record.desired
        game = GameSession(
            session_id=uuid.uuid4().hex,
            code=code,
            answer_seed=seed if seed is not None else secrets.randbelow(2**31),
            baseline=baseline,
            answer_hold_ms=(
                answer_hold_ms if answer_hold_ms is not None else ANSWER_HOLD_MS
            ),
            gestures=gestures if gestures is not None else DEFAULT_GESTURES,
        )
        with self._lock:
            self._sessions[game.session_id] = _Managed(game)
        return game

    def _managed(self, session_id: str) -> _Managed:
        with self._lock:
            managed = self._sessions.get(session_id)
        if managed is None:
            raise UnknownSessionError(f"no session {session_id}")
        return managed

    def get(self, session_id: str) -> GameSession:
        return self._managed(session_id).game

    def events_for(self, session_id: str) -> list[dict[str, Any]]:
        managed = self._managed(session_id)
        with managed.lock:
            return list(managed.events)

    # -- event application --------------------------------------------------

    def apply(
        self, session_id: str, event: GameEvent
    ) -> tuple[GameSession, list[Cue]]:
        managed = self._managed(session_id)
        with managed.lock:
            return self._apply_locked(managed, event)

    def _apply_locked(
        self, managed: _Managed, event: GameEvent
    ) -> tuple[GameSession, list[Cue]]:
        successor, cues = apply_event(managed.game, event)
        managed.game = successor

        # Any accepted event invalidates the outstanding hold timer.
        managed.generation += 1
        if managed.timer is not None:
            managed.timer.cancel()
            managed.timer = None

        # Cues become registry intents before the caller gets its response;
        # the reconciler takes it from there.
        for cue in cues:
            state = cue_to_state(cue, successor.baseline)
            self.registry.set_desired(successor.code, state)

        self._record(managed, event, cues)

        if successor.phase is Phase.ANSWERING and successor.answer_hold_ms > 0:
            self._arm_timer(managed)
        return successor, cues

    def _arm_timer(self, managed: _Managed) -> None:
        session_id = managed.game.session_id
        generation = managed.generation
        delay_s = managed.game.answer_hold_ms / 1000.0
        timer = threading.Timer(delay_s, self._fire_hold, (session_id, generation))
        timer.daemon = True
        managed.timer = timer
        timer.start()

    def _fire_hold(self, session_id: str, generation: int) -> None:
        try:
            managed = self._managed(session_id)
        except UnknownSessionError:
            return
        with managed.lock:
            if managed.generation != generation:
                return  # another event won the race; hold is moot
            if managed.game.phase is not Phase.ANSWERING:
                return
            try:
                self._apply_locked(managed, GameEvent(EventKind.ANSWER_HOLD_ELAPSED))
            except Exception:
                log.exception("answer-hold timer failed for session %s", session_id)

    # -- event log ----------------------------------------------------------

    def _record(
        self, managed: _Managed, event: GameEvent, cues: list[Cue]
    ) -> None:
        entry = {
            "session_id": managed.game.session_id,
            "event": event.to_dict(),
            "phase": managed.game.phase.value,
            "cues": [cue.value for cue in cues],
            "timestamp": self.now_fn(),
        }
        managed.events.append(entry)
        if self.log_path:
            line = json.dumps(entry, separators=(",", ":"))
            with self._log_lock:
                try:
                    with open(self.log_path, "a", encoding="utf-8") as fh:
                        fh.write(line + "\n")
                except OSError as exc:
                    log.warning("session log write failed: %s", exc)

    def shutdown(self) -> None:
        """Cancel all outstanding timers."""
        with self._lock:
            managed_all = list(self._sessions.values())
        for managed in managed_all:
            with managed.lock:
                if managed.timer is not None:
                    managed.timer.cancel()
                    managed.timer = None
