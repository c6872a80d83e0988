"""Seance game engine: a pure finite state machine over light cues.

Sessions advance only through apply_event, which returns a new session plus
the cues to show; nothing here touches the network or the clock, so the
whole flow is replayable from (seed, event sequence) alone. Answers come
from a deterministic fair coin keyed on the session seed and question index.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, FrozenSet, Optional

from .model import Cue, LightState

ANSWER_HOLD_MS = 4000
DEFAULT_GESTURES: FrozenSet[str] = frozenset({"TPose"})


class Phase(str, Enum):
    CREATED = "Created"
    AMBIANCE = "Ambiance"
    LISTENING = "Listening"
    ANSWERING = "Answering"
    ENDED = "Ended"


class EventKind(str, Enum):
    START = "Start"
    GESTURE_DETECTED = "GestureDetected"
    QUESTION_ASKED = "QuestionAsked"
    ANSWER_HOLD_ELAPSED = "AnswerHoldElapsed"
    END = "End"


class Answer(str, Enum):
    YES = "Yes"
    NO = "No"


class InvalidTransitionError(Exception):
    """The event is not legal in the session's current phase."""

    def __init__(self, phase: Phase, kind: EventKind):
        self.phase = phase
        self.kind = kind
        super().__init__(f"event {kind.value} not allowed in phase {phase.value}")


class UnknownGestureError(Exception):
    """A gesture outside the session's configured gesture set."""

    def __init__(self, gesture_id: Optional[str]):
        self.gesture_id = gesture_id
        super().__init__(f"unknown gesture: {gesture_id!r}")


@dataclass(frozen=True)
class GameEvent:
    kind: EventKind
    gesture_id: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value}
        if self.gesture_id is not None:
            out["gesture_id"] = self.gesture_id
        return out


@dataclass(frozen=True)
class GameSession:
    """One running seance, bound to a paired device code.

    ``baseline`` is the light state captured when the session was created;
    Restore brings the room back to it. ``question_index`` counts accepted
    questions and doubles as the draw index, so replaying the same seed and
    events always yields the same answers.
    """

    session_id: str
    code: str
    answer_seed: int
    baseline: LightState
    phase: Phase = Phase.CREATED
    question_index: int = 0
    pending_answer: Optional[Answer] = None
    answer_hold_ms: int = ANSWER_HOLD_MS
    gestures: FrozenSet[str] = DEFAULT_GESTURES

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "code": self.code,
            "phase": self.phase.value,
            "question_index": self.question_index,
            "pending_answer": (
                self.pending_answer.value if self.pending_answer else None
            ),
            "answer_hold_ms": self.answer_hold_ms,
            "baseline": self.baseline.to_dict(),
        }


def draw_answer(seed: int, index: int) -> Answer:
    """Deterministic fair coin for question ``index`` under ``seed``.

    Hashes rather than a stateful RNG so the draw for any index is stable
    regardless of platform, interpreter version, or call order.
    """
    digest = hashlib.sha256(f"{seed}:{index}".encode("ascii")).digest()
    return Answer.YES if digest[0] % 2 == 0 else Answer.NO


def answer_cue(answer: Answer) -> Cue:
    """Green means yes, red means no."""
    return Cue.ANSWER_YES if answer is Answer.YES else Cue.ANSWER_NO


def apply_event(
    session: GameSession, event: GameEvent
) -> tuple[GameSession, list[Cue]]:
    """Advance the session by one event.

    Returns the successor session and the cues to show, in order. Illegal
    events raise InvalidTransitionError (or UnknownGestureError for a
    gesture outside the configured set) and imply no cues and no change.
    """
    phase, kind = session.phase, event.kind

    if phase is Phase.ENDED:
        raise InvalidTransitionError(phase, kind)

    if kind is EventKind.END:
        return replace(session, phase=Phase.ENDED, pending_answer=None), [Cue.RESTORE]

    if phase is Phase.CREATED and kind is EventKind.START:
        return replace(session, phase=Phase.AMBIANCE), [Cue.SPOOKY_AMBIANCE]

    if phase is Phase.AMBIANCE and kind is EventKind.GESTURE_DETECTED:
        if event.gesture_id not in session.gestures:
            raise UnknownGestureError(event.gesture_id)
        return replace(session, phase=Phase.LISTENING), [Cue.LISTENING]

    if phase is Phase.LISTENING and kind is EventKind.QUESTION_ASKED:
        answer = draw_answer(session.answer_seed, session.question_index)
        successor = replace(
            session,
            phase=Phase.ANSWERING,
            pending_answer=answer,
            question_index=session.question_index + 1,
        )
        return successor, [answer_cue(answer)]

    if phase is Phase.ANSWERING and kind is EventKind.ANSWER_HOLD_ELAPSED:
        return (
            replace(session, phase=Phase.LISTENING, pending_answer=None),
            [Cue.LISTENING],
        )

    raise InvalidTransitionError(phase, kind)
