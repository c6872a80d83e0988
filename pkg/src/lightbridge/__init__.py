"""lightbridge: drive smart color bulbs from a co-located guessing game.

A pairing service hands out 5-digit codes for bulbs, a reconciler keeps each
bulb converged on its desired state through a vendor cloud, and a small game
engine turns seance events into light cues. See README.md for the tour.
"""

from .model import (
    Cue,
    CueRole,
    DeviceRecord,
    DeviceStatus,
    LightState,
    OutOfRangeError,
    cue_to_state,
    validate_state,
)
from .game import Answer, EventKind, GameEvent, GameSession, Phase, apply_event, draw_answer
from .registry import CodeGenerator, DeviceRegistry
from .reconciler import Reconciler, ReconcilerConfig

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "CodeGenerator",
    "Cue",
    "CueRole",
    "DeviceRecord",
    "DeviceRegistry",
    "DeviceStatus",
    "EventKind",
    "GameEvent",
    "GameSession",
    "LightState",
    "OutOfRangeError",
    "Phase",
    "Reconciler",
    "ReconcilerConfig",
    "apply_event",
    "cue_to_state",
    "draw_answer",
    "validate_state",
    "__version__",
]
