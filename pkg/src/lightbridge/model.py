"""Core domain types: pairing codes, light state, cues, and device records.

Everything here is plain data with no I/O so the other modules (registry,
reconciler, game engine, HTTP layers) can share one vocabulary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Optional

# ---------------------------------------------------------------------------
# Pairing codes
# ---------------------------------------------------------------------------

CODE_SPACE = 100_000  # codes are 00000..99999
_CODE_RE = re.compile(r"^[0-9]{5}$")


def format_code(n: int) -> str:
    """Render an integer draw as a 5-digit code, leading zeros kept."""
    if not 0 <= n < CODE_SPACE:
        raise ValueError(f"code draw out of range: {n}")
    return f"{n:05d}"


def is_valid_code(code: str) -> bool:
    """True when code is exactly five ASCII digits."""
    return isinstance(code, str) and bool(_CODE_RE.match(code))


# ---------------------------------------------------------------------------
# Light state
# ---------------------------------------------------------------------------

# Allowed integer ranges; hue's upper bound is exclusive.
_RANGES = {
    "hue": (0, 360, "[0, 360)"),
    "saturation": (0, 101, "[0, 100]"),
    "brightness": (0, 101, "[0, 100]"),
}

STATE_FIELDS = ("power", "hue", "saturation", "brightness")


class OutOfRangeError(ValueError):
    """Raised when a candidate light state violates the field contract.

    ``violations`` lists every offending field, not just the first, as
    ``{"field": name, "value": value, "allowed": description}`` dicts.
    """

    def __init__(self, violations: list[dict[str, Any]]):
        self.violations = violations
        detail = "; ".join(
            f"{v['field']}={v['value']!r} not in {v['allowed']}" for v in violations
        )
        super().__init__(f"light state out of range: {detail}")


def _is_int(value: Any) -> bool:
    # bool is an int subclass; a hue of True is not acceptable
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class LightState:
    """A bulb's color state. Fields are retained even while power is off."""

    power: bool
    hue: int
    saturation: int
    brightness: int

    def __post_init__(self) -> None:
        bad = _collect_violations(
            {
                "power": self.power,
                "hue": self.hue,
                "saturation": self.saturation,
                "brightness": self.brightness,
            }
        )
        if bad:
            raise OutOfRangeError(bad)

    def to_dict(self) -> dict[str, Any]:
        """Canonical wire shape: exactly power/hue/saturation/brightness."""
        return {
            "power": self.power,
            "hue": self.hue,
            "saturation": self.saturation,
            "brightness": self.brightness,
        }


def _collect_violations(fields: Mapping[str, Any]) -> list[dict[str, Any]]:
    violations: list[dict[str, Any]] = []
    power = fields.get("power")
    if not isinstance(power, bool):
        violations.append({"field": "power", "value": power, "allowed": "true|false"})
    for name, (lo, hi, desc) in _RANGES.items():
        value = fields.get(name)
        if not _is_int(value) or not lo <= value < hi:
            violations.append({"field": name, "value": value, "allowed": desc})
    return violations


def validate_state(raw: Any) -> LightState:
    """Check a raw mapping against the light state contract.

    Returns the parsed LightState, or raises OutOfRangeError listing every
    violated field. Unknown and missing keys count as violations too; the
    wire shape admits no extras.
    """
    if not isinstance(raw, Mapping):
        raise OutOfRangeError(
            [{"field": "<body>", "value": raw, "allowed": "JSON object"}]
        )
    violations = [
        {"field": key, "value": raw[key], "allowed": "no such field"}
        for key in raw
        if key not in STATE_FIELDS
    ]
    violations.extend(_collect_violations(raw))
    if violations:
        raise OutOfRangeError(violations)
    return LightState(
        power=raw["power"],
        hue=raw["hue"],
        saturation=raw["saturation"],
        brightness=raw["brightness"],
    )


# ---------------------------------------------------------------------------
# Cues
# ---------------------------------------------------------------------------

class CueRole(str, Enum):
    """What a cue is for; drives nothing, but keeps intent auditable."""

    AMBIANCE = "Ambiance"
    INFORMATION = "Information"
    HOUSEKEEPING = "Housekeeping"


class Cue(str, Enum):
    """Named light cues emitted by the game engine."""

    SPOOKY_AMBIANCE = "SpookyAmbiance"
    LISTENING = "Listening"
    ANSWER_YES = "AnswerYes"
    ANSWER_NO = "AnswerNo"
    RESTORE = "Restore"

    @property
    def role(self) -> CueRole:
        return _CUE_ROLES[self]


_CUE_ROLES = {
    Cue.SPOOKY_AMBIANCE: CueRole.AMBIANCE,
    Cue.LISTENING: CueRole.INFORMATION,
    Cue.ANSWER_YES: CueRole.INFORMATION,
    Cue.ANSWER_NO: CueRole.INFORMATION,
    Cue.RESTORE: CueRole.HOUSEKEEPING,
}

# Fixed color language of the seance: blue ambiance, white while listening,
# green for yes, red for no. Power is always on while a cue is showing.
CUE_STATES = {
    Cue.SPOOKY_AMBIANCE: LightState(power=True, hue=240, saturation=100, brightness=60),
    Cue.LISTENING: LightState(power=True, hue=0, saturation=0, brightness=100),
    Cue.ANSWER_YES: LightState(power=True, hue=120, saturation=100, brightness=100),
    Cue.ANSWER_NO: LightState(power=True, hue=0, saturation=100, brightness=100),
}


def cue_to_state(cue: Cue, session_baseline: LightState) -> LightState:
    """Map a cue to the concrete light state it should show.

    Total and deterministic: every cue maps to exactly one state. Restore
    returns the session baseline unchanged so the room ends as it began.
    """
    if cue is Cue.RESTORE:
        return session_baseline
    return CUE_STATES[cue]


# ---------------------------------------------------------------------------
# Device records
# ---------------------------------------------------------------------------

class DeviceStatus(str, Enum):
    ACTIVE = "Active"
    REVOKED = "Revoked"


@dataclass(frozen=True)
class DeviceRecord:
    """One onboarded bulb, addressed by its pairing code.

    ``desired`` is what the bridge wants the bulb to show and
    ``reported`` is what the vendor cloud last acknowledged; the revision
    pair tracks convergence (in sync exactly when the revisions match).
    ``reported`` is None until the cloud has confirmed anything.
    """

    code: str
    vendor_device_id: str
    vendor_account: str
    alias: str
    desired: LightState
    desired_revision: int
    reported: Optional[LightState]
    reported_revision: int
    created_at: float
    last_reconciled_at: Optional[float] = None
    status: DeviceStatus = DeviceStatus.ACTIVE

    @property
    def in_sync(self) -> bool:
        return self.desired_revision == self.reported_revision

    @property
    def dirty(self) -> bool:
        return self.desired_revision > self.reported_revision

    def to_dict(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "vendor_device_id": self.vendor_device_id,
            "vendor_account": self.vendor_account,
            "alias": self.alias,
            "desired": self.desired.to_dict(),
            "desired_revision": self.desired_revision,
            "reported": self.reported.to_dict() if self.reported else None,
            "reported_revision": self.reported_revision,
            "created_at": self.created_at,
            "last_reconciled_at": self.last_reconciled_at,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "DeviceRecord":
        return cls(
            code=raw["code"],
            vendor_device_id=raw["vendor_device_id"],
            vendor_account=raw["vendor_account"],
            alias=raw["alias"],
            desired=validate_state(raw["desired"]),
            desired_revision=raw["desired_revision"],
            reported=validate_state(raw["reported"]) if raw["reported"] else None,
            reported_revision=raw["reported_revision"],
            created_at=raw["created_at"],
            last_reconciled_at=raw["last_reconciled_at"],
            status=DeviceStatus(raw["status"]),
        )


# Desired state assigned at registration when the bulb's reported state is
# unknown: off, white at full brightness if someone later flips it on.
SAFE_DEFAULT_STATE = LightState(power=False, hue=0, saturation=0, brightness=100)
