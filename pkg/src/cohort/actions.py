"""Action primitives: parameter schemas, validation, and the capability manifest.

The six primitive kinds form a closed set. Validation is total: it always
returns structured issues, never raises, no matter how malformed the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from .core import AgentProfile

DEFAULT_POLICY_CAP = 8

POSTURES = ("stand", "sit", "rest")
GESTURES = ("nod", "wave", "handshake", "point")
HAND_STATES = ("open", "close")
LOCOMOTE_DIRECTIONS = ("forward", "backward", "left", "right")


class PrimitiveKind(Enum):
    SPEAK = "speak"
    POSTURE = "posture"
    GESTURE = "gesture"
    HEAD_MOVE = "head_move"
    LOCOMOTE = "locomote"
    HAND = "hand"


_KIND_BY_WIRE = {k.value: k for k in PrimitiveKind}


@dataclass(frozen=True)
class ParamSchema:
    """Declared shape of one primitive parameter.

    ``kind`` is "string", "number", or "choice". Numeric bounds are inclusive
    unless ``min_exclusive`` is set. A parameter with a default is optional in
    wire input (the default is filled at parse time); validation itself
    expects every parameter to be present.
    """

    name: str
    kind: str
    choices: tuple[str, ...] = ()
    minimum: float | None = None
    maximum: float | None = None
    min_exclusive: bool = False
    non_empty: bool = False
    default: Any = None

    @property
    def required(self) -> bool:
        return self.default is None

    def describe_range(self) -> str:
        if self.kind == "choice":
            return "{" + ", ".join(self.choices) + "}"
        if self.kind == "number":
            lo = "(" if self.min_exclusive else "["
            return f"{lo}{self.minimum:g}, {self.maximum:g}]"
        return "non-empty string" if self.non_empty else "string"


SCHEMAS: dict[PrimitiveKind, tuple[ParamSchema, ...]] = {
    PrimitiveKind.SPEAK: (
        ParamSchema("text", "string", non_empty=True),
        ParamSchema("volume", "number", minimum=0.0, maximum=1.0, default=0.7),
    ),
    PrimitiveKind.POSTURE: (ParamSchema("pose", "choice", choices=POSTURES),),
    PrimitiveKind.GESTURE: (
        ParamSchema("type", "choice", choices=GESTURES),
        ParamSchema("speed", "number", minimum=0.0, maximum=2.0, min_exclusive=True, default=1.0),
    ),
    PrimitiveKind.HEAD_MOVE: (
        ParamSchema("pan_deg", "number", minimum=-90.0, maximum=90.0),
        ParamSchema("tilt_deg", "number", minimum=-30.0, maximum=30.0),
    ),
    PrimitiveKind.LOCOMOTE: (
        ParamSchema("direction", "choice", choices=LOCOMOTE_DIRECTIONS),
        ParamSchema("magnitude", "number", minimum=0.0, maximum=2.0, min_exclusive=True),
    ),
    PrimitiveKind.HAND: (ParamSchema("state", "choice", choices=HAND_STATES),),
}


@dataclass(frozen=True)
class ActionSpec:
    kind: PrimitiveKind
    params: Mapping[str, Any]

    def to_wire(self) -> dict:
        return {"kind": self.kind.value, "params": dict(self.params)}


@dataclass(frozen=True)
class Policy:
    actions: tuple[ActionSpec, ...]

    def to_wire(self) -> dict:
        return {"actions": [a.to_wire() for a in self.actions]}

    def kinds(self) -> list[str]:
        return [a.kind.value for a in self.actions]


class Outcome(Enum):
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass(frozen=True)
class ExecutionStatus:
    action_index: int
    outcome: Outcome
    detail: str
    start_ms: int
    duration_ms: int

    def to_dict(self) -> dict:
        return {
            "action_index": self.action_index,
            "outcome": self.outcome.value,
            "detail": self.detail,
            "start_ms": self.start_ms,
            "duration_ms": self.duration_ms,
        }


@dataclass(frozen=True)
class ValidationIssue:
    code: str  # unknown-kind | missing-param | unknown-param | out-of-range | bad-type
    param: str | None
    message: str


@dataclass(frozen=True)
class PolicyIssue:
    action_index: int | None  # None for policy-level problems
    code: str  # empty-policy | policy-too-long | or an action issue code
    message: str


def _check_value(schema: ParamSchema, value: Any) -> ValidationIssue | None:
    if schema.kind == "choice":
        if not isinstance(value, str):
            return ValidationIssue("bad-type", schema.name, f"{schema.name} must be a string")
        if value not in schema.choices:
            return ValidationIssue(
                "out-of-range", schema.name, f"{schema.name}={value!r} not in {schema.describe_range()}"
            )
        return None
    if schema.kind == "string":
        if not isinstance(value, str):
            return ValidationIssue("bad-type", schema.name, f"{schema.name} must be a string")
        if schema.non_empty and not value.strip():
            return ValidationIssue("out-of-range", schema.name, f"{schema.name} must be non-empty")
        return None
    # number
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return ValidationIssue("bad-type", schema.name, f"{schema.name} must be a number")
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        return ValidationIssue("out-of-range", schema.name, f"{schema.name} must be finite")
    below = value < schema.minimum or (schema.min_exclusive and value == schema.minimum)
    if below or value > schema.maximum:
        return ValidationIssue(
            "out-of-range", schema.name, f"{schema.name}={value:g} outside {schema.describe_range()}"
        )
    return None


def validate_action(spec: ActionSpec) -> list[ValidationIssue]:
    """Check one action against its kind's schema. Empty list means valid.

    Every declared parameter must be present (defaults are a parse-time
    concern) and no undeclared parameter may appear.
    """
    schemas = SCHEMAS.get(spec.kind)
    if schemas is None:
        return [ValidationIssue("unknown-kind", None, f"unknown primitive kind {spec.kind!r}")]
    issues: list[ValidationIssue] = []
    params = spec.params
    declared = {s.name for s in schemas}
    for name in params:
        if name not in declared:
            issues.append(ValidationIssue("unknown-param", name, f"{name} is not a {spec.kind.value} parameter"))
    for schema in schemas:
        if schema.name not in params:
            issues.append(ValidationIssue("missing-param", schema.name, f"{schema.name} is required"))
            continue
        issue = _check_value(schema, params[schema.name])
        if issue:
            issues.append(issue)
    return issues


def validate_policy(policy: Policy, cap: int = DEFAULT_POLICY_CAP) -> list[PolicyIssue]:
    """Check a whole policy; reports every failing action index."""
    if not policy.actions:
        return [PolicyIssue(None, "empty-policy", "a policy must contain at least one action")]
    issues: list[PolicyIssue] = []
    if len(policy.actions) > cap:
        issues.append(PolicyIssue(None, "policy-too-long", f"{len(policy.actions)} actions exceeds cap {cap}"))
    for index, spec in enumerate(policy.actions):
        for issue in validate_action(spec):
            issues.append(PolicyIssue(index, issue.code, issue.message))
    return issues


def _normalize_params(kind: PrimitiveKind, params: Mapping[str, Any]) -> dict[str, Any]:
    """Fill declared defaults and coerce ints to floats for numeric params."""
    out: dict[str, Any] = {}
    declared = {s.name: s for s in SCHEMAS[kind]}
    for name, value in params.items():
        schema = declared.get(name)
        if schema is not None and schema.kind == "number" and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        out[name] = value
    for schema in SCHEMAS[kind]:
        if schema.name not in out and schema.default is not None:
            out[schema.name] = schema.default
    return out


def make_action(kind: PrimitiveKind, **params: Any) -> ActionSpec:
    """Build an action with defaults filled; does not validate."""
    return ActionSpec(kind, _normalize_params(kind, params))


def speak(text: str, volume: float = 0.7) -> ActionSpec:
    return make_action(PrimitiveKind.SPEAK, text=text, volume=volume)


def gesture(type: str, speed: float = 1.0) -> ActionSpec:
    return make_action(PrimitiveKind.GESTURE, type=type, speed=speed)


def posture(pose: str) -> ActionSpec:
    return make_action(PrimitiveKind.POSTURE, pose=pose)


def head_move(pan_deg: float, tilt_deg: float = 0.0) -> ActionSpec:
    return make_action(PrimitiveKind.HEAD_MOVE, pan_deg=pan_deg, tilt_deg=tilt_deg)


def locomote(direction: str, magnitude: float) -> ActionSpec:
    return make_action(PrimitiveKind.LOCOMOTE, direction=direction, magnitude=magnitude)


def hand(state: str) -> ActionSpec:
    return make_action(PrimitiveKind.HAND, state=state)


class WireFormatError(ValueError):
    """The wire object does not have the policy envelope shape."""


def action_from_wire(obj: Any) -> ActionSpec:
    """Decode ``{"kind": ..., "params": {...}}``, filling declared defaults."""
    if not isinstance(obj, dict):
        raise WireFormatError(f"action must be an object, got {type(obj).__name__}")
    kind_name = obj.get("kind")
    kind = _KIND_BY_WIRE.get(kind_name) if isinstance(kind_name, str) else None
    if kind is None:
        raise WireFormatError(f"unknown action kind {kind_name!r}")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise WireFormatError("action params must be an object")
    return ActionSpec(kind, _normalize_params(kind, params))


def policy_from_wire(obj: Any) -> Policy:
    """Decode ``{"actions": [...]}`` into a Policy (not yet validated)."""
    if not isinstance(obj, dict) or not isinstance(obj.get("actions"), list):
        raise WireFormatError('policy must be an object with an "actions" array')
    return Policy(tuple(action_from_wire(item) for item in obj["actions"]))


@dataclass(frozen=True)
class ManifestEntry:
    kind: PrimitiveKind
    params: tuple[ParamSchema, ...]


@dataclass(frozen=True)
class CapabilityManifest:
    text: str
    entries: tuple[ManifestEntry, ...]


def capability_manifest(profile: AgentProfile) -> CapabilityManifest:
    """Enumerate every primitive with its parameters, ranges, and defaults.

    The text form goes straight into planning prompts; the structured form
    mirrors it exactly so tests can probe each declared range.
    """
    entries = tuple(ManifestEntry(kind, SCHEMAS[kind]) for kind in PrimitiveKind)
    lines = [f"{profile.display_name} can perform these action primitives:"]
    for entry in entries:
        parts = []
        for schema in entry.params:
            desc = f"{schema.name}: {schema.describe_range()}"
            if schema.default is not None:
                desc += f" (default {schema.default:g})" if schema.kind == "number" else f" (default {schema.default})"
            parts.append(desc)
        lines.append(f"- {entry.kind.value}({'; '.join(parts)})")
    return CapabilityManifest(text="\n".join(lines), entries=entries)
