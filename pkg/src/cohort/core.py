"""Shared vocabulary: agent identities, utterances, and the conversation context."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

HUMAN_SPEAKER = "human"

AGENT_ID_RE = re.compile(r"^[a-z][a-z0-9_]{0,31}$")

# Names the roster may not claim; "human" is the pseudo-entity / speaker label.
RESERVED_IDS = frozenset({HUMAN_SPEAKER})

DEFAULT_CONTEXT_WINDOW = 40


class TimeRegressionError(ValueError):
    """An utterance was appended with a logical time earlier than the last one."""


class RosterError(ValueError):
    """A roster violates identifier or registration-index constraints."""


def validate_agent_id(value: str) -> str:
    if not isinstance(value, str) or not AGENT_ID_RE.match(value):
        raise RosterError(f"invalid agent id {value!r} (expected [a-z][a-z0-9_]{{0,31}})")
    if value in RESERVED_IDS:
        raise RosterError(f"agent id {value!r} is reserved")
    return value


@dataclass(frozen=True)
class AgentProfile:
    """One roster entry. ``registration_index`` is the stable tie-break order."""

    id: str
    display_name: str
    persona: str
    registration_index: int


def validate_roster(roster: list[AgentProfile]) -> list[AgentProfile]:
    """Check ids and registration indices; indices must be dense 0..N-1."""
    if not roster:
        raise RosterError("roster must contain at least one agent")
    seen: set[str] = set()
    for profile in roster:
        validate_agent_id(profile.id)
        if profile.id in seen:
            raise RosterError(f"duplicate agent id {profile.id!r}")
        seen.add(profile.id)
    indices = sorted(p.registration_index for p in roster)
    if indices != list(range(len(roster))):
        raise RosterError(f"registration indices must be dense 0..{len(roster) - 1}, got {indices}")
    return roster


@dataclass(frozen=True)
class Utterance:
    """One unit of conversation, spoken by the human or an agent.

    ``speaker`` is either :data:`HUMAN_SPEAKER` or an agent id. A structurally
    set ``addressee`` is the single point of truth for directed speech.
    """

    speaker: str
    text: str
    addressee: str | None = None
    logical_time_ms: int = 0

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("utterance text must be non-empty after trimming")
        if self.logical_time_ms < 0:
            raise ValueError("logical_time_ms must be non-negative")

    @property
    def is_human(self) -> bool:
        return self.speaker == HUMAN_SPEAKER

    def to_dict(self) -> dict:
        return {
            "speaker": self.speaker,
            "text": self.text,
            "addressee": self.addressee,
            "logical_time_ms": self.logical_time_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Utterance":
        return cls(
            speaker=data["speaker"],
            text=data["text"],
            addressee=data.get("addressee"),
            logical_time_ms=int(data["logical_time_ms"]),
        )


@dataclass(frozen=True)
class InteractionContext:
    """Conversational history shared by every agent. Value type: appends return
    a new context, so snapshots handed to concurrent readers never change."""

    transcript: tuple[Utterance, ...] = ()
    turn_counter: int = 0


def context_append(context: InteractionContext, u: Utterance) -> InteractionContext:
    """Append one utterance; human speech advances the turn counter."""
    if context.transcript and u.logical_time_ms < context.transcript[-1].logical_time_ms:
        raise TimeRegressionError(
            f"utterance at t={u.logical_time_ms}ms precedes transcript tail "
            f"t={context.transcript[-1].logical_time_ms}ms"
        )
    return InteractionContext(
        transcript=context.transcript + (u,),
        turn_counter=context.turn_counter + (1 if u.is_human else 0),
    )


def render_context(context: InteractionContext, max_entries: int = DEFAULT_CONTEXT_WINDOW) -> str:
    """Render the most recent utterances, oldest first, one line each.

    Line shape: ``SPEAKER: text`` or ``SPEAKER→addressee: text``.
    """
    if max_entries < 1:
        raise ValueError("max_entries must be >= 1")
    lines = []
    for u in context.transcript[-max_entries:]:
        target = f"→{u.addressee}" if u.addressee else ""
        lines.append(f"{u.speaker.upper()}{target}: {u.text}")
    return "\n".join(lines)
