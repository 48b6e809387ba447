"""Planning: prompt assembly, tolerant policy parsing, bounded repair, fallback.

Whatever the backend does (garbage, truncation, exceptions, timeouts), ``plan``
returns a policy that validates. The prompt layout is frozen; see
docs/prompting.md.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .actions import (
    DEFAULT_POLICY_CAP,
    Policy,
    WireFormatError,
    capability_manifest,
    policy_from_wire,
    speak,
    validate_policy,
)
from .adapters import CompletionAdapter, CompletionRequest, Purpose
from .core import AgentProfile, InteractionContext, render_context
from .perception import Observation
from .wire import extract_json_object

logger = logging.getLogger(__name__)

DEFAULT_RETRY_CAP = 2
PLAN_MAX_OUTPUT_CHARS = 2000

FALLBACK_TEXT = "I'm sorry, I didn't catch that — could you repeat?"

OUTPUT_CONTRACT = (
    "Reply with exactly one JSON object and nothing else, in this shape:\n"
    '{"actions":[{"kind":"<primitive>","params":{...}}, ...]}\n'
    "Kinds are lowercase (speak, posture, gesture, head_move, locomote, hand).\n"
    "The actions list must be non-empty and at most "
    f"{DEFAULT_POLICY_CAP} entries."
)


@dataclass(frozen=True)
class PlanningPrompt:
    system: str
    user: str


@dataclass(frozen=True)
class ParseError(Exception):
    code: str  # no-object-found | malformed-structure | validation-failed
    message: str
    action_index: int | None = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class PlanOutcome:
    policy: Policy
    attempts: int
    fallback_used: bool
    raw_last: str


def fallback_policy() -> Policy:
    return Policy((speak(FALLBACK_TEXT, volume=0.7),))


def build_planning_prompt(
    obs: Observation,
    ctx: InteractionContext,
    manifest: str,
    profile: AgentProfile,
    context_window: int = 40,
) -> PlanningPrompt:
    """Deterministic prompt assembly.

    System block: persona, capability manifest, output contract.
    User block: rendered context window, scene text, then the heard utterance
    verbatim as the final characters (when present).
    """
    system = (
        f"You are {profile.display_name}. {profile.persona}\n\n"
        f"{manifest}\n\n"
        f"{OUTPUT_CONTRACT}"
    )
    rendered = render_context(ctx, context_window) if ctx.transcript else "(no conversation yet)"
    user = f"Recent conversation:\n{rendered}\n\nCurrent scene:\n{obs.scene.text}"
    if obs.heard is not None:
        user += f"\n\nYou just heard: {obs.heard.text}"
    return PlanningPrompt(system=system, user=user)


def parse_policy(raw: str, cap: int = DEFAULT_POLICY_CAP) -> Policy:
    """Extract and validate the first policy object found in ``raw``.

    Tolerates prose and code fences around the object. Declared defaults are
    filled for omitted optional parameters. Raises :class:`ParseError` when no
    policy object is present, its structure is wrong, or validation fails.
    """
    obj = extract_json_object(raw, "actions")
    if obj is None:
        raise ParseError("no-object-found", "no JSON object with an \"actions\" key found")
    try:
        policy = policy_from_wire(obj)
    except WireFormatError as exc:
        raise ParseError("malformed-structure", str(exc)) from None
    issues = validate_policy(policy, cap=cap)
    if issues:
        first = issues[0]
        raise ParseError("validation-failed", f"action {first.action_index}: {first.code}: {first.message}"
                         if first.action_index is not None else f"{first.code}: {first.message}",
                         action_index=first.action_index)
    return policy


def plan(
    agent: AgentProfile,
    obs: Observation,
    ctx: InteractionContext,
    backend: CompletionAdapter,
    retry_cap: int = DEFAULT_RETRY_CAP,
    context_window: int = 40,
    policy_cap: int = DEFAULT_POLICY_CAP,
) -> PlanOutcome:
    """Call the backend up to 1 + retry_cap times, re-prompting with the parse
    error appended after each failure; on exhaustion return the apology
    fallback so every reasoning cycle still produces observable behavior."""
    manifest = capability_manifest(agent)
    prompt = build_planning_prompt(obs, ctx, manifest.text, agent, context_window)
    user = prompt.user
    raw_last = ""
    attempts = 0
    for _ in range(retry_cap + 1):
        attempts += 1
        request = CompletionRequest(
            system=prompt.system,
            user=user,
            purpose=Purpose.PLAN,
            max_output_chars=PLAN_MAX_OUTPUT_CHARS,
        )
        try:
            raw_last = backend.complete(request)
        except Exception as exc:  # noqa: BLE001 - adapters may fail arbitrarily
            logger.warning("plan backend error for %s (attempt %d): %s", agent.id, attempts, exc)
            user = prompt.user + f"\n\nYour previous reply failed ({exc}). " + OUTPUT_CONTRACT
            continue
        try:
            policy = parse_policy(raw_last, cap=policy_cap)
        except ParseError as exc:
            logger.warning("plan parse error for %s (attempt %d): %s", agent.id, attempts, exc)
            user = prompt.user + f"\n\nYour previous reply failed ({exc}). " + OUTPUT_CONTRACT
            continue
        return PlanOutcome(policy=policy, attempts=attempts, fallback_used=False, raw_last=raw_last)
    return PlanOutcome(policy=fallback_policy(), attempts=attempts, fallback_used=True, raw_last=raw_last)
