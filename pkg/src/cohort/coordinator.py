"""Centralized turn-taking arbitration.

One scoring pass per human utterance decides which agents respond and in what
order; selected agents then plan and act strictly sequentially under the
session speech lock. Directed addressing bypasses scoring entirely.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Protocol, Sequence

from .actions import ExecutionStatus, Outcome, Policy, PrimitiveKind
from .adapters import CompletionAdapter, CompletionRequest, Purpose
from .core import (
    HUMAN_SPEAKER,
    AgentProfile,
    InteractionContext,
    RosterError,
    Utterance,
    context_append,
    render_context,
)
from .executor import DurationModel, SpeechLock, execute_policy
from .perception import Observation, SceneDescriber, observe
from .planner import plan
from .wire import extract_json_object

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5

# A display name counts as addressing only when it starts the utterance and is
# followed by nothing, whitespace, or punctuation ("Sam," / "Sam:" / "Sam?").
_NAME_BOUNDARY = frozenset(" \t,.:;!?")

SCORER_SYSTEM = (
    "You arbitrate turn-taking among embodied agents sharing one conversation "
    "with a human. For every agent listed, estimate the likelihood in [0, 1] "
    "that it should respond to the latest utterance. Reply with exactly one "
    'JSON object of the form {"scores": {"<agent_id>": <number>}} covering '
    "every agent, and nothing else."
)


class ScoreSource(Enum):
    SCRIPTED = "scripted"
    MODEL_BACKED = "model_backed"


class FallbackMode(Enum):
    ARGMAX = "argmax"
    SILENCE = "silence"


class SelectionReason(Enum):
    THRESHOLD = "threshold"
    ADDRESSEE_OVERRIDE = "addressee_override"
    ARGMAX_FALLBACK = "argmax_fallback"
    NONE = "none"


@dataclass(frozen=True)
class ScoreVector:
    """Per-agent response likelihoods in [0,1], plus where they came from."""

    scores: Mapping[str, float]
    source: ScoreSource


class SelectionResult(NamedTuple):
    selected: tuple[str, ...]
    reason: SelectionReason


@dataclass(frozen=True)
class TurnRecord:
    """Everything one human utterance produced, for callers and the console.

    Wall-clock stage latencies live here rather than in the event log, so the
    log stays byte-reproducible. overhead_us isolates coordination cost
    (scoring bookkeeping + selection + dispatch) from adapter and execution
    time, which is what the scaling benchmark measures.
    """

    turn_index: int
    trigger: Utterance
    observations: Mapping[str, Observation]
    scores: Mapping[str, float]
    selected: tuple[str, ...]
    reason: SelectionReason
    addressee: str | None
    policies: Mapping[str, Policy]
    statuses: Mapping[str, tuple[ExecutionStatus, ...]]
    stage_latencies_ms: Mapping[str, int]
    degradations: tuple[str, ...]
    overhead_us: int

    def to_dict(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "trigger": self.trigger.to_dict(),
            "observations": {k: v.to_dict() for k, v in self.observations.items()},
            "scores": dict(self.scores),
            "selected": list(self.selected),
            "reason": self.reason.value,
            "addressee": self.addressee,
            "policies": {k: v.to_wire() for k, v in self.policies.items()},
            "statuses": {k: [s.to_dict() for s in v] for k, v in self.statuses.items()},
            "stage_latencies_ms": dict(self.stage_latencies_ms),
            "degradations": list(self.degradations),
            "overhead_us": self.overhead_us,
        }


def resolve_addressee(u: Utterance, roster: Sequence[AgentProfile]) -> str | None:
    """The structural addressee field wins; otherwise an utterance that leads
    with an agent's display name (up to a word boundary) addresses it."""
    if u.addressee is not None:
        return u.addressee
    text = u.text.strip().lower()
    for profile in roster:
        name = profile.display_name.strip().lower()
        if not name or not text.startswith(name):
            continue
        if len(text) == len(name) or text[len(name)] in _NAME_BOUNDARY:
            return profile.id
    return None


def build_scoring_prompt(context: InteractionContext, observations: Mapping[str, Observation]) -> str:
    digests = "\n".join(f"- {obs.digest()}" for obs in observations.values())
    return (
        f"Conversation so far:\n{render_context(context)}\n\n"
        f"Agents and what they currently perceive:\n{digests}"
    )


def _source_of(adapter: CompletionAdapter) -> ScoreSource:
    return ScoreSource.SCRIPTED if adapter.name == "scripted" else ScoreSource.MODEL_BACKED


def score_agents(
    context: InteractionContext,
    observations: Mapping[str, Observation],
    scorer: CompletionAdapter,
    on_warning: Callable[[str], None] | None = None,
) -> ScoreVector:
    """Ask the scorer for all agents at once; never raises.

    Missing agents default to 0.0, out-of-range values are clipped, and any
    transport or parse failure degrades to a uniform 0.5 so the turn proceeds.
    """

    def warn(message: str) -> None:
        logger.warning(message)
        if on_warning is not None:
            on_warning(message)

    source = _source_of(scorer)
    ids = list(observations)
    request = CompletionRequest(
        system=SCORER_SYSTEM,
        user=build_scoring_prompt(context, observations),
        purpose=Purpose.SCORE,
    )
    try:
        raw = scorer.complete(request)
        payload = extract_json_object(raw, "scores")
        if payload is None:
            raise ValueError('reply contains no JSON object with a "scores" key')
        table = payload["scores"]
        if not isinstance(table, dict):
            raise ValueError('"scores" is not an object')
    except Exception as exc:  # noqa: BLE001 - degradation boundary
        warn(f"scorer degraded to uniform 0.5: {exc}")
        return ScoreVector({agent_id: 0.5 for agent_id in ids}, source)
    scores: dict[str, float] = {}
    for agent_id in ids:
        value = table.get(agent_id)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or math.isnan(value):
            if value is not None:
                warn(f"scorer returned a non-numeric score for {agent_id}; defaulting to 0.0")
            scores[agent_id] = 0.0
        else:
            scores[agent_id] = min(1.0, max(0.0, float(value)))
    return ScoreVector(scores, source)


def select_responders(
    v: ScoreVector,
    threshold: float,
    addressee: str | None,
    roster: Sequence[AgentProfile],
    fallback: FallbackMode = FallbackMode.ARGMAX,
) -> SelectionResult:
    """Threshold rule: every agent scoring >= threshold responds, highest
    score first, registration order breaking ties. An addressee overrides
    scores entirely. An empty cut either falls back to the argmax agent or
    stays silent, by configuration."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if addressee is not None:
        if all(p.id != addressee for p in roster):
            raise RosterError(f"addressee {addressee!r} is not in the roster")
        return SelectionResult((addressee,), SelectionReason.ADDRESSEE_OVERRIDE)
    scores = v.scores
    picked = [
        (-scores.get(p.id, 0.0), p.registration_index, p.id)
        for p in roster
        if scores.get(p.id, 0.0) >= threshold
    ]
    if picked:
        picked.sort()
        return SelectionResult(tuple(entry[2] for entry in picked), SelectionReason.THRESHOLD)
    if fallback is FallbackMode.SILENCE or not roster:
        return SelectionResult((), SelectionReason.NONE)
    best = min(roster, key=lambda p: (-scores.get(p.id, 0.0), p.registration_index))
    return SelectionResult((best.id,), SelectionReason.ARGMAX_FALLBACK)


class TurnHost(Protocol):
    """What run_turn needs from a session. Sessions own storage and the event
    log; the coordinator owns the pipeline."""

    roster: tuple[AgentProfile, ...]
    context: InteractionContext
    world: object
    threshold: float
    fallback: FallbackMode
    retry_cap: int
    context_window: int
    time_dilation: float
    planner_backend: CompletionAdapter
    scorer_backend: CompletionAdapter
    scene_describer: SceneDescriber | None
    speech_lock: SpeechLock
    durations: DurationModel

    def profile(self, agent_id: str) -> AgentProfile: ...

    def emit(self, kind: str, payload: dict, t_ms: int | None = None) -> None: ...


class _TimedAdapter:
    """Pass-through wrapper that accumulates wall time spent inside the
    adapter, so coordination overhead can be reported without it."""

    __slots__ = ("inner", "wall_ns")

    def __init__(self, inner: CompletionAdapter) -> None:
        self.inner = inner
        self.wall_ns = 0

    @property
    def name(self) -> str:
        return self.inner.name

    @property
    def max_concurrency(self) -> int:
        return getattr(self.inner, "max_concurrency", 1)

    def complete(self, request: CompletionRequest) -> str:
        started = time.perf_counter_ns()
        try:
            return self.inner.complete(request)
        finally:
            self.wall_ns += time.perf_counter_ns() - started


def run_turn(host: TurnHost, trigger: Utterance) -> TurnRecord:
    """Run the full pipeline for one human utterance.

    observe all -> resolve addressee -> score (unless overridden) -> select ->
    for each selected agent in order: plan with the context as it stands, then
    execute. Every stage degradation is recorded on the TurnRecord; nothing
    here aborts the session.
    """
    if trigger.speaker != HUMAN_SPEAKER:
        raise ValueError(f"turns are triggered by the human, got speaker {trigger.speaker!r}")
    world = host.world
    trigger = replace(trigger, logical_time_ms=world.clock_ms)
    turn_index = host.context.turn_counter
    host.context = context_append(host.context, trigger)
    degradations: list[str] = []

    def degrade(message: str) -> None:
        degradations.append(message)
        host.emit("warning", {"message": message})

    host.emit(
        "user_utterance",
        {
            "turn_index": turn_index,
            "speaker": trigger.speaker,
            "text": trigger.text,
            "addressee": trigger.addressee,
        },
    )

    started = time.perf_counter_ns()
    observations: dict[str, Observation] = {}
    for prof in host.roster:
        obs = observe(world, prof.id, trigger, host.scene_describer, on_warning=degrade)
        observations[prof.id] = obs
        host.emit("observation", obs.to_dict())
    observe_ns = time.perf_counter_ns() - started

    addressee = resolve_addressee(trigger, host.roster)

    scorer = _TimedAdapter(host.scorer_backend)
    started = time.perf_counter_ns()
    if addressee is None:
        vector = score_agents(host.context, observations, scorer, on_warning=degrade)
        host.emit("scores", {"scores": dict(vector.scores), "source": vector.source.value})
    else:
        vector = ScoreVector({}, _source_of(host.scorer_backend))
    score_ns = time.perf_counter_ns() - started

    started = time.perf_counter_ns()
    selection = select_responders(vector, host.threshold, addressee, host.roster, host.fallback)
    select_ns = time.perf_counter_ns() - started
    host.emit(
        "selection",
        {
            "selected": list(selection.selected),
            "reason": selection.reason.value,
            "threshold": host.threshold,
            "addressee": addressee,
        },
    )

    def action_sink(kind: str, payload: dict) -> None:
        if kind == "action_start":
            t_ms = payload["start_ms"]
        elif kind == "action_end":
            t_ms = payload["end_ms"]
        else:
            t_ms = payload["start_ms"] + payload["duration_ms"]
        host.emit(kind, payload, t_ms=t_ms)

    planner = _TimedAdapter(host.planner_backend)
    policies: dict[str, Policy] = {}
    statuses: dict[str, tuple[ExecutionStatus, ...]] = {}
    plan_ns = 0
    execute_ns = 0
    dispatch_started = time.perf_counter_ns()
    for agent_id in selection.selected:
        started = time.perf_counter_ns()
        outcome = plan(
            host.profile(agent_id),
            observations[agent_id],
            host.context,
            planner,
            retry_cap=host.retry_cap,
            context_window=host.context_window,
        )
        plan_ns += time.perf_counter_ns() - started
        if outcome.fallback_used:
            degrade(f"planner for {agent_id} fell back after {outcome.attempts} attempts")
        host.emit(
            "plan",
            {
                "agent": agent_id,
                "policy": outcome.policy.to_wire(),
                "attempts": outcome.attempts,
                "fallback_used": outcome.fallback_used,
            },
        )
        policies[agent_id] = outcome.policy

        started = time.perf_counter_ns()
        world, agent_statuses = execute_policy(
            world,
            agent_id,
            outcome.policy,
            host.speech_lock,
            host.durations,
            emit=action_sink,
            time_dilation=host.time_dilation,
        )
        execute_ns += time.perf_counter_ns() - started
        host.world = world
        statuses[agent_id] = tuple(agent_statuses)
        for status, action in zip(agent_statuses, outcome.policy.actions):
            if status.outcome is Outcome.SUCCESS and action.kind is PrimitiveKind.SPEAK:
                spoken = Utterance(agent_id, str(action.params["text"]), None, status.start_ms)
                host.context = context_append(host.context, spoken)
                # Stamped at the policy's end so log times stay non-decreasing;
                # the payload keeps the speak's own start time.
                host.emit("agent_utterance", spoken.to_dict())
    dispatch_ns = time.perf_counter_ns() - dispatch_started - plan_ns - execute_ns

    overhead_us = max(0, score_ns - scorer.wall_ns + select_ns + dispatch_ns) // 1000
    stage_latencies = {
        "observe": observe_ns // 1_000_000,
        "score": score_ns // 1_000_000,
        "select": select_ns // 1_000_000,
        "plan": plan_ns // 1_000_000,
        "execute": execute_ns // 1_000_000,
    }
    return TurnRecord(
        turn_index=turn_index,
        trigger=trigger,
        observations=observations,
        scores=dict(vector.scores),
        selected=selection.selected,
        reason=selection.reason,
        addressee=addressee,
        policies=policies,
        statuses=statuses,
        stage_latencies_ms=stage_latencies,
        degradations=tuple(degradations),
        overhead_us=overhead_us,
    )
