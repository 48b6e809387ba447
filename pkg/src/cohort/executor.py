"""Policy execution on the simulated embodiment.

Actions run strictly in order on the logical clock; failures are recorded and
execution continues (strict mode aborts instead). The session speech lock is
held for exactly each speak interval, which is what makes cross-agent speech
mutual exclusion checkable from the event log.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable

from .actions import ActionSpec, ExecutionStatus, Outcome, Policy, PrimitiveKind, validate_action
from .world import WorldState, apply_head_move, apply_locomotion

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DurationModel:
    """Logical-time cost of each primitive, in milliseconds."""

    speak_wps: float = 2.5
    speak_min_ms: int = 500
    gesture_base_ms: dict[str, int] = field(
        default_factory=lambda: {"nod": 800, "wave": 1500, "handshake": 2000, "point": 1000}
    )
    head_move_ms: int = 600
    posture_ms: int = 2000
    locomote_ms_per_m: int = 2000
    hand_ms: int = 400

    def speak_duration_ms(self, text: str) -> int:
        words = len(text.split())
        return max(self.speak_min_ms, int(round(words / self.speak_wps * 1000)))

    def duration_ms(self, spec: ActionSpec) -> int:
        kind, params = spec.kind, spec.params
        if kind is PrimitiveKind.SPEAK:
            return self.speak_duration_ms(str(params["text"]))
        if kind is PrimitiveKind.GESTURE:
            base = self.gesture_base_ms[str(params["type"])]
            return int(round(base / float(params["speed"])))
        if kind is PrimitiveKind.HEAD_MOVE:
            return self.head_move_ms
        if kind is PrimitiveKind.POSTURE:
            return self.posture_ms
        if kind is PrimitiveKind.LOCOMOTE:
            return int(round(float(params["magnitude"]) * self.locomote_ms_per_m))
        return self.hand_ms

    def to_dict(self) -> dict:
        return {
            "speak_wps": self.speak_wps,
            "speak_min_ms": self.speak_min_ms,
            "gesture_base_ms": dict(sorted(self.gesture_base_ms.items())),
            "head_move_ms": self.head_move_ms,
            "posture_ms": self.posture_ms,
            "locomote_ms_per_m": self.locomote_ms_per_m,
            "hand_ms": self.hand_ms,
        }


class SpeechLock:
    """Session-global mutual exclusion over speech intervals.

    Real-thread exclusion comes from the mutex; logical exclusion is enforced
    by refusing any reservation that overlaps a previous one on the shared
    logical clock.
    """

    def __init__(self) -> None:
        self._mutex = threading.Lock()
        self._last_end_ms = 0

    def reserve(self, start_ms: int, duration_ms: int) -> None:
        with self._mutex:
            if start_ms < self._last_end_ms:
                raise RuntimeError(
                    f"speech interval [{start_ms}, {start_ms + duration_ms}) overlaps a reservation "
                    f"ending at {self._last_end_ms}"
                )
            self._last_end_ms = start_ms + duration_ms


# Called as emit(event_kind, payload) for action_start / action_end / status.
EventSink = Callable[[str, dict], None]


def apply_effect(world: WorldState, agent: str, spec: ActionSpec) -> WorldState:
    """Pure world transition for one action. Replay uses this directly, which
    is what makes logs sufficient to reconstruct final geometry."""
    kind, params = spec.kind, spec.params
    if kind is PrimitiveKind.LOCOMOTE:
        return apply_locomotion(world, agent, str(params["direction"]), float(params["magnitude"]))
    if kind is PrimitiveKind.HEAD_MOVE:
        return apply_head_move(world, agent, float(params["pan_deg"]), float(params["tilt_deg"]))
    if kind is PrimitiveKind.POSTURE:
        return world.with_body(agent, replace(world.body(agent), posture=str(params["pose"])))
    if kind is PrimitiveKind.GESTURE:
        return world.with_body(agent, replace(world.body(agent), gesture=str(params["type"])))
    if kind is PrimitiveKind.HAND:
        return world.with_body(agent, replace(world.body(agent), hand=str(params["state"])))
    return world  # speak: no world-side effect


def execute_action(
    world: WorldState,
    agent: str,
    spec: ActionSpec,
    clock_ms: int,
    durations: DurationModel | None = None,
) -> tuple[WorldState, ExecutionStatus]:
    """Run one validated action; world errors become a failure status, never
    an exception. The world clock advances by the action's duration."""
    durations = durations or DurationModel()
    try:
        duration = durations.duration_ms(spec)
        next_world = apply_effect(world, agent, spec)
    except Exception as exc:  # noqa: BLE001 - world errors degrade to a status
        status = ExecutionStatus(0, Outcome.FAILURE, f"{type(exc).__name__}: {exc}", clock_ms, 0)
        return world, status
    next_world = next_world.advance_clock(clock_ms + duration)
    return next_world, ExecutionStatus(0, Outcome.SUCCESS, "", clock_ms, duration)


def execute_policy(
    world: WorldState,
    agent: str,
    policy: Policy,
    speech_lock: SpeechLock,
    durations: DurationModel | None = None,
    emit: EventSink | None = None,
    time_dilation: float = 0.0,
    abort_on_failure: bool = False,
) -> tuple[WorldState, list[ExecutionStatus]]:
    """Execute actions strictly in order, one dense status per action.

    Invalid actions fail without mutating the world and execution continues
    (unless ``abort_on_failure``, in which case the remaining actions are
    reported as skipped failures). ``time_dilation`` > 0 paces execution in
    wall time for live viewing; 0 runs instantly.
    """
    durations = durations or DurationModel()
    statuses: list[ExecutionStatus] = []
    aborted = False
    for index, spec in enumerate(policy.actions):
        start_ms = world.clock_ms
        if aborted:
            statuses.append(ExecutionStatus(index, Outcome.FAILURE, "skipped: earlier action failed", start_ms, 0))
            continue
        issues = validate_action(spec)
        if issues:
            detail = "; ".join(f"{i.code}: {i.message}" for i in issues)
            status = ExecutionStatus(index, Outcome.FAILURE, detail, start_ms, 0)
        else:
            duration = durations.duration_ms(spec)
            if emit is not None:
                emit("action_start", _action_payload(agent, index, spec, start_ms, duration))
            if spec.kind is PrimitiveKind.SPEAK:
                speech_lock.reserve(start_ms, duration)
            world, status = execute_action(world, agent, spec, start_ms, durations)
            status = replace(status, action_index=index)
            if time_dilation > 0 and status.outcome is Outcome.SUCCESS:
                time.sleep(status.duration_ms * time_dilation / 1000.0)
        if emit is not None:
            if status.outcome is Outcome.SUCCESS:
                emit("action_end", _end_payload(agent, spec, status))
            emit("status", {"agent": agent, **status.to_dict()})
        statuses.append(status)
        if abort_on_failure and status.outcome is Outcome.FAILURE:
            aborted = True
    return world, statuses


def _action_payload(agent: str, index: int, spec: ActionSpec, start_ms: int, duration_ms: int) -> dict:
    return {
        "agent": agent,
        "action_index": index,
        "kind": spec.kind.value,
        "params": dict(spec.params),
        "start_ms": start_ms,
        "duration_ms": duration_ms,
    }


def _end_payload(agent: str, spec: ActionSpec, status: ExecutionStatus) -> dict:
    return {
        "agent": agent,
        "action_index": status.action_index,
        "kind": spec.kind.value,
        "params": dict(spec.params),
        "outcome": status.outcome.value,
        "detail": status.detail,
        "start_ms": status.start_ms,
        "duration_ms": status.duration_ms,
        "end_ms": status.start_ms + status.duration_ms,
    }
