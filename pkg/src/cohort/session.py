"""Session lifecycle, the append-only event log, and replay.

A session owns one world, one conversation, one speech lock, and one JSONL
log. Every line in the log is one EventRecord in canonical JSON, so two runs
of the same scenario produce byte-identical files and any log can be replayed
back into the exact final context and world geometry.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .actions import action_from_wire
from .adapters import (
    CompletionAdapter,
    CompletionRequest,
    HttpBackend,
    HttpEndpoint,
    Purpose,
    ScriptedBackend,
    ScriptRule,
    validate_rules,
)
from .coordinator import FallbackMode, TurnRecord, run_turn
from .core import (
    HUMAN_SPEAKER,
    AgentProfile,
    InteractionContext,
    RosterError,
    Utterance,
    context_append,
    validate_roster,
)
from .executor import DurationModel, SpeechLock, apply_effect
from .perception import SceneDescriber
from .wire import canonical_json
from .world import WorldState

LOG_DIR_ENV = "COHORT_LOG_DIR"
DEFAULT_LOG_DIR = "logs"

EVENT_KINDS = (
    "session_start",
    "user_utterance",
    "observation",
    "scores",
    "selection",
    "plan",
    "action_start",
    "action_end",
    "status",
    "agent_utterance",
    "latency",
    "warning",
)
_KIND_SET = frozenset(EVENT_KINDS)

SCENE_SYSTEM = (
    "You narrate what one embodied agent can currently see, in second person, "
    "one short paragraph, from the world snapshot provided. Mention only "
    "things within its field of view."
)


class ConfigError(ValueError):
    """Invalid session configuration; ``issues`` lists (field, problem)."""

    def __init__(self, issues: list[tuple[str, str]]):
        self.issues = issues
        super().__init__("; ".join(f"{field}: {problem}" for field, problem in issues))


class SessionClosedError(RuntimeError):
    """The session no longer accepts utterances."""


class CorruptLogError(ValueError):
    """The event log violates its schema (seq gap, bad header, bad record)."""


@dataclass(frozen=True)
class EventRecord:
    """One line of the log. ``t_logical_ms`` is simulated time; wall time
    never appears here, which is what keeps logs reproducible."""

    seq: int
    t_logical_ms: int
    session_id: str
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "t_logical_ms": self.t_logical_ms,
            "session_id": self.session_id,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EventRecord":
        if not isinstance(data, dict):
            raise ValueError("record is not an object")
        missing = {"seq", "t_logical_ms", "session_id", "kind", "payload"} - set(data)
        if missing:
            raise ValueError(f"record is missing fields: {sorted(missing)}")
        seq, t_ms, kind, payload = data["seq"], data["t_logical_ms"], data["kind"], data["payload"]
        if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
            raise ValueError(f"bad seq {seq!r}")
        if not isinstance(t_ms, int) or isinstance(t_ms, bool) or t_ms < 0:
            raise ValueError(f"bad t_logical_ms {t_ms!r}")
        if kind not in _KIND_SET:
            raise ValueError(f"unknown event kind {kind!r}")
        if not isinstance(payload, dict):
            raise ValueError("payload is not an object")
        return cls(seq, t_ms, str(data["session_id"]), kind, payload)


class TicketLock:
    """FIFO mutex: waiters are served strictly in arrival order, which plain
    locks do not guarantee. Keeps concurrent utterances queued, not reordered."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._next_ticket = 0
        self._serving = 0

    def acquire(self) -> None:
        with self._cond:
            ticket = self._next_ticket
            self._next_ticket += 1
            while ticket != self._serving:
                self._cond.wait()

    def release(self) -> None:
        with self._cond:
            self._serving += 1
            self._cond.notify_all()

    def __enter__(self) -> "TicketLock":
        self.acquire()
        return self

    def __exit__(self, *exc: object) -> None:
        self.release()


@dataclass(frozen=True)
class BackendConfig:
    """Which completion backend serves planning/scoring (and scenes when
    ``external_scenes`` is set on the session config)."""

    kind: str = "scripted"  # scripted | http
    rules: tuple[ScriptRule, ...] = ()
    endpoint: HttpEndpoint | None = None

    def to_dict(self) -> dict:
        described: dict = {"kind": self.kind}
        if self.kind == "scripted":
            described["rule_count"] = len(self.rules)
        elif self.endpoint is not None:
            described["endpoint"] = self.endpoint.to_dict()
        return described


@dataclass(frozen=True)
class SessionConfig:
    roster: tuple[AgentProfile, ...]
    world: WorldState
    backend: BackendConfig = field(default_factory=BackendConfig)
    threshold: float = 0.5
    fallback: FallbackMode = FallbackMode.ARGMAX
    retry_cap: int = 2
    durations: DurationModel = field(default_factory=DurationModel)
    seed: int = 0
    time_dilation: float = 0.0
    context_window: int = 40
    external_scenes: bool = False
    session_id: str | None = None
    log_path: Path | None = None
    persist_log: bool = True

    def to_dict(self) -> dict:
        return {
            "roster": [
                {
                    "id": p.id,
                    "display_name": p.display_name,
                    "persona": p.persona,
                    "registration_index": p.registration_index,
                }
                for p in sorted(self.roster, key=lambda p: p.registration_index)
            ],
            "world": self.world.to_dict(),
            "backend": self.backend.to_dict(),
            "threshold": self.threshold,
            "fallback": self.fallback.value,
            "retry_cap": self.retry_cap,
            "durations": self.durations.to_dict(),
            "seed": self.seed,
            "time_dilation": self.time_dilation,
            "context_window": self.context_window,
            "external_scenes": self.external_scenes,
        }


def validate_config(cfg: SessionConfig) -> list[tuple[str, str]]:
    issues: list[tuple[str, str]] = []
    try:
        validate_roster(list(cfg.roster))
    except RosterError as exc:
        issues.append(("roster", str(exc)))
    else:
        for profile in cfg.roster:
            if profile.id not in cfg.world.agents:
                issues.append(("world", f"no body for agent {profile.id!r} in the world layout"))
    if not 0.0 <= cfg.threshold <= 1.0:
        issues.append(("threshold", f"must be in [0, 1], got {cfg.threshold}"))
    if cfg.retry_cap < 0:
        issues.append(("retry_cap", "must be >= 0"))
    if cfg.time_dilation < 0:
        issues.append(("time_dilation", "must be >= 0"))
    if cfg.backend.kind not in ("scripted", "http"):
        issues.append(("backend.kind", f"unknown backend kind {cfg.backend.kind!r}"))
    elif cfg.backend.kind == "scripted":
        try:
            validate_rules(list(cfg.backend.rules))
        except ValueError as exc:
            issues.append(("backend.rules", str(exc)))
    elif cfg.backend.endpoint is None:
        issues.append(("backend.endpoint", "http backend requires an endpoint"))
    return issues


class Session:
    """Live state plus the event log writer. Implements the host contract the
    coordinator drives a turn through."""

    def __init__(
        self,
        config: SessionConfig,
        backend: CompletionAdapter,
        scene_describer: SceneDescriber | None = None,
    ):
        self.config = config
        self.id = config.session_id or uuid.uuid4().hex
        self.roster = tuple(sorted(config.roster, key=lambda p: p.registration_index))
        self._profiles = {p.id: p for p in self.roster}
        self.context = InteractionContext()
        self.world = config.world
        self.threshold = config.threshold
        self.fallback = config.fallback
        self.retry_cap = config.retry_cap
        self.context_window = config.context_window
        self.time_dilation = config.time_dilation
        self.durations = config.durations
        self.planner_backend = backend
        self.scorer_backend = backend
        self.scene_describer = scene_describer
        self.speech_lock = SpeechLock()
        self.turns: list[TurnRecord] = []
        self._events: list[EventRecord] = []
        self._cond = threading.Condition()
        self._turn_queue = TicketLock()
        self._closed = False
        self._log_file = None
        self.log_path: Path | None = None
        if config.persist_log:
            self.log_path = config.log_path or _default_log_path(self.id)
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_file = open(self.log_path, "w", encoding="utf-8", newline="\n")
        self.emit("session_start", {"session_id": self.id, "config": config.to_dict()})

    @property
    def closed(self) -> bool:
        return self._closed

    def profile(self, agent_id: str) -> AgentProfile:
        return self._profiles[agent_id]

    def emit(self, kind: str, payload: dict, t_ms: int | None = None) -> None:
        if kind not in _KIND_SET:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._cond:
            record = EventRecord(
                seq=len(self._events),
                t_logical_ms=self.world.clock_ms if t_ms is None else t_ms,
                session_id=self.id,
                kind=kind,
                payload=payload,
            )
            self._events.append(record)
            if self._log_file is not None:
                self._log_file.write(canonical_json(record.to_dict()) + "\n")
                self._log_file.flush()
            self._cond.notify_all()

    def on_latency(self, purpose: Purpose, ms: int, backend_name: str) -> None:
        self.emit("latency", {"purpose": purpose.value, "ms": ms, "backend": backend_name})

    def post_utterance(self, text: str, addressee: str | None = None) -> TurnRecord:
        """Run one full turn. Concurrent calls queue FIFO; events of distinct
        turns never interleave."""
        if self._closed:
            raise SessionClosedError(f"session {self.id} is closed")
        if addressee is not None and addressee not in self._profiles:
            raise RosterError(f"addressee {addressee!r} is not in the roster")
        trigger = Utterance(HUMAN_SPEAKER, text, addressee, self.world.clock_ms)
        with self._turn_queue:
            if self._closed:
                raise SessionClosedError(f"session {self.id} is closed")
            record = run_turn(self, trigger)
            self.turns.append(record)
            return record

    @property
    def events(self) -> list[EventRecord]:
        with self._cond:
            return list(self._events)

    def wait_events(self, from_seq: int, timeout: float | None = None) -> list[EventRecord]:
        """Events at seq >= from_seq, blocking up to ``timeout`` for new ones.
        Returns [] on timeout or when the session closes with nothing new."""
        with self._cond:
            if from_seq >= len(self._events) and not self._closed:
                self._cond.wait(timeout)
            return self._events[from_seq:]

    def close(self) -> None:
        with self._cond:
            self._closed = True
            if self._log_file is not None:
                self._log_file.close()
                self._log_file = None
            self._cond.notify_all()


def _default_log_path(session_id: str) -> Path:
    return Path(os.environ.get(LOG_DIR_ENV, DEFAULT_LOG_DIR)) / f"{session_id}.jsonl"


def build_backend(cfg: SessionConfig) -> tuple[CompletionAdapter, SceneDescriber | None]:
    """Construct the completion backend named by the config. Scripted rule
    state (once-consumption) is per session, so each session gets a fresh
    instance."""
    if cfg.backend.kind == "scripted":
        backend: CompletionAdapter = ScriptedBackend(list(cfg.backend.rules))
    else:
        backend = HttpBackend(cfg.backend.endpoint)

    describer: SceneDescriber | None = None
    if cfg.external_scenes:

        def describer(world_json: str, agent_id: str) -> str:
            request = CompletionRequest(
                system=SCENE_SYSTEM,
                user=f"Agent: {agent_id}\nWorld snapshot:\n{world_json}",
                purpose=Purpose.SCENE,
            )
            return backend.complete(request)

    return backend, describer


def create_session(
    cfg: SessionConfig,
    backend: CompletionAdapter | None = None,
    scene_describer: SceneDescriber | None = None,
) -> Session:
    """Validate the config and open a session (world placed, empty context,
    log started). An explicit ``backend`` bypasses config-driven construction;
    the config backend section is ignored then."""
    issues = validate_config(cfg)
    if backend is not None:
        issues = [i for i in issues if not i[0].startswith("backend")]
    if issues:
        raise ConfigError(issues)
    if backend is None:
        backend, built_describer = build_backend(cfg)
        scene_describer = scene_describer or built_describer
    session = Session(cfg, backend, scene_describer)
    if getattr(backend, "on_latency", False) is None:
        backend.on_latency = session.on_latency
    return session


@dataclass(frozen=True)
class ReplayResult:
    session_id: str
    context: InteractionContext
    world: WorldState
    events: tuple[EventRecord, ...]


def replay(log_path: str | Path) -> ReplayResult:
    """Rebuild final context and world purely from a log.

    The same pure transition functions the executor uses are applied to the
    logged successful actions, so a replayed world matches the live run's
    final world exactly, floats included.
    """
    events: list[EventRecord] = []
    with open(log_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                raise CorruptLogError(f"line {line_no}: blank line")
            try:
                data = json.loads(line)
            except ValueError as exc:
                raise CorruptLogError(f"line {line_no}: invalid JSON: {exc}") from exc
            try:
                record = EventRecord.from_dict(data)
            except ValueError as exc:
                raise CorruptLogError(f"line {line_no}: {exc}") from exc
            events.append(record)

    if not events:
        raise CorruptLogError("empty log: missing session_start")
    if events[0].kind != "session_start":
        raise CorruptLogError(f"first event is {events[0].kind!r}, expected session_start")
    session_id = events[0].session_id
    last_t = -1
    for index, record in enumerate(events):
        if record.seq != index:
            raise CorruptLogError(f"seq gap: expected {index}, found {record.seq}")
        if record.session_id != session_id:
            raise CorruptLogError(f"seq {index}: session_id changed mid-log")
        if record.t_logical_ms < last_t:
            raise CorruptLogError(
                f"seq {index}: t_logical_ms regressed ({record.t_logical_ms} < {last_t})"
            )
        last_t = record.t_logical_ms

    try:
        world = WorldState.from_dict(events[0].payload["config"]["world"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptLogError(f"session_start payload lacks a valid world: {exc}") from exc
    context = InteractionContext()
    for record in events[1:]:
        payload = record.payload
        try:
            if record.kind == "user_utterance":
                context = context_append(
                    context,
                    Utterance(HUMAN_SPEAKER, payload["text"], payload.get("addressee"), record.t_logical_ms),
                )
            elif record.kind == "agent_utterance":
                context = context_append(context, Utterance.from_dict(payload))
            elif record.kind == "action_end" and payload.get("outcome") == "success":
                spec = action_from_wire({"kind": payload["kind"], "params": payload["params"]})
                world = apply_effect(world, payload["agent"], spec)
                world = world.advance_clock(int(payload["end_ms"]))
        except CorruptLogError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptLogError(f"seq {record.seq}: cannot apply {record.kind}: {exc}") from exc
    return ReplayResult(session_id, context, world, tuple(events))
