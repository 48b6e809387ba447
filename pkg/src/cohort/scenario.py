"""Scenario files: a session config plus a scripted conversation to run.

Scenarios are YAML whose top-level keys mirror SessionConfig field names.
Each script entry may carry expectations (selection order, policy kinds,
world predicates, speech checks) so a scenario doubles as a regression test.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .adapters import HttpEndpoint, Purpose, ScriptRule
from .coordinator import FallbackMode, TurnRecord
from .core import AgentProfile
from .executor import DurationModel
from .session import BackendConfig, Session, SessionConfig, create_session
from .world import AgentBody, Bounds, Entity, HeadPose, Pose2D, WorldState

PREDICATE_RE = re.compile(
    r"^distance\(\s*([a-z][a-z0-9_]*)\s*,\s*([a-z][a-z0-9_]*)\s*\)\s*"
    r"(decreases|increases|<=|>=|<|>)\s*([0-9.]+)?$"
)


class ScenarioError(ValueError):
    """The scenario file cannot be parsed into a runnable scenario."""


@dataclass(frozen=True)
class Expectations:
    selected: tuple[str, ...] | None = None
    reason: str | None = None
    policy_kinds: dict[str, tuple[str, ...]] = field(default_factory=dict)
    world_checks: tuple[str, ...] = ()
    speak_contains: dict[str, str] = field(default_factory=dict)
    speak_texts_distinct: bool = False


@dataclass(frozen=True)
class ScriptedTurn:
    text: str
    addressee: str | None = None
    expect: Expectations | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SessionConfig
    script: tuple[ScriptedTurn, ...]


@dataclass(frozen=True)
class ScenarioResult:
    passed: bool
    failures: tuple[str, ...]
    log_path: Path | None
    turns: tuple[TurnRecord, ...]
    session: Session


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _load_pose(data: dict, where: str) -> Pose2D:
    try:
        return Pose2D(float(data["x"]), float(data["y"]), float(data.get("heading_deg", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: bad pose: {exc}") from exc


def _load_world(data: dict) -> WorldState:
    if not isinstance(data, dict):
        raise ScenarioError("world: expected a mapping")
    bounds = None
    if "bounds" in data:
        b = data["bounds"]
        try:
            bounds = Bounds(float(b["min_x"]), float(b["min_y"]), float(b["max_x"]), float(b["max_y"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"world.bounds: {exc}") from exc
    agents = {}
    for agent_id, spec in _require(data, "agents", "world").items():
        agents[agent_id] = AgentBody(pose=_load_pose(spec, f"world.agents.{agent_id}"), head=HeadPose())
    entities = []
    for index, spec in enumerate(data.get("entities", [])):
        where = f"world.entities[{index}]"
        entities.append(
            Entity(
                str(_require(spec, "id", where)),
                str(_require(spec, "label", where)),
                _load_pose(spec, where),
            )
        )
    kwargs = {
        "agents": agents,
        "human": _load_pose(_require(data, "human", "world"), "world.human"),
        "entities": tuple(entities),
    }
    if bounds is not None:
        kwargs["bounds"] = bounds
    if "fov_half_angle_deg" in data:
        kwargs["fov_half_angle_deg"] = float(data["fov_half_angle_deg"])
    if "fov_range_m" in data:
        kwargs["fov_range_m"] = float(data["fov_range_m"])
    try:
        return WorldState(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"world: {exc}") from exc


def _load_backend(data: dict) -> BackendConfig:
    kind = str(data.get("kind", "scripted"))
    if kind == "scripted":
        rules = []
        for index, spec in enumerate(data.get("rules", [])):
            where = f"backend.rules[{index}]"
            purpose_name = str(_require(spec, "purpose", where))
            try:
                purpose = Purpose(purpose_name)
            except ValueError as exc:
                raise ScenarioError(f"{where}: unknown purpose {purpose_name!r}") from exc
            rules.append(
                ScriptRule(
                    purpose=purpose,
                    match=str(_require(spec, "match", where)),
                    response=str(_require(spec, "response", where)),
                    once=bool(spec.get("once", False)),
                )
            )
        return BackendConfig(kind="scripted", rules=tuple(rules))
    if kind == "http":
        endpoint_data = _require(data, "endpoint", "backend")
        try:
            endpoint = HttpEndpoint(
                base_url=str(endpoint_data["base_url"]),
                model_name=str(endpoint_data["model_name"]),
                auth_token_env_var=str(endpoint_data.get("auth_token_env_var", "")),
                timeout_ms=int(endpoint_data.get("timeout_ms", 20000)),
                retries=int(endpoint_data.get("retries", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"backend.endpoint: {exc}") from exc
        return BackendConfig(kind="http", endpoint=endpoint)
    raise ScenarioError(f"backend.kind: unknown kind {kind!r}")


def _load_expectations(data: dict, roster_ids: set[str], where: str) -> Expectations:
    unknown = set(data) - {
        "selected",
        "reason",
        "policy_kinds",
        "world",
        "speak_contains",
        "speak_texts_distinct",
    }
    if unknown:
        raise ScenarioError(f"{where}: unknown expectation keys {sorted(unknown)}")
    selected = None
    if "selected" in data:
        selected = tuple(str(a) for a in data["selected"])
        bad = [a for a in selected if a not in roster_ids]
        if bad:
            raise ScenarioError(f"{where}: selected references non-roster agents {bad}")
    policy_kinds = {}
    for agent_id, kinds in data.get("policy_kinds", {}).items():
        if agent_id not in roster_ids:
            raise ScenarioError(f"{where}: policy_kinds references non-roster agent {agent_id!r}")
        policy_kinds[agent_id] = tuple(str(k) for k in kinds)
    world_checks = tuple(str(check) for check in data.get("world", []))
    for check in world_checks:
        if not PREDICATE_RE.match(check):
            raise ScenarioError(f"{where}: unparseable world predicate {check!r}")
    speak_contains = {}
    for agent_id, needle in data.get("speak_contains", {}).items():
        if agent_id not in roster_ids:
            raise ScenarioError(f"{where}: speak_contains references non-roster agent {agent_id!r}")
        speak_contains[agent_id] = str(needle)
    return Expectations(
        selected=selected,
        reason=data.get("reason"),
        policy_kinds=policy_kinds,
        world_checks=world_checks,
        speak_contains=speak_contains,
        speak_texts_distinct=bool(data.get("speak_texts_distinct", False)),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected a top-level mapping")

    roster = []
    for index, spec in enumerate(_require(data, "roster", str(path))):
        where = f"roster[{index}]"
        roster.append(
            AgentProfile(
                id=str(_require(spec, "id", where)),
                display_name=str(_require(spec, "display_name", where)),
                persona=str(spec.get("persona", "")),
                registration_index=index,
            )
        )
    roster_ids = {p.id for p in roster}

    durations = DurationModel()
    overrides = data.get("durations", {})
    if overrides:
        known = {f.name for f in fields(DurationModel)}
        unknown = set(overrides) - known
        if unknown:
            raise ScenarioError(f"durations: unknown keys {sorted(unknown)}")
        durations = replace(durations, **overrides)

    try:
        fallback = FallbackMode(str(data.get("fallback", "argmax")))
    except ValueError as exc:
        raise ScenarioError(f"fallback: {exc}") from exc

    config = SessionConfig(
        roster=tuple(roster),
        world=_load_world(_require(data, "world", str(path))),
        backend=_load_backend(data.get("backend", {"kind": "scripted"})),
        threshold=float(data.get("threshold", 0.5)),
        fallback=fallback,
        retry_cap=int(data.get("retry_cap", 2)),
        durations=durations,
        seed=int(data.get("seed", 0)),
        time_dilation=float(data.get("time_dilation", 0.0)),
        context_window=int(data.get("context_window", 40)),
        external_scenes=bool(data.get("external_scenes", False)),
    )

    script = []
    for index, spec in enumerate(data.get("script", [])):
        where = f"script[{index}]"
        addressee = spec.get("addressee")
        if addressee is not None and addressee not in roster_ids:
            raise ScenarioError(f"{where}: addressee {addressee!r} is not in the roster")
        expect = None
        if "expect" in spec:
            expect = _load_expectations(spec["expect"], roster_ids, f"{where}.expect")
        script.append(
            ScriptedTurn(
                text=str(_require(spec, "utterance", where)),
                addressee=addressee,
                expect=expect,
            )
        )

    name = str(data.get("name", path.stem))
    return Scenario(name=name, config=config, script=tuple(script))


def _position(world: WorldState, name: str) -> tuple[float, float]:
    if name == "human":
        return world.human.x, world.human.y
    if name in world.agents:
        pose = world.agents[name].pose
        return pose.x, pose.y
    for entity in world.entities:
        if entity.id == name:
            return entity.position.x, entity.position.y
    raise ScenarioError(f"world predicate references unknown name {name!r}")


def _distance(world: WorldState, a: str, b: str) -> float:
    ax, ay = _position(world, a)
    bx, by = _position(world, b)
    return ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5


def check_world_predicate(check: str, before: WorldState, after: WorldState) -> str | None:
    """None when satisfied, else a human-readable mismatch."""
    match = PREDICATE_RE.match(check)
    if match is None:
        return f"unparseable predicate {check!r}"
    a, b, op, bound = match.groups()
    d_after = _distance(after, a, b)
    if op in ("decreases", "increases"):
        d_before = _distance(before, a, b)
        ok = d_after < d_before if op == "decreases" else d_after > d_before
        if not ok:
            return f"{check}: distance went {d_before:.3f} m -> {d_after:.3f} m"
        return None
    if bound is None:
        return f"{check}: comparison needs a bound"
    limit = float(bound)
    ok = {
        "<": d_after < limit,
        "<=": d_after <= limit,
        ">": d_after > limit,
        ">=": d_after >= limit,
    }[op]
    if not ok:
        return f"{check}: distance is {d_after:.3f} m"
    return None


def _check_turn(turn_index: int, record: TurnRecord, expect: Expectations, before: WorldState, after: WorldState) -> list[str]:
    failures = []

    def fail(message: str) -> None:
        failures.append(f"turn {turn_index}: {message}")

    if expect.selected is not None and record.selected != expect.selected:
        fail(f"expected selected {list(expect.selected)}, got {list(record.selected)}")
    if expect.reason is not None and record.reason.value != expect.reason:
        fail(f"expected reason {expect.reason}, got {record.reason.value}")
    for agent_id, kinds in expect.policy_kinds.items():
        policy = record.policies.get(agent_id)
        if policy is None:
            fail(f"no policy recorded for {agent_id}")
            continue
        got = tuple(a.kind.value for a in policy.actions)
        if got != kinds:
            fail(f"{agent_id} policy kinds {list(got)}, expected {list(kinds)}")
    for check in expect.world_checks:
        problem = check_world_predicate(check, before, after)
        if problem is not None:
            fail(problem)
    spoken = _spoken_texts(record)
    for agent_id, needle in expect.speak_contains.items():
        texts = spoken.get(agent_id, [])
        if not any(needle.lower() in text.lower() for text in texts):
            fail(f"{agent_id} never said {needle!r} (said: {texts})")
    if expect.speak_texts_distinct:
        all_texts = [text for texts in spoken.values() for text in texts]
        if len(set(all_texts)) != len(all_texts):
            fail(f"spoken texts are not pairwise distinct: {all_texts}")
    return failures


def _spoken_texts(record: TurnRecord) -> dict[str, list[str]]:
    spoken: dict[str, list[str]] = {}
    for agent_id, policy in record.policies.items():
        statuses = record.statuses.get(agent_id, ())
        for status, action in zip(statuses, policy.actions):
            if action.kind.value == "speak" and status.outcome.value == "success":
                spoken.setdefault(agent_id, []).append(str(action.params["text"]))
    return spoken


def run_scenario(
    path: str | Path,
    seed: int | None = None,
    log_path: str | Path | None = None,
    persist_log: bool = True,
    time_dilation: float | None = None,
) -> ScenarioResult:
    """Run the whole script, checking expectations after each turn.

    The session id is derived from the scenario name and seed, so two runs of
    the same scenario write byte-identical logs.
    """
    scenario = load_scenario(path)
    config = scenario.config
    if seed is not None:
        config = replace(config, seed=seed)
    if time_dilation is not None:
        config = replace(config, time_dilation=time_dilation)
    config = replace(
        config,
        session_id=f"{scenario.name}-seed{config.seed}",
        log_path=Path(log_path) if log_path is not None else None,
        persist_log=persist_log,
    )
    session = create_session(config)
    failures: list[str] = []
    records: list[TurnRecord] = []
    try:
        for turn_index, turn in enumerate(scenario.script):
            before = session.world
            record = session.post_utterance(turn.text, turn.addressee)
            records.append(record)
            if turn.expect is not None:
                failures.extend(_check_turn(turn_index, record, turn.expect, before, session.world))
    finally:
        session.close()
    return ScenarioResult(
        passed=not failures,
        failures=tuple(failures),
        log_path=session.log_path,
        turns=tuple(records),
        session=session,
    )
