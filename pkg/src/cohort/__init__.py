"""Deterministic runtime for one human conversing with several embodied agents.

Each agent runs its own perceive-plan-act loop against a simulated 2D world;
a central coordinator scores response likelihood, selects responders, and
serializes their turns under a global speech lock. Every run is event-sourced
to a JSONL log that replays to the exact same state.
"""

from .actions import (
    ActionSpec,
    CapabilityManifest,
    ExecutionStatus,
    Outcome,
    Policy,
    PolicyIssue,
    PrimitiveKind,
    ValidationIssue,
    WireFormatError,
    action_from_wire,
    capability_manifest,
    gesture,
    hand,
    head_move,
    locomote,
    make_action,
    policy_from_wire,
    posture,
    speak,
    validate_action,
    validate_policy,
)
from .adapters import (
    CompletionAdapter,
    CompletionRequest,
    HttpBackend,
    HttpEndpoint,
    Purpose,
    ScriptConfigError,
    ScriptedBackend,
    ScriptRule,
    TransportError,
)
from .bench import BenchRow, bench, bench_sweep, linear_fit
from .coordinator import (
    FallbackMode,
    ScoreSource,
    ScoreVector,
    SelectionReason,
    SelectionResult,
    TurnRecord,
    resolve_addressee,
    run_turn,
    score_agents,
    select_responders,
)
from .core import (
    HUMAN_SPEAKER,
    AgentProfile,
    InteractionContext,
    RosterError,
    TimeRegressionError,
    Utterance,
    context_append,
    render_context,
    validate_roster,
)
from .executor import DurationModel, SpeechLock, apply_effect, execute_action, execute_policy
from .perception import Observation, SceneDescription, SceneSource, describe_scene, observe
from .planner import (
    FALLBACK_TEXT,
    ParseError,
    PlanOutcome,
    build_planning_prompt,
    fallback_policy,
    parse_policy,
    plan,
)
from .scenario import Scenario, ScenarioError, ScenarioResult, load_scenario, run_scenario
from .session import (
    BackendConfig,
    ConfigError,
    CorruptLogError,
    EventRecord,
    ReplayResult,
    Session,
    SessionClosedError,
    SessionConfig,
    create_session,
    replay,
)
from .world import (
    AgentBody,
    Bounds,
    Entity,
    HeadPose,
    Pose2D,
    UnknownAgentError,
    WorldRangeError,
    WorldState,
    apply_head_move,
    apply_locomotion,
    bearing_deg,
    visible_entities,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
