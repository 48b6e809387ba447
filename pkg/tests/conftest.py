from __future__ import annotations

from pathlib import Path

import pytest

from cohort.adapters import Purpose, ScriptRule, ScriptedBackend
from cohort.core import AgentProfile
from cohort.session import BackendConfig, SessionConfig
from cohort.world import AgentBody, Bounds, Entity, Pose2D, WorldState

DEMO_SCENARIO = Path(__file__).resolve().parents[1] / "src" / "cohort" / "scenarios" / "demo_fig3.yaml"

PLAN_OK = '{"actions":[{"kind":"speak","params":{"text":"Hello there.","volume":0.7}}]}'
SCORE_UNIFORM = '{"scores":{"sam":0.9,"journey":0.8}}'


@pytest.fixture(autouse=True)
def _isolated_log_dir(tmp_path, monkeypatch):
    """Every test writes logs under its own tmp dir, never the repo."""
    monkeypatch.setenv("COHORT_LOG_DIR", str(tmp_path / "logs"))


@pytest.fixture
def roster() -> tuple[AgentProfile, ...]:
    return (
        AgentProfile("sam", "Sam", "A warm host.", 0),
        AgentProfile("journey", "Journey", "A mobile assistant.", 1),
    )


@pytest.fixture
def world() -> WorldState:
    return WorldState(
        bounds=Bounds(0.0, 0.0, 10.0, 10.0),
        agents={
            "sam": AgentBody(pose=Pose2D(3.0, 2.0, 0.0)),
            "journey": AgentBody(pose=Pose2D(9.5, 2.0, 180.0)),
        },
        human=Pose2D(5.0, 2.0, 180.0),
        entities=(
            Entity("bottle_blue", "blue water bottle", Pose2D(4.0, 2.5)),
            Entity("bottle_green", "green water bottle", Pose2D(4.2, 1.5)),
        ),
    )


def default_rules(
    plan_reply: str = PLAN_OK, score_reply: str = SCORE_UNIFORM
) -> tuple[ScriptRule, ...]:
    return (
        ScriptRule(Purpose.PLAN, "*", plan_reply),
        ScriptRule(Purpose.SCORE, "*", score_reply),
    )


@pytest.fixture
def scripted_backend() -> ScriptedBackend:
    return ScriptedBackend(list(default_rules()))


@pytest.fixture
def session_config(roster, world) -> SessionConfig:
    return SessionConfig(
        roster=roster,
        world=world,
        backend=BackendConfig(kind="scripted", rules=default_rules()),
        session_id="test-session",
        persist_log=False,
    )
