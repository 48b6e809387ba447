from __future__ import annotations

import copy
from pathlib import Path

import pytest
import yaml

from cohort.coordinator import FallbackMode
from cohort.scenario import (
    ScenarioError,
    check_world_predicate,
    load_scenario,
    run_scenario,
)
from cohort.world import AgentBody, Bounds, Pose2D, WorldState
from conftest import DEMO_SCENARIO, PLAN_OK, SCORE_UNIFORM

MINI = {
    "name": "mini",
    "roster": [
        {"id": "sam", "display_name": "Sam"},
        {"id": "journey", "display_name": "Journey"},
    ],
    "world": {
        "bounds": {"min_x": 0, "min_y": 0, "max_x": 10, "max_y": 10},
        "human": {"x": 5, "y": 2, "heading_deg": 180},
        "agents": {
            "sam": {"x": 3, "y": 2, "heading_deg": 0},
            "journey": {"x": 9.5, "y": 2, "heading_deg": 180},
        },
    },
    "backend": {
        "kind": "scripted",
        "rules": [
            {"purpose": "plan", "match": "*", "response": PLAN_OK},
            {"purpose": "score", "match": "*", "response": SCORE_UNIFORM},
        ],
    },
    "script": [{"utterance": "Hello."}],
}


@pytest.fixture
def write_scenario(tmp_path):
    def _write(data, name="scenario.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    return _write


def mutated(**changes) -> dict:
    data = copy.deepcopy(MINI)
    data.update(changes)
    return data


class TestLoadScenario:
    def test_demo_scenario_parses(self):
        scenario = load_scenario(DEMO_SCENARIO)
        assert scenario.name == "demo_fig3"
        assert [p.id for p in scenario.config.roster] == ["sam", "journey"]
        assert [p.registration_index for p in scenario.config.roster] == [0, 1]
        assert len(scenario.script) == 3
        assert all(turn.expect is not None for turn in scenario.script)
        # The third turn addresses Journey by leading display name, so the
        # structural field stays unset and resolution happens at run time.
        assert scenario.script[2].addressee is None
        assert scenario.script[2].text.startswith("Journey,")
        assert scenario.script[2].expect.reason == "addressee_override"

    def test_minimal_scenario_parses(self, write_scenario):
        scenario = load_scenario(write_scenario(MINI))
        assert scenario.name == "mini"
        assert scenario.config.threshold == 0.5
        assert scenario.config.fallback is FallbackMode.ARGMAX
        assert scenario.config.world.agents["journey"].pose.x == 9.5
        assert scenario.script[0].text == "Hello."
        assert scenario.script[0].expect is None

    def test_name_defaults_to_file_stem(self, write_scenario):
        data = mutated()
        del data["name"]
        scenario = load_scenario(write_scenario(data, "fallback_name.yaml"))
        assert scenario.name == "fallback_name"

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("roster: [unclosed", encoding="utf-8")
        with pytest.raises(ScenarioError, match="not valid YAML"):
            load_scenario(path)

    def test_non_mapping_top_level(self, write_scenario):
        with pytest.raises(ScenarioError, match="top-level mapping"):
            load_scenario(write_scenario(["not", "a", "mapping"]))

    @pytest.mark.parametrize(
        ("breakage", "match"),
        [
            (lambda d: d["roster"][0].pop("id"), r"roster\[0\]: missing required key 'id'"),
            (lambda d: d["script"][0].pop("utterance"), r"script\[0\]: missing required key 'utterance'"),
            (lambda d: d["script"][0].update(addressee="zed"), "addressee 'zed' is not in the roster"),
            (lambda d: d["world"].pop("human"), "world: missing required key 'human'"),
            (lambda d: d["world"]["agents"]["sam"].pop("x"), "world.agents.sam: bad pose"),
            (lambda d: d["backend"]["rules"][0].update(purpose="divination"), "unknown purpose 'divination'"),
            (lambda d: d["backend"].update(kind="telepathy"), "unknown kind 'telepathy'"),
            (lambda d: d.update(durations={"speak_wps": 2.0, "blink_ms": 1}), r"durations: unknown keys \['blink_ms'\]"),
            (lambda d: d.update(fallback="shrug"), "fallback"),
        ],
    )
    def test_loader_errors_carry_location(self, write_scenario, breakage, match):
        data = mutated()
        breakage(data)
        with pytest.raises(ScenarioError, match=match):
            load_scenario(write_scenario(data))

    @pytest.mark.parametrize(
        ("expect", "match"),
        [
            ({"surprise": 1}, "unknown expectation keys"),
            ({"selected": ["zed"]}, "non-roster agents"),
            ({"policy_kinds": {"zed": ["speak"]}}, "non-roster agent 'zed'"),
            ({"speak_contains": {"zed": "hi"}}, "non-roster agent 'zed'"),
            ({"world": ["distance(sam, journey) wobbles"]}, "unparseable world predicate"),
        ],
    )
    def test_expectation_errors(self, write_scenario, expect, match):
        data = mutated()
        data["script"][0]["expect"] = expect
        with pytest.raises(ScenarioError, match=match):
            load_scenario(write_scenario(data))

    def test_durations_override_applied(self, write_scenario):
        data = mutated(durations={"speak_min_ms": 900, "hand_ms": 10})
        scenario = load_scenario(write_scenario(data))
        assert scenario.config.durations.speak_min_ms == 900
        assert scenario.config.durations.hand_ms == 10
        assert scenario.config.durations.posture_ms == 2000

    def test_http_backend_parses(self, write_scenario):
        data = mutated(
            backend={
                "kind": "http",
                "endpoint": {"base_url": "http://127.0.0.1:1", "model_name": "m", "retries": 0},
            }
        )
        scenario = load_scenario(write_scenario(data))
        assert scenario.config.backend.kind == "http"
        assert scenario.config.backend.endpoint.retries == 0


def two_worlds(journey_x_after: float) -> tuple[WorldState, WorldState]:
    def world_at(x: float) -> WorldState:
        return WorldState(
            bounds=Bounds(0.0, 0.0, 10.0, 10.0),
            agents={"journey": AgentBody(pose=Pose2D(x, 2.0, 180.0))},
            human=Pose2D(5.0, 2.0),
        )

    return world_at(9.5), world_at(journey_x_after)


class TestWorldPredicates:
    def test_decreases_satisfied(self):
        before, after = two_worlds(7.5)
        assert check_world_predicate("distance(journey, human) decreases", before, after) is None

    def test_decreases_violated_mentions_distances(self):
        before, after = two_worlds(9.5)
        problem = check_world_predicate("distance(journey, human) decreases", before, after)
        assert problem is not None and "4.500 m -> 4.500 m" in problem

    def test_increases(self):
        before, after = two_worlds(10.0)
        assert check_world_predicate("distance(journey, human) increases", before, after) is None

    @pytest.mark.parametrize(
        ("check", "ok"),
        [
            ("distance(journey, human) < 3.0", True),
            ("distance(journey, human) < 2.5", False),
            ("distance(journey, human) <= 2.5", True),
            ("distance(journey, human) > 2.0", True),
            ("distance(journey, human) >= 2.6", False),
        ],
    )
    def test_bound_comparisons(self, check, ok):
        before, after = two_worlds(7.5)  # distance to human becomes 2.5
        problem = check_world_predicate(check, before, after)
        assert (problem is None) is ok

    def test_comparison_requires_bound(self):
        before, after = two_worlds(7.5)
        assert "needs a bound" in check_world_predicate("distance(journey, human) <", before, after)

    def test_unknown_name(self):
        before, after = two_worlds(7.5)
        with pytest.raises(ScenarioError, match="unknown name 'ghost'"):
            check_world_predicate("distance(ghost, human) decreases", before, after)

    def test_unparseable_text(self):
        before, after = two_worlds(7.5)
        assert "unparseable" in check_world_predicate("journey near human", before, after)


class TestRunScenario:
    def test_demo_scenario_passes(self):
        result = run_scenario(DEMO_SCENARIO, persist_log=False)
        assert result.failures == ()
        assert result.passed is True
        assert len(result.turns) == 3
        assert result.session.closed

    def test_session_id_derives_from_name_and_seed(self, write_scenario):
        result = run_scenario(write_scenario(MINI), seed=3, persist_log=False)
        assert result.session.id == "mini-seed3"

    def test_log_written_by_default(self, write_scenario, tmp_path):
        result = run_scenario(write_scenario(MINI))
        assert result.log_path == tmp_path / "logs" / "mini-seed0.jsonl"
        assert result.log_path.exists()

    def test_explicit_log_path(self, write_scenario, tmp_path):
        target = tmp_path / "custom.jsonl"
        result = run_scenario(write_scenario(MINI), log_path=target)
        assert result.log_path == target

    def test_failed_expectation_reported(self, write_scenario):
        data = mutated()
        data["script"][0]["expect"] = {"selected": ["journey"]}
        result = run_scenario(write_scenario(data), persist_log=False)
        assert result.passed is False
        assert len(result.failures) == 1
        assert result.failures[0].startswith("turn 0: expected selected ['journey']")

    def test_speak_expectation_failures(self, write_scenario):
        data = mutated()
        data["script"][0]["expect"] = {
            "speak_contains": {"sam": "nonexistent phrase"},
            "speak_texts_distinct": True,
        }
        result = run_scenario(write_scenario(data), persist_log=False)
        # Both agents speak the same default line, so distinctness fails too.
        assert any("never said" in f for f in result.failures)
        assert any("not pairwise distinct" in f for f in result.failures)

    def test_reason_and_policy_kind_mismatches(self, write_scenario):
        data = mutated()
        data["script"][0]["expect"] = {
            "reason": "addressee_override",
            "policy_kinds": {"sam": ["gesture", "speak"]},
        }
        result = run_scenario(write_scenario(data), persist_log=False)
        assert any("expected reason addressee_override" in f for f in result.failures)
        assert any("sam policy kinds" in f for f in result.failures)

    def test_world_check_failure(self, write_scenario):
        data = mutated()
        data["script"][0]["expect"] = {"world": ["distance(journey, human) decreases"]}
        result = run_scenario(write_scenario(data), persist_log=False)
        assert any("distance went" in f for f in result.failures)

    def test_session_closed_even_on_failures(self, write_scenario):
        data = mutated()
        data["script"][0]["expect"] = {"selected": ["journey"]}
        result = run_scenario(write_scenario(data), persist_log=False)
        assert result.session.closed
