from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohort.actions import (
    DEFAULT_POLICY_CAP,
    GESTURES,
    HAND_STATES,
    LOCOMOTE_DIRECTIONS,
    POSTURES,
    SCHEMAS,
    ActionSpec,
    Policy,
    PrimitiveKind,
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
from cohort.core import AgentProfile


def issue_codes(spec: ActionSpec) -> list[tuple[str, str | None]]:
    return [(i.code, i.param) for i in validate_action(spec)]


class TestBuilders:
    @pytest.mark.parametrize(
        "spec",
        [
            speak("Hello there."),
            speak("Quiet aside.", volume=0.2),
            gesture("wave"),
            gesture("nod", speed=1.9),
            posture("sit"),
            head_move(45.0),
            head_move(-90.0, tilt_deg=30.0),
            locomote("forward", 1.5),
            hand("open"),
        ],
    )
    def test_builders_produce_valid_actions(self, spec):
        assert validate_action(spec) == []

    def test_speak_fills_volume_default(self):
        assert speak("hi").params["volume"] == 0.7

    def test_gesture_fills_speed_default(self):
        assert gesture("nod").params["speed"] == 1.0

    def test_head_move_fills_tilt_default(self):
        assert head_move(10.0).params["tilt_deg"] == 0.0

    def test_make_action_coerces_int_to_float(self):
        spec = make_action(PrimitiveKind.LOCOMOTE, direction="left", magnitude=1)
        assert spec.params["magnitude"] == 1.0
        assert isinstance(spec.params["magnitude"], float)

    def test_make_action_does_not_coerce_bool(self):
        spec = make_action(PrimitiveKind.SPEAK, text="hi", volume=True)
        assert spec.params["volume"] is True
        assert issue_codes(spec) == [("bad-type", "volume")]

    def test_make_action_does_not_validate(self):
        spec = make_action(PrimitiveKind.GESTURE, type="moonwalk")
        assert issue_codes(spec) == [("out-of-range", "type")]


class TestValidateAction:
    def test_unknown_kind(self):
        spec = ActionSpec("teleport", {"x": 1.0})  # type: ignore[arg-type]
        assert issue_codes(spec) == [("unknown-kind", None)]

    def test_missing_param_reported_per_name(self):
        spec = ActionSpec(PrimitiveKind.HEAD_MOVE, {})
        assert issue_codes(spec) == [
            ("missing-param", "pan_deg"),
            ("missing-param", "tilt_deg"),
        ]

    def test_declared_default_does_not_excuse_absence(self):
        spec = ActionSpec(PrimitiveKind.SPEAK, {"text": "hi"})
        assert issue_codes(spec) == [("missing-param", "volume")]

    def test_unknown_param_rejected(self):
        spec = ActionSpec(PrimitiveKind.HAND, {"state": "open", "force": 3.0})
        assert issue_codes(spec) == [("unknown-param", "force")]

    @pytest.mark.parametrize("value", [None, 7, ["sit"]])
    def test_choice_requires_string(self, value):
        spec = ActionSpec(PrimitiveKind.POSTURE, {"pose": value})
        assert issue_codes(spec) == [("bad-type", "pose")]

    def test_choice_outside_set(self):
        spec = ActionSpec(PrimitiveKind.POSTURE, {"pose": "crouch"})
        assert issue_codes(spec) == [("out-of-range", "pose")]

    @pytest.mark.parametrize("text", ["", "   ", "\t\n"])
    def test_blank_speak_text_rejected(self, text):
        spec = ActionSpec(PrimitiveKind.SPEAK, {"text": text, "volume": 0.5})
        assert issue_codes(spec) == [("out-of-range", "text")]

    @pytest.mark.parametrize("value", ["0.5", None, [0.5], True, False])
    def test_number_rejects_non_numeric_and_bool(self, value):
        spec = ActionSpec(PrimitiveKind.SPEAK, {"text": "hi", "volume": value})
        assert issue_codes(spec) == [("bad-type", "volume")]

    @pytest.mark.parametrize("value", [math.nan, math.inf, -math.inf])
    def test_non_finite_number_rejected(self, value):
        spec = ActionSpec(PrimitiveKind.HEAD_MOVE, {"pan_deg": value, "tilt_deg": 0.0})
        issues = validate_action(spec)
        assert [(i.code, i.param) for i in issues] == [("out-of-range", "pan_deg")]
        assert "finite" in issues[0].message

    @pytest.mark.parametrize(
        "kind,params",
        [
            (PrimitiveKind.SPEAK, {"text": "hi", "volume": 0.0}),
            (PrimitiveKind.SPEAK, {"text": "hi", "volume": 1.0}),
            (PrimitiveKind.HEAD_MOVE, {"pan_deg": -90.0, "tilt_deg": 30.0}),
            (PrimitiveKind.HEAD_MOVE, {"pan_deg": 90.0, "tilt_deg": -30.0}),
            (PrimitiveKind.GESTURE, {"type": "nod", "speed": 2.0}),
            (PrimitiveKind.LOCOMOTE, {"direction": "backward", "magnitude": 2.0}),
        ],
    )
    def test_inclusive_bounds_accepted(self, kind, params):
        assert validate_action(ActionSpec(kind, params)) == []

    @pytest.mark.parametrize(
        "kind,params,param",
        [
            (PrimitiveKind.SPEAK, {"text": "hi", "volume": -0.01}, "volume"),
            (PrimitiveKind.SPEAK, {"text": "hi", "volume": 1.01}, "volume"),
            (PrimitiveKind.HEAD_MOVE, {"pan_deg": 90.5, "tilt_deg": 0.0}, "pan_deg"),
            (PrimitiveKind.HEAD_MOVE, {"pan_deg": 0.0, "tilt_deg": -30.5}, "tilt_deg"),
            (PrimitiveKind.GESTURE, {"type": "nod", "speed": 2.1}, "speed"),
            (PrimitiveKind.LOCOMOTE, {"direction": "left", "magnitude": 2.2}, "magnitude"),
        ],
    )
    def test_values_beyond_bounds_rejected(self, kind, params, param):
        assert issue_codes(ActionSpec(kind, params)) == [("out-of-range", param)]

    @pytest.mark.parametrize(
        "kind,params,param",
        [
            (PrimitiveKind.GESTURE, {"type": "nod", "speed": 0.0}, "speed"),
            (PrimitiveKind.LOCOMOTE, {"direction": "left", "magnitude": 0.0}, "magnitude"),
        ],
    )
    def test_exclusive_minimum_rejects_boundary(self, kind, params, param):
        assert issue_codes(ActionSpec(kind, params)) == [("out-of-range", param)]

    def test_multiple_issues_reported_together(self):
        spec = ActionSpec(PrimitiveKind.GESTURE, {"speed": -1.0, "extra": 1})
        codes = issue_codes(spec)
        assert ("unknown-param", "extra") in codes
        assert ("missing-param", "type") in codes
        assert ("out-of-range", "speed") in codes
        assert len(codes) == 3


class TestValidatePolicy:
    def test_empty_policy(self):
        issues = validate_policy(Policy(()))
        assert [(i.action_index, i.code) for i in issues] == [(None, "empty-policy")]

    def test_cap_exceeded(self):
        actions = tuple(speak(f"line {i}") for i in range(DEFAULT_POLICY_CAP + 1))
        issues = validate_policy(Policy(actions))
        assert [(i.action_index, i.code) for i in issues] == [(None, "policy-too-long")]

    def test_cap_boundary_accepted(self):
        actions = tuple(speak(f"line {i}") for i in range(DEFAULT_POLICY_CAP))
        assert validate_policy(Policy(actions)) == []

    def test_custom_cap(self):
        actions = (speak("a"), speak("b"), speak("c"))
        issues = validate_policy(Policy(actions), cap=2)
        assert [i.code for i in issues] == ["policy-too-long"]

    def test_bad_actions_reported_with_indices(self):
        policy = Policy((speak("fine"), posture("crouch"), hand("open"), gesture("juggle")))
        issues = validate_policy(policy)
        assert [(i.action_index, i.code) for i in issues] == [
            (1, "out-of-range"),
            (3, "out-of-range"),
        ]

    def test_valid_policy_no_issues(self):
        policy = Policy((speak("hello"), locomote("forward", 1.0)))
        assert validate_policy(policy) == []


class TestWireDecoding:
    def test_action_round_trip(self):
        spec = locomote("right", 0.75)
        assert action_from_wire(spec.to_wire()) == spec

    def test_defaults_filled_from_wire(self):
        spec = action_from_wire({"kind": "speak", "params": {"text": "hi"}})
        assert spec.params == {"text": "hi", "volume": 0.7}
        assert validate_action(spec) == []

    def test_wire_int_coerced_to_float(self):
        spec = action_from_wire({"kind": "locomote", "params": {"direction": "left", "magnitude": 2}})
        assert spec.params["magnitude"] == 2.0
        assert isinstance(spec.params["magnitude"], float)

    def test_missing_params_key_means_empty(self):
        spec = action_from_wire({"kind": "posture"})
        assert spec.params == {}
        assert issue_codes(spec) == [("missing-param", "pose")]

    @pytest.mark.parametrize("obj", ["speak", 7, None, ["kind"]])
    def test_non_object_action_rejected(self, obj):
        with pytest.raises(WireFormatError, match="must be an object"):
            action_from_wire(obj)

    @pytest.mark.parametrize("kind", ["SPEAK", "teleport", "", None, 3])
    def test_unknown_kind_rejected(self, kind):
        with pytest.raises(WireFormatError, match="unknown action kind"):
            action_from_wire({"kind": kind, "params": {}})

    def test_non_object_params_rejected(self):
        with pytest.raises(WireFormatError, match="params"):
            action_from_wire({"kind": "hand", "params": ["open"]})

    def test_unknown_wire_params_kept_for_validation(self):
        spec = action_from_wire({"kind": "hand", "params": {"state": "open", "grip": 1}})
        assert issue_codes(spec) == [("unknown-param", "grip")]

    def test_policy_round_trip(self):
        policy = Policy((speak("hello"), gesture("wave")))
        assert policy_from_wire(policy.to_wire()) == policy

    @pytest.mark.parametrize(
        "obj",
        [None, [], "policy", {}, {"actions": None}, {"actions": {"0": {}}}],
    )
    def test_bad_policy_envelope_rejected(self, obj):
        with pytest.raises(WireFormatError, match="actions"):
            policy_from_wire(obj)

    def test_bad_nested_action_surfaces(self):
        with pytest.raises(WireFormatError, match="unknown action kind"):
            policy_from_wire({"actions": [{"kind": "fly", "params": {}}]})


class TestCapabilityManifest:
    @pytest.fixture
    def manifest(self):
        return capability_manifest(AgentProfile("sam", "Sam", "a helper", 0))

    def test_header_names_the_agent(self, manifest):
        assert manifest.text.splitlines()[0] == "Sam can perform these action primitives:"

    def test_one_line_per_kind(self, manifest):
        lines = manifest.text.splitlines()[1:]
        assert [line.split("(", 1)[0] for line in lines] == [f"- {k.value}" for k in PrimitiveKind]

    def test_entries_mirror_declared_schemas(self, manifest):
        assert {e.kind: e.params for e in manifest.entries} == SCHEMAS

    def test_ranges_and_defaults_rendered(self, manifest):
        assert "- speak(text: non-empty string; volume: [0, 1] (default 0.7))" in manifest.text
        assert "- gesture(type: {" + ", ".join(GESTURES) + "}; speed: (0, 2] (default 1))" in manifest.text
        assert "- locomote(direction: {" + ", ".join(LOCOMOTE_DIRECTIONS) + "}; magnitude: (0, 2])" in manifest.text
        assert "- posture(pose: {" + ", ".join(POSTURES) + "})" in manifest.text
        assert "- hand(state: {" + ", ".join(HAND_STATES) + "})" in manifest.text
        assert "- head_move(pan_deg: [-90, 90]; tilt_deg: [-30, 30])" in manifest.text

    def test_declared_numeric_edges_match_validation(self, manifest):
        # The manifest must not promise a value the validator would refuse.
        for entry in manifest.entries:
            base = valid_params(entry.kind)
            for schema in entry.params:
                if schema.kind != "number":
                    continue
                low_ok = dict(base, **{schema.name: schema.minimum + (0.25 if schema.min_exclusive else 0.0)})
                high_ok = dict(base, **{schema.name: schema.maximum})
                below = dict(base, **{schema.name: schema.minimum - 0.25})
                above = dict(base, **{schema.name: schema.maximum + 0.25})
                assert validate_action(ActionSpec(entry.kind, low_ok)) == []
                assert validate_action(ActionSpec(entry.kind, high_ok)) == []
                assert issue_codes(ActionSpec(entry.kind, below)) == [("out-of-range", schema.name)]
                assert issue_codes(ActionSpec(entry.kind, above)) == [("out-of-range", schema.name)]


def valid_params(kind: PrimitiveKind) -> dict[str, object]:
    """Mid-range sample values for every declared parameter of a kind."""
    out: dict[str, object] = {}
    for schema in SCHEMAS[kind]:
        if schema.kind == "choice":
            out[schema.name] = schema.choices[0]
        elif schema.kind == "number":
            out[schema.name] = (schema.minimum + schema.maximum) / 2.0
        else:
            out[schema.name] = "sample text"
    return out


def param_strategy(schema) -> st.SearchStrategy:
    if schema.kind == "choice":
        return st.sampled_from(schema.choices)
    if schema.kind == "number":
        return st.floats(
            min_value=schema.minimum,
            max_value=schema.maximum,
            exclude_min=schema.min_exclusive,
            allow_nan=False,
        )
    return st.text(min_size=1).filter(lambda s: s.strip())


_PARAMS_BY_KIND = {
    kind: st.fixed_dictionaries({schema.name: param_strategy(schema) for schema in schemas})
    for kind, schemas in SCHEMAS.items()
}


@st.composite
def valid_action_specs(draw) -> ActionSpec:
    kind = draw(st.sampled_from(sorted(PrimitiveKind, key=lambda k: k.value)))
    return ActionSpec(kind, draw(_PARAMS_BY_KIND[kind]))


class TestValidationProperties:
    @given(valid_action_specs())
    def test_in_schema_values_always_validate(self, spec):
        assert validate_action(spec) == []

    @given(valid_action_specs(), st.data())
    def test_dropping_any_param_is_reported(self, spec, data):
        name = data.draw(st.sampled_from(sorted(spec.params)))
        stripped = {k: v for k, v in spec.params.items() if k != name}
        assert issue_codes(ActionSpec(spec.kind, stripped)) == [("missing-param", name)]

    @given(valid_action_specs())
    def test_wire_round_trip_preserves_action(self, spec):
        assert action_from_wire(spec.to_wire()) == spec
