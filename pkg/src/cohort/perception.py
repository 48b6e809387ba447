"""Per-agent sensing: fuse heard speech and the simulated view into one observation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .core import Utterance
from .world import HUMAN_ENTITY_ID, HeadPose, Pose2D, WorldState, bearing_deg, visible_entities
from .wire import canonical_json

logger = logging.getLogger(__name__)

SCENE_TEXT_MAX_CHARS = 512
EMPTY_SCENE_TEXT = "You see nothing notable."
HUMAN_LABEL = "the human user"


class SceneSource(Enum):
    SIM_TEMPLATE = "sim_template"
    EXTERNAL_ADAPTER = "external_adapter"


@dataclass(frozen=True)
class SceneDescription:
    text: str
    visible_ids: tuple[str, ...]
    generated_by: SceneSource

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "visible_ids": list(self.visible_ids),
            "generated_by": self.generated_by.value,
        }


@dataclass(frozen=True)
class Observation:
    agent: str
    heard: Utterance | None
    scene: SceneDescription
    self_pose: Pose2D
    head: HeadPose
    distance_to_human_m: float
    clock_ms: int

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "heard": self.heard.to_dict() if self.heard else None,
            "scene": self.scene.to_dict(),
            "self_pose": self.self_pose.to_dict(),
            "head": self.head.to_dict(),
            "distance_to_human_m": self.distance_to_human_m,
            "clock_ms": self.clock_ms,
        }

    def digest(self) -> str:
        """One-line summary used in scoring requests."""
        sees = ",".join(self.scene.visible_ids) or "nothing"
        heard = "yes" if self.heard else "no"
        return f"{self.agent}: dist_to_human={self.distance_to_human_m:.1f}m sees={sees} heard={heard}"


def describe_scene(world: WorldState, agent: str) -> SceneDescription:
    """Deterministic template over the visible-entity list, nearest first.

    Distances render to one decimal and bearings to whole degrees so golden
    outputs stay stable.
    """
    body = world.body(agent)
    ids = visible_entities(world, agent)
    if not ids:
        return SceneDescription(EMPTY_SCENE_TEXT, (), SceneSource.SIM_TEMPLATE)
    labels = {e.id: e.label for e in world.entities}
    labels[HUMAN_ENTITY_ID] = HUMAN_LABEL
    positions = {e.id: e.position for e in world.entities}
    positions[HUMAN_ENTITY_ID] = world.human
    parts = []
    for entity_id in ids:
        pos = positions[entity_id]
        dist = ((pos.x - body.pose.x) ** 2 + (pos.y - body.pose.y) ** 2) ** 0.5
        bearing = int(round(bearing_deg(body.pose, pos.x, pos.y))) % 360
        parts.append(f"{labels[entity_id]} at {dist:.1f} m bearing {bearing}°")
    return SceneDescription("You see: " + "; ".join(parts) + ".", tuple(ids), SceneSource.SIM_TEMPLATE)


# An external describer receives (world snapshot JSON, agent id) and returns
# plain text. Any exception degrades to the built-in template.
SceneDescriber = Callable[[str, str], str]


def observe(
    world: WorldState,
    agent: str,
    latest: Utterance | None,
    scene_describer: SceneDescriber | None = None,
    on_warning: Callable[[str], None] | None = None,
) -> Observation:
    """Assemble the agent's unified view of the current interaction state.

    A failing external describer never fails the turn: the observation falls
    back to the built-in template and the failure is logged.
    """
    body = world.body(agent)
    scene = describe_scene(world, agent)
    if scene_describer is not None:
        try:
            text = scene_describer(canonical_json(world.to_dict()), agent)
            scene = SceneDescription(
                text[:SCENE_TEXT_MAX_CHARS], scene.visible_ids, SceneSource.EXTERNAL_ADAPTER
            )
        except Exception as exc:  # noqa: BLE001 - degradation boundary
            message = f"scene adapter failed for {agent}: {exc}; using built-in template"
            logger.warning(message)
            if on_warning is not None:
                on_warning(message)
    return Observation(
        agent=agent,
        heard=latest,
        scene=scene,
        self_pose=body.pose,
        head=body.head,
        distance_to_human_m=world.distance_to_human(agent),
        clock_ms=world.clock_ms,
    )
