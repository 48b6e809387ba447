"""Simulated 2D shared space: poses, head orientation, entities, visibility.

All operations are functional: they return a new :class:`WorldState` and leave
the input untouched, so concurrent readers can hold snapshots safely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

HUMAN_ENTITY_ID = "human"

DEFAULT_FOV_HALF_ANGLE_DEG = 30.0
DEFAULT_FOV_RANGE_M = 5.0
MAX_LOCOMOTION_M = 2.0

PAN_LIMIT_DEG = 90.0
TILT_LIMIT_DEG = 30.0

DIRECTIONS = ("forward", "backward", "left", "right")
# Offset added to body heading to get the translation bearing for each direction.
_DIRECTION_OFFSET_DEG = {"forward": 0.0, "backward": 180.0, "left": 90.0, "right": -90.0}


class UnknownAgentError(KeyError):
    """The named agent is not part of this world."""


class WorldRangeError(ValueError):
    """A locomotion magnitude or head angle is outside its allowed range."""


def normalize_heading(deg: float) -> float:
    h = math.fmod(deg, 360.0)
    return h + 360.0 if h < 0 else h


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading_deg: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading_deg", normalize_heading(self.heading_deg))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "heading_deg": self.heading_deg}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose2D":
        return cls(float(d["x"]), float(d["y"]), float(d.get("heading_deg", 0.0)))


@dataclass(frozen=True)
class HeadPose:
    pan_deg: float = 0.0
    tilt_deg: float = 0.0

    def __post_init__(self) -> None:
        if not -PAN_LIMIT_DEG <= self.pan_deg <= PAN_LIMIT_DEG:
            raise WorldRangeError(f"pan {self.pan_deg}° outside [-{PAN_LIMIT_DEG:g}, {PAN_LIMIT_DEG:g}]")
        if not -TILT_LIMIT_DEG <= self.tilt_deg <= TILT_LIMIT_DEG:
            raise WorldRangeError(f"tilt {self.tilt_deg}° outside [-{TILT_LIMIT_DEG:g}, {TILT_LIMIT_DEG:g}]")

    def to_dict(self) -> dict:
        return {"pan_deg": self.pan_deg, "tilt_deg": self.tilt_deg}

    @classmethod
    def from_dict(cls, d: dict) -> "HeadPose":
        return cls(float(d.get("pan_deg", 0.0)), float(d.get("tilt_deg", 0.0)))


@dataclass(frozen=True)
class Bounds:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, self.min_x), self.max_x), min(max(y, self.min_y), self.max_y))

    def to_dict(self) -> dict:
        return {"min_x": self.min_x, "min_y": self.min_y, "max_x": self.max_x, "max_y": self.max_y}

    @classmethod
    def from_dict(cls, d: dict) -> "Bounds":
        return cls(float(d["min_x"]), float(d["min_y"]), float(d["max_x"]), float(d["max_y"]))


DEFAULT_BOUNDS = Bounds(0.0, 0.0, 10.0, 10.0)


@dataclass(frozen=True)
class Entity:
    id: str
    label: str
    position: Pose2D

    def to_dict(self) -> dict:
        return {"id": self.id, "label": self.label, "position": self.position.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Entity":
        return cls(d["id"], d["label"], Pose2D.from_dict(d["position"]))


@dataclass(frozen=True)
class AgentBody:
    """An agent's embodiment: base pose, head pose, and expressive annotations.

    Posture, hand state, and the most recent gesture carry no geometry; they
    exist so logs and the console can show expressive actions.
    """

    pose: Pose2D
    head: HeadPose = HeadPose()
    posture: str = "stand"
    hand: str = "open"
    gesture: str | None = None

    def to_dict(self) -> dict:
        return {
            "pose": self.pose.to_dict(),
            "head": self.head.to_dict(),
            "posture": self.posture,
            "hand": self.hand,
            "gesture": self.gesture,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentBody":
        return cls(
            pose=Pose2D.from_dict(d["pose"]),
            head=HeadPose.from_dict(d.get("head", {})),
            posture=d.get("posture", "stand"),
            hand=d.get("hand", "open"),
            gesture=d.get("gesture"),
        )


@dataclass(frozen=True)
class WorldState:
    bounds: Bounds = DEFAULT_BOUNDS
    agents: dict[str, AgentBody] = field(default_factory=dict)
    human: Pose2D = Pose2D(5.0, 5.0)
    entities: tuple[Entity, ...] = ()
    clock_ms: int = 0
    fov_half_angle_deg: float = DEFAULT_FOV_HALF_ANGLE_DEG
    fov_range_m: float = DEFAULT_FOV_RANGE_M

    def __post_init__(self) -> None:
        ids = [e.id for e in self.entities]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate entity ids: {ids}")
        if HUMAN_ENTITY_ID in ids:
            raise ValueError(f"entity id {HUMAN_ENTITY_ID!r} is reserved for the human")

    def body(self, agent: str) -> AgentBody:
        try:
            return self.agents[agent]
        except KeyError:
            raise UnknownAgentError(agent) from None

    def with_body(self, agent: str, body: AgentBody) -> "WorldState":
        agents = dict(self.agents)
        agents[agent] = body
        return replace(self, agents=agents)

    def advance_clock(self, to_ms: int) -> "WorldState":
        if to_ms < self.clock_ms:
            raise ValueError(f"clock may not go backwards ({to_ms} < {self.clock_ms})")
        return replace(self, clock_ms=to_ms)

    def distance_to_human(self, agent: str) -> float:
        pose = self.body(agent).pose
        return math.hypot(self.human.x - pose.x, self.human.y - pose.y)

    def to_dict(self) -> dict:
        return {
            "bounds": self.bounds.to_dict(),
            "agents": {aid: body.to_dict() for aid, body in sorted(self.agents.items())},
            "human": self.human.to_dict(),
            "entities": [e.to_dict() for e in self.entities],
            "clock_ms": self.clock_ms,
            "fov_half_angle_deg": self.fov_half_angle_deg,
            "fov_range_m": self.fov_range_m,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldState":
        return cls(
            bounds=Bounds.from_dict(d["bounds"]),
            agents={aid: AgentBody.from_dict(b) for aid, b in d["agents"].items()},
            human=Pose2D.from_dict(d["human"]),
            entities=tuple(Entity.from_dict(e) for e in d["entities"]),
            clock_ms=int(d["clock_ms"]),
            fov_half_angle_deg=float(d.get("fov_half_angle_deg", DEFAULT_FOV_HALF_ANGLE_DEG)),
            fov_range_m=float(d.get("fov_range_m", DEFAULT_FOV_RANGE_M)),
        )


def apply_locomotion(world: WorldState, agent: str, direction: str, magnitude: float) -> WorldState:
    """Translate the agent relative to its heading; left/right strafe.

    The result is clamped to the world bounds rather than rejected. Heading
    never changes: rotation is not part of the locomotion primitive.
    """
    body = world.body(agent)
    if direction not in DIRECTIONS:
        raise WorldRangeError(f"unknown direction {direction!r}")
    if not 0.0 <= magnitude <= MAX_LOCOMOTION_M:
        raise WorldRangeError(f"magnitude {magnitude} m outside [0, {MAX_LOCOMOTION_M}]")
    bearing = math.radians(body.pose.heading_deg + _DIRECTION_OFFSET_DEG[direction])
    x = body.pose.x + magnitude * math.cos(bearing)
    y = body.pose.y + magnitude * math.sin(bearing)
    x, y = world.bounds.clamp(x, y)
    return world.with_body(agent, replace(body, pose=Pose2D(x, y, body.pose.heading_deg)))


def apply_head_move(world: WorldState, agent: str, pan_deg: float, tilt_deg: float) -> WorldState:
    """Set the head pose absolutely (idempotent; not incremental)."""
    body = world.body(agent)
    return world.with_body(agent, replace(body, head=HeadPose(pan_deg, tilt_deg)))


def _in_cone(world: WorldState, origin: Pose2D, boresight_deg: float, x: float, y: float) -> tuple[bool, float]:
    """Cone membership test via the dot product against the boresight vector."""
    dx, dy = x - origin.x, y - origin.y
    dist = math.hypot(dx, dy)
    if dist > world.fov_range_m:
        return False, dist
    if dist == 0.0:
        return True, 0.0
    rad = math.radians(boresight_deg)
    cos_angle = (dx * math.cos(rad) + dy * math.sin(rad)) / dist
    # Guard the acos-free comparison against rounding just past ±1.
    threshold = math.cos(math.radians(world.fov_half_angle_deg))
    return cos_angle >= threshold - 1e-12, dist


def visible_entities(world: WorldState, agent: str) -> list[str]:
    """Ids of entities (plus the ``human`` pseudo-entity) inside the agent's
    view cone, nearest first, ties broken by id. Tilt is ignored: visibility
    is a 2D cone centered on heading + pan."""
    body = world.body(agent)
    boresight = body.pose.heading_deg + body.head.pan_deg
    hits: list[tuple[float, str]] = []
    for entity in world.entities:
        ok, dist = _in_cone(world, body.pose, boresight, entity.position.x, entity.position.y)
        if ok:
            hits.append((dist, entity.id))
    ok, dist = _in_cone(world, body.pose, boresight, world.human.x, world.human.y)
    if ok:
        hits.append((dist, HUMAN_ENTITY_ID))
    hits.sort()
    return [entity_id for _, entity_id in hits]


def bearing_deg(origin: Pose2D, x: float, y: float) -> float:
    """Absolute bearing from origin to (x, y), normalized to [0, 360)."""
    return normalize_heading(math.degrees(math.atan2(y - origin.y, x - origin.x)))
