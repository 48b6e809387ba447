/** Client-side mirror of the runtime's world geometry.
 *
 * The stream carries actions, not resulting poses, so the console replays
 * the same effects the server applied: relative locomotion clamped to the
 * bounds, absolute head poses, and expressive annotations. The cone test
 * mirrors the server's so "seen" flags can be cross-checked against the
 * visible_ids the stream reports.
 */

import type { AgentBodyView, Pose, WorldView } from "./types.js";

const DIRECTION_OFFSET_DEG: Record<string, number> = {
  forward: 0,
  backward: 180,
  left: 90,
  right: -90,
};

const DEG = Math.PI / 180;

export function distance(a: { x: number; y: number }, b: { x: number; y: number }): number {
  return Math.hypot(b.x - a.x, b.y - a.y);
}

function cloneBody(body: AgentBodyView): AgentBodyView {
  return {
    pose: { ...body.pose },
    head: { ...body.head },
    posture: body.posture,
    hand: body.hand,
    gesture: body.gesture,
  };
}

function withBody(world: WorldView, agent: string, body: AgentBodyView): WorldView {
  return { ...world, agents: { ...world.agents, [agent]: body } };
}

/** Apply one successful action's world effect. Unknown agents or kinds
 * leave the world untouched: the stream is the authority, not the client. */
export function applyActionEffect(
  world: WorldView,
  agent: string,
  kind: string,
  params: Record<string, unknown>,
): WorldView {
  const current = world.agents[agent];
  if (current === undefined) return world;
  const body = cloneBody(current);
  switch (kind) {
    case "locomote": {
      const offset = DIRECTION_OFFSET_DEG[String(params.direction)];
      if (offset === undefined) return world;
      const bearing = (body.pose.heading_deg + offset) * DEG;
      const magnitude = Number(params.magnitude);
      const { bounds } = world;
      body.pose.x = Math.min(Math.max(body.pose.x + magnitude * Math.cos(bearing), bounds.min_x), bounds.max_x);
      body.pose.y = Math.min(Math.max(body.pose.y + magnitude * Math.sin(bearing), bounds.min_y), bounds.max_y);
      return withBody(world, agent, body);
    }
    case "head_move":
      body.head = { pan_deg: Number(params.pan_deg), tilt_deg: Number(params.tilt_deg) };
      return withBody(world, agent, body);
    case "posture":
      body.posture = String(params.pose);
      return withBody(world, agent, body);
    case "hand":
      body.hand = String(params.state);
      return withBody(world, agent, body);
    case "gesture":
      body.gesture = String(params.type);
      return withBody(world, agent, body);
    default:
      return world;
  }
}

/** Ids inside the agent's view cone (entities plus the "human" marker),
 * nearest first, ties by id — the same contract the observation events use. */
export function visibleIds(world: WorldView, agent: string): string[] {
  const body = world.agents[agent];
  if (body === undefined) return [];
  const boresight = (body.pose.heading_deg + body.head.pan_deg) * DEG;
  const cosLimit = Math.cos(world.fov_half_angle_deg * DEG) - 1e-12;
  const hits: Array<[number, string]> = [];
  const consider = (id: string, x: number, y: number) => {
    const dx = x - body.pose.x;
    const dy = y - body.pose.y;
    const dist = Math.hypot(dx, dy);
    if (dist > world.fov_range_m) return;
    if (dist === 0) {
      hits.push([0, id]);
      return;
    }
    const cosAngle = (dx * Math.cos(boresight) + dy * Math.sin(boresight)) / dist;
    if (cosAngle >= cosLimit) hits.push([dist, id]);
  };
  for (const entity of world.entities) consider(entity.id, entity.position.x, entity.position.y);
  consider("human", world.human.x, world.human.y);
  hits.sort((a, b) => (a[0] - b[0]) || (a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
  return hits.map(([, id]) => id);
}

/** Orientation of the cone's center line: heading plus head pan. */
export function coneBisectorDeg(pose: Pose, panDeg: number): number {
  return pose.heading_deg + panDeg;
}

/** Polygon fan for a translucent FOV cone: apex at the agent, then points
 * along the arc from -half to +half around the bisector. */
export function conePoints(
  pose: Pose,
  panDeg: number,
  halfAngleDeg: number,
  rangeM: number,
  steps = 24,
): Array<[number, number]> {
  const points: Array<[number, number]> = [[pose.x, pose.y]];
  const center = coneBisectorDeg(pose, panDeg);
  for (let i = 0; i <= steps; i += 1) {
    const angle = (center - halfAngleDeg + (2 * halfAngleDeg * i) / steps) * DEG;
    points.push([pose.x + rangeM * Math.cos(angle), pose.y + rangeM * Math.sin(angle)]);
  }
  return points;
}
