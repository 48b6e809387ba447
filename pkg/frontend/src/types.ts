/** Wire shapes the runtime service emits. The console invents nothing:
 * every rendered fact traces back to one of these payloads. */

export interface Pose {
  x: number;
  y: number;
  heading_deg: number;
}

export interface HeadPose {
  pan_deg: number;
  tilt_deg: number;
}

export interface AgentBodyView {
  pose: Pose;
  head: HeadPose;
  posture: string;
  hand: string;
  gesture: string | null;
}

export interface BoundsView {
  min_x: number;
  min_y: number;
  max_x: number;
  max_y: number;
}

export interface EntityView {
  id: string;
  label: string;
  position: Pose;
}

export interface WorldView {
  bounds: BoundsView;
  agents: Record<string, AgentBodyView>;
  human: Pose;
  entities: EntityView[];
  clock_ms: number;
  fov_half_angle_deg: number;
  fov_range_m: number;
}

export interface RosterEntry {
  id: string;
  display_name: string;
  persona: string;
  registration_index: number;
}

/** One line of the append-only event log, as streamed over SSE. */
export interface RuntimeEvent {
  seq: number;
  t_logical_ms: number;
  session_id: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface ActionView {
  kind: string;
  params: Record<string, unknown>;
}

export interface UtterancePayload {
  speaker: string;
  text: string;
  addressee: string | null;
}

export interface ObservationPayload {
  agent: string;
  scene: { text: string; visible_ids: string[]; generated_by: string };
  self_pose: Pose;
  head: HeadPose;
  distance_to_human_m: number;
}

export interface ScoresPayload {
  scores: Record<string, number>;
  source: string;
}

export interface SelectionPayload {
  selected: string[];
  reason: string;
  addressee: string | null;
  threshold: number;
}

export interface PlanPayload {
  agent: string;
  policy: { actions: ActionView[] };
  attempts: number;
  fallback_used: boolean;
}

export interface ActionEventPayload {
  agent: string;
  action_index: number;
  kind: string;
  params: Record<string, unknown>;
  start_ms: number;
  duration_ms: number;
  outcome?: string;
  detail?: string;
  end_ms?: number;
}

export interface StatusPayload {
  agent: string;
  action_index: number;
  outcome: string;
  detail: string;
  start_ms: number;
  duration_ms: number;
}

export interface LatencyPayload {
  purpose: string;
  ms: number;
  backend: string;
}

export interface SessionStartPayload {
  config: {
    roster: RosterEntry[];
    world: WorldView;
    threshold: number;
    fallback: string;
    [key: string]: unknown;
  };
}

/** Response body of the utterance endpoint: everything one turn produced. */
export interface TurnRecordView {
  turn_index: number;
  selected: string[];
  reason: string;
  addressee: string | null;
  scores: Record<string, number>;
  policies: Record<string, { actions: ActionView[] }>;
  statuses: Record<string, StatusPayload[]>;
  stage_latencies_ms: Record<string, number>;
  degradations: string[];
  overhead_us: number;
}
