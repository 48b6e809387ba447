/** Pure projection of the event stream into everything the console shows.
 *
 * applyEvent is a reducer: same events in, same state out, no reads of the
 * clock or the network. Selection highlights, scores, policies, statuses,
 * and world poses all come from events; the client predicts nothing.
 */

import { applyActionEffect } from "./world.js";
import type {
  ActionEventPayload,
  ActionView,
  LatencyPayload,
  ObservationPayload,
  PlanPayload,
  RosterEntry,
  RuntimeEvent,
  ScoresPayload,
  SelectionPayload,
  SessionStartPayload,
  StatusPayload,
  UtterancePayload,
  WorldView,
} from "./types.js";

export type ConnectionStatus = "connecting" | "live" | "lost";

export interface Bubble {
  seq: number;
  speaker: string;
  text: string;
  addressee: string | null;
  human: boolean;
}

export interface AgentPanel {
  id: string;
  displayName: string;
  latestScore: number | null;
  selected: boolean;
  policy: ActionView[];
  fallbackUsed: boolean;
  attempts: number;
  statuses: StatusPayload[];
  sceneText: string;
  visibleIds: string[];
  speakingUntilMs: number | null;
}

export interface ConsoleState {
  sessionId: string | null;
  connection: ConnectionStatus;
  lastSeq: number;
  clockMs: number;
  roster: RosterEntry[];
  threshold: number | null;
  world: WorldView | null;
  transcript: Bubble[];
  panels: Record<string, AgentPanel>;
  selectionReason: string | null;
  latencies: Record<string, number>;
  warnings: string[];
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    connection: "connecting",
    lastSeq: -1,
    clockMs: 0,
    roster: [],
    threshold: null,
    world: null,
    transcript: [],
    panels: {},
    selectionReason: null,
    latencies: {},
    warnings: [],
  };
}

function freshPanel(entry: RosterEntry): AgentPanel {
  return {
    id: entry.id,
    displayName: entry.display_name,
    latestScore: null,
    selected: false,
    policy: [],
    fallbackUsed: false,
    attempts: 0,
    statuses: [],
    sceneText: "",
    visibleIds: [],
    speakingUntilMs: null,
  };
}

function patchPanel(
  state: ConsoleState,
  agent: string,
  patch: Partial<AgentPanel>,
): Record<string, AgentPanel> {
  const panel = state.panels[agent];
  if (panel === undefined) return state.panels;
  return { ...state.panels, [agent]: { ...panel, ...patch } };
}

function appendBubble(state: ConsoleState, event: RuntimeEvent, human: boolean): ConsoleState {
  const u = event.payload as unknown as UtterancePayload;
  const bubble: Bubble = {
    seq: event.seq,
    speaker: u.speaker,
    text: u.text,
    addressee: u.addressee,
    human,
  };
  return { ...state, transcript: [...state.transcript, bubble] };
}

export function applyEvent(state: ConsoleState, event: RuntimeEvent): ConsoleState {
  const next = dispatch(state, event);
  return { ...next, lastSeq: event.seq, clockMs: Math.max(next.clockMs, event.t_logical_ms) };
}

/** Drop-duplicates wrapper for resubscribed streams: events at or below the
 * last applied sequence number were already rendered exactly once. */
export function offerEvent(state: ConsoleState, event: RuntimeEvent): ConsoleState {
  if (event.seq <= state.lastSeq) return state;
  return applyEvent(state, event);
}

function dispatch(state: ConsoleState, event: RuntimeEvent): ConsoleState {
  switch (event.kind) {
    case "session_start": {
      const { config } = event.payload as unknown as SessionStartPayload;
      const panels: Record<string, AgentPanel> = {};
      for (const entry of config.roster) panels[entry.id] = freshPanel(entry);
      return {
        ...state,
        sessionId: event.session_id,
        roster: config.roster,
        threshold: config.threshold,
        world: config.world,
        panels,
      };
    }
    case "user_utterance": {
      // A new turn: clear highlights so selection can only come from the
      // selection event that follows.
      const panels: Record<string, AgentPanel> = {};
      for (const [id, panel] of Object.entries(state.panels)) {
        panels[id] = { ...panel, selected: false };
      }
      return appendBubble({ ...state, panels, selectionReason: null }, event, true);
    }
    case "agent_utterance":
      return appendBubble(state, event, false);
    case "observation": {
      const o = event.payload as unknown as ObservationPayload;
      return {
        ...state,
        panels: patchPanel(state, o.agent, {
          sceneText: o.scene.text,
          visibleIds: o.scene.visible_ids,
        }),
      };
    }
    case "scores": {
      const s = event.payload as unknown as ScoresPayload;
      const panels: Record<string, AgentPanel> = {};
      for (const [id, panel] of Object.entries(state.panels)) {
        const score = s.scores[id];
        panels[id] = { ...panel, latestScore: score === undefined ? null : score };
      }
      return { ...state, panels };
    }
    case "selection": {
      const sel = event.payload as unknown as SelectionPayload;
      const chosen = new Set(sel.selected);
      const panels: Record<string, AgentPanel> = {};
      for (const [id, panel] of Object.entries(state.panels)) {
        panels[id] = { ...panel, selected: chosen.has(id) };
      }
      return { ...state, panels, selectionReason: sel.reason };
    }
    case "plan": {
      const p = event.payload as unknown as PlanPayload;
      return {
        ...state,
        panels: patchPanel(state, p.agent, {
          policy: p.policy.actions,
          fallbackUsed: p.fallback_used,
          attempts: p.attempts,
          statuses: [],
        }),
      };
    }
    case "action_start": {
      const a = event.payload as unknown as ActionEventPayload;
      if (a.kind !== "speak") return state;
      return {
        ...state,
        panels: patchPanel(state, a.agent, { speakingUntilMs: a.start_ms + a.duration_ms }),
      };
    }
    case "action_end": {
      const a = event.payload as unknown as ActionEventPayload;
      let next = state;
      if (a.kind === "speak") {
        next = { ...next, panels: patchPanel(next, a.agent, { speakingUntilMs: null }) };
      }
      if (next.world !== null && a.outcome === "success") {
        const world = applyActionEffect(next.world, a.agent, a.kind, a.params);
        next = { ...next, world: { ...world, clock_ms: a.end_ms ?? world.clock_ms } };
      }
      return next;
    }
    case "status": {
      const s = event.payload as unknown as StatusPayload;
      const panel = state.panels[s.agent];
      if (panel === undefined) return state;
      return {
        ...state,
        panels: { ...state.panels, [s.agent]: { ...panel, statuses: [...panel.statuses, s] } },
      };
    }
    case "latency": {
      const l = event.payload as unknown as LatencyPayload;
      return { ...state, latencies: { ...state.latencies, [l.purpose]: l.ms } };
    }
    case "warning": {
      const message = String((event.payload as { message?: unknown }).message ?? "");
      return { ...state, warnings: [...state.warnings, message] };
    }
    default:
      return state;
  }
}

export function setConnection(state: ConsoleState, connection: ConnectionStatus): ConsoleState {
  return { ...state, connection };
}

/** Sequence number to resubscribe from after a disconnect. */
export function nextFromSeq(state: ConsoleState): number {
  return state.lastSeq + 1;
}
