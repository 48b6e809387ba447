/** DOM and canvas output. Rendering reads ConsoleState and nothing else,
 * so a refreshed page that re-consumes the stream paints the same picture. */

import type { AgentPanel, ConsoleState } from "./state.js";
import { conePoints, visibleIds } from "./world.js";
import type { WorldView } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBanner(target: HTMLElement, state: ConsoleState): void {
  target.dataset.status = state.connection;
  target.textContent =
    state.connection === "live"
      ? `live · session ${state.sessionId ?? "?"} · t=${state.clockMs} ms`
      : state.connection === "lost"
        ? "connection lost — resubscribing…"
        : "connecting…";
}

export function renderTranscript(target: HTMLElement, state: ConsoleState): void {
  target.replaceChildren();
  const names = new Map(state.roster.map((r) => [r.id, r.display_name]));
  for (const bubble of state.transcript) {
    const row = el("div", bubble.human ? "bubble human" : "bubble agent");
    const who = bubble.human ? "You" : (names.get(bubble.speaker) ?? bubble.speaker);
    const suffix = bubble.addressee !== null ? ` → ${names.get(bubble.addressee) ?? bubble.addressee}` : "";
    row.append(el("span", "who", `${who}${suffix}`), el("span", "text", bubble.text));
    target.append(row);
  }
  target.scrollTop = target.scrollHeight;
}

function describePolicy(panel: AgentPanel): string {
  if (panel.policy.length === 0) return "—";
  return panel.policy
    .map((a) => (a.kind === "speak" ? `speak(${JSON.stringify(a.params.text)})` : a.kind))
    .join(", ");
}

export function renderPanels(target: HTMLElement, state: ConsoleState): void {
  target.replaceChildren();
  for (const entry of state.roster) {
    const panel = state.panels[entry.id];
    if (panel === undefined) continue;
    const card = el("div", panel.selected ? "panel selected" : "panel");
    card.append(el("h3", "", panel.displayName || panel.id));
    const score = panel.latestScore === null ? "—" : panel.latestScore.toFixed(2);
    card.append(el("div", "score", `score ${score}${panel.selected ? " · selected" : ""}`));
    if (panel.speakingUntilMs !== null && state.clockMs < panel.speakingUntilMs) {
      card.append(el("div", "speaking", "speaking…"));
    }
    card.append(el("div", "policy", describePolicy(panel)));
    if (panel.fallbackUsed) card.append(el("div", "fallback", `fallback after ${panel.attempts} attempts`));
    const done = panel.statuses.filter((s) => s.outcome === "success").length;
    if (panel.policy.length > 0) {
      card.append(el("div", "statuses", `${done}/${panel.policy.length} actions done`));
    }
    card.append(el("div", "scene", panel.sceneText));
    target.append(card);
  }
  const chips = Object.entries(state.latencies)
    .map(([purpose, ms]) => `${purpose} ${ms} ms`)
    .join(" · ");
  if (chips) target.append(el("div", "latencies", chips));
}

export function renderWorld(canvas: HTMLCanvasElement, state: ConsoleState): void {
  const world = state.world;
  const ctx = canvas.getContext("2d");
  if (world === null || ctx === null) return;
  const pad = 20;
  const sx = (canvas.width - 2 * pad) / (world.bounds.max_x - world.bounds.min_x);
  const sy = (canvas.height - 2 * pad) / (world.bounds.max_y - world.bounds.min_y);
  const px = (x: number) => pad + (x - world.bounds.min_x) * sx;
  // Canvas y grows downward; world y grows upward.
  const py = (y: number) => canvas.height - pad - (y - world.bounds.min_y) * sy;

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(px(world.bounds.min_x), py(world.bounds.max_y), (world.bounds.max_x - world.bounds.min_x) * sx, (world.bounds.max_y - world.bounds.min_y) * sy);

  const seen = new Set<string>();
  for (const id of Object.keys(world.agents)) for (const v of visibleIds(world, id)) seen.add(v);

  for (const entity of world.entities) {
    ctx.fillStyle = seen.has(entity.id) ? "#2a9d2a" : "#555";
    ctx.beginPath();
    ctx.arc(px(entity.position.x), py(entity.position.y), 4, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(entity.label, px(entity.position.x) + 6, py(entity.position.y) - 6);
  }

  ctx.fillStyle = seen.has("human") ? "#2a9d2a" : "#c2571a";
  ctx.beginPath();
  ctx.arc(px(world.human.x), py(world.human.y), 6, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillText("human", px(world.human.x) + 8, py(world.human.y));

  for (const [id, body] of Object.entries(world.agents)) {
    const cone = conePoints(body.pose, body.head.pan_deg, world.fov_half_angle_deg, world.fov_range_m);
    ctx.fillStyle = "rgba(70, 130, 220, 0.15)";
    ctx.beginPath();
    const first = cone[0];
    if (first !== undefined) ctx.moveTo(px(first[0]), py(first[1]));
    for (const [wx, wy] of cone.slice(1)) ctx.lineTo(px(wx), py(wy));
    ctx.closePath();
    ctx.fill();

    ctx.fillStyle = "#2b5ea7";
    ctx.beginPath();
    ctx.arc(px(body.pose.x), py(body.pose.y), 7, 0, 2 * Math.PI);
    ctx.fill();
    const rad = (body.pose.heading_deg * Math.PI) / 180;
    ctx.strokeStyle = "#2b5ea7";
    ctx.beginPath();
    ctx.moveTo(px(body.pose.x), py(body.pose.y));
    ctx.lineTo(px(body.pose.x + 0.8 * Math.cos(rad)), py(body.pose.y + 0.8 * Math.sin(rad)));
    ctx.stroke();
    ctx.fillText(id, px(body.pose.x) + 9, py(body.pose.y) + 4);
  }
}

export function renderWorldError(canvas: HTMLCanvasElement, message: string): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  // Last good frame stays; the overlay flags the bad snapshot.
  ctx.fillStyle = "rgba(180, 40, 40, 0.85)";
  ctx.fillRect(0, 0, canvas.width, 22);
  ctx.fillStyle = "#fff";
  ctx.fillText(message, 6, 15);
}

export function renderAll(
  targets: {
    banner: HTMLElement;
    transcript: HTMLElement;
    panels: HTMLElement;
    canvas: HTMLCanvasElement;
  },
  state: ConsoleState,
): void {
  renderBanner(targets.banner, state);
  renderTranscript(targets.transcript, state);
  renderPanels(targets.panels, state);
  renderWorld(targets.canvas, state);
}

export function isWorldViewLike(value: unknown): value is WorldView {
  const w = value as WorldView;
  return (
    typeof w === "object" &&
    w !== null &&
    typeof w.bounds === "object" &&
    typeof w.agents === "object" &&
    Array.isArray(w.entities)
  );
}
