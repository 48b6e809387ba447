import { readFileSync } from "node:fs";

import type { RuntimeEvent } from "../src/types.js";

/** The bundled three-turn demo, recorded as one event-log line per event —
 * exactly what the stream endpoint sends as SSE data payloads. */
export function demoEvents(): RuntimeEvent[] {
  const raw = readFileSync(new URL("./fixtures/demo.jsonl", import.meta.url), "utf8");
  return raw
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => JSON.parse(line) as RuntimeEvent);
}

/** Render the events as the server's SSE byte stream. */
export function asSseText(events: RuntimeEvent[]): string {
  return events.map((e) => `id: ${e.seq}\ndata: ${JSON.stringify(e)}\n\n`).join("");
}
