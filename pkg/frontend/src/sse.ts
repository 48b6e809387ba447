/** Minimal server-sent-events plumbing.
 *
 * The runtime tags every frame with the event's sequence number as the SSE
 * id, so resubscribing with from_seq = last id + 1 resumes without gaps or
 * duplicates. The parser is incremental: chunks can split anywhere.
 */

import type { RuntimeEvent } from "./types.js";

export interface Frame {
  id: number | null;
  data: string;
}

export interface SseParser {
  /** Feed one transport chunk; returns every frame completed by it. */
  push(chunk: string): Frame[];
}

export function createParser(): SseParser {
  let buffer = "";
  let id: number | null = null;
  let data: string[] = [];
  return {
    push(chunk: string): Frame[] {
      buffer += chunk;
      const frames: Frame[] = [];
      for (;;) {
        const newline = buffer.indexOf("\n");
        if (newline < 0) break;
        const line = buffer.slice(0, newline).replace(/\r$/, "");
        buffer = buffer.slice(newline + 1);
        if (line === "") {
          if (data.length > 0) frames.push({ id, data: data.join("\n") });
          id = null;
          data = [];
        } else if (line.startsWith(":")) {
          // keep-alive comment
        } else if (line.startsWith("id:")) {
          id = Number.parseInt(line.slice(3).trim(), 10);
        } else if (line.startsWith("data:")) {
          data.push(line.slice(5).replace(/^ /, ""));
        }
      }
      return frames;
    },
  };
}

export function parseEvent(frame: Frame): RuntimeEvent {
  const parsed = JSON.parse(frame.data) as RuntimeEvent;
  if (typeof parsed.seq !== "number" || typeof parsed.kind !== "string") {
    throw new Error(`malformed event frame: ${frame.data.slice(0, 120)}`);
  }
  return parsed;
}

export function streamUrl(base: string, sessionId: string, fromSeq: number): string {
  return `${base}/api/sessions/${encodeURIComponent(sessionId)}/events?from_seq=${fromSeq}`;
}
