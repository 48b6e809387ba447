import { describe, expect, it } from "vitest";

import { createParser, parseEvent, streamUrl } from "../src/sse.js";
import { initialState, offerEvent } from "../src/state.js";
import { asSseText, demoEvents } from "./helpers.js";

describe("sse parsing", () => {
  it("recovers every frame from the full stream text", () => {
    const events = demoEvents();
    const frames = createParser().push(asSseText(events));
    expect(frames).toHaveLength(events.length);
    expect(frames.map((f) => f.id)).toEqual(events.map((e) => e.seq));
    expect(frames.map((f) => parseEvent(f).kind)).toEqual(events.map((e) => e.kind));
  });

  it("reassembles frames split at arbitrary chunk boundaries", () => {
    const events = demoEvents().slice(0, 8);
    const text = asSseText(events);
    for (const size of [1, 3, 7, 50]) {
      const parser = createParser();
      const frames = [];
      for (let i = 0; i < text.length; i += size) frames.push(...parser.push(text.slice(i, i + size)));
      expect(frames.map((f) => f.id)).toEqual(events.map((e) => e.seq));
    }
  });

  it("ignores keep-alive comments between frames", () => {
    const events = demoEvents().slice(0, 2);
    const text = `: keep-alive\n\n${asSseText([events[0]!])}: keep-alive\n\n${asSseText([events[1]!])}`;
    const frames = createParser().push(text);
    expect(frames.map((f) => f.id)).toEqual([0, 1]);
  });

  it("tolerates CRLF line endings", () => {
    const [first] = demoEvents();
    const text = `id: ${first!.seq}\r\ndata: ${JSON.stringify(first)}\r\n\r\n`;
    const frames = createParser().push(text);
    expect(frames).toHaveLength(1);
    expect(parseEvent(frames[0]!).kind).toBe("session_start");
  });

  it("rejects frames that do not carry an event", () => {
    expect(() => parseEvent({ id: 0, data: '{"not": "an event"}' })).toThrow(/malformed/);
  });

  it("streamed frames drive the projector exactly like raw events", () => {
    const events = demoEvents();
    const viaFrames = createParser()
      .push(asSseText(events))
      .map(parseEvent)
      .reduce(offerEvent, initialState());
    const direct = events.reduce(offerEvent, initialState());
    expect(JSON.stringify(viaFrames)).toBe(JSON.stringify(direct));
  });

  it("builds resubscribe urls from the last applied sequence", () => {
    expect(streamUrl("", "abc", 17)).toBe("/api/sessions/abc/events?from_seq=17");
    expect(streamUrl("http://10.0.0.2:8000", "a b", 0)).toBe(
      "http://10.0.0.2:8000/api/sessions/a%20b/events?from_seq=0",
    );
  });
});
