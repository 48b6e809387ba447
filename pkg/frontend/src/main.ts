/** Browser entry point: create a session, follow its event stream, and wire
 * the input row. All state flows one way: events → reducer → render. */

import { ANYONE, canSubmit, createSession, postUtterance } from "./api.js";
import { renderAll } from "./render.js";
import {
  applyEvent,
  initialState,
  nextFromSeq,
  setConnection,
  type ConsoleState,
} from "./state.js";
import { parseEvent, streamUrl } from "./sse.js";

const SUBMIT_TIMEOUT_MS = 10_000;
const RESUBSCRIBE_DELAY_MS = 1_000;

function need<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const targets = {
    banner: need<HTMLElement>("banner"),
    transcript: need<HTMLElement>("transcript"),
    panels: need<HTMLElement>("panels"),
    canvas: need<HTMLCanvasElement>("world"),
  };
  const input = need<HTMLInputElement>("utterance");
  const dropdown = need<HTMLSelectElement>("addressee");
  const send = need<HTMLButtonElement>("send");
  const errorRow = need<HTMLElement>("error");

  // Same-origin by default; ?api=http://host:port targets a remote runtime.
  const base = new URLSearchParams(window.location.search).get("api") ?? "";

  let state: ConsoleState = initialState();
  const paint = () => {
    renderAll(targets, state);
    send.disabled = busy || !canSubmit(input.value);
    if (dropdown.options.length <= 1 && state.roster.length > 0) {
      for (const entry of state.roster) {
        const option = document.createElement("option");
        option.value = entry.id;
        option.textContent = entry.display_name || entry.id;
        dropdown.append(option);
      }
    }
  };

  let busy = false;
  const sessionId = await createSession(base);

  let source: EventSource | null = null;
  const subscribe = (fromSeq: number): void => {
    source?.close();
    source = new EventSource(streamUrl(base, sessionId, fromSeq));
    source.onopen = () => {
      state = setConnection(state, "live");
      paint();
    };
    source.onmessage = (message) => {
      // The SSE id rides along as lastEventId; the payload's seq is the
      // same number, so the reducer's dedupe guard covers replays too.
      state = applyEvent(state, parseEvent({ id: Number(message.lastEventId), data: message.data }));
      paint();
    };
    source.onerror = () => {
      source?.close();
      state = setConnection(state, "lost");
      paint();
      setTimeout(() => subscribe(nextFromSeq(state)), RESUBSCRIBE_DELAY_MS);
    };
  };
  subscribe(0);

  const submit = async (): Promise<void> => {
    if (busy || !canSubmit(input.value)) return;
    busy = true;
    input.disabled = true;
    errorRow.textContent = "";
    paint();
    const timeout = setTimeout(() => {
      busy = false;
      input.disabled = false;
      errorRow.textContent = "still waiting for the turn to finish…";
      paint();
    }, SUBMIT_TIMEOUT_MS);
    try {
      await postUtterance(base, sessionId, input.value, dropdown.value || ANYONE);
      input.value = "";
    } catch (error) {
      errorRow.textContent = `send failed: ${String(error)} — edit and retry`;
    } finally {
      clearTimeout(timeout);
      busy = false;
      input.disabled = false;
      paint();
      input.focus();
    }
  };

  send.addEventListener("click", () => void submit());
  input.addEventListener("keydown", (key) => {
    if (key.key === "Enter") void submit();
  });
  input.addEventListener("input", paint);
  paint();
}

void boot().catch((error) => {
  const banner = document.getElementById("banner");
  if (banner !== null) banner.textContent = `failed to start: ${String(error)}`;
});
