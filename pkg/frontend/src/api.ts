/** The console's one command path: HTTP calls to the runtime service. */

import type { TurnRecordView, WorldView } from "./types.js";

/** Dropdown value meaning "let arbitration decide". */
export const ANYONE = "";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export function canSubmit(text: string): boolean {
  return text.trim().length > 0;
}

/** POST body for the utterance endpoint. The addressee field is present
 * exactly when a specific agent is chosen in the dropdown. */
export function utteranceBody(
  text: string,
  addressee: string,
): { text: string; addressee?: string } {
  if (addressee === ANYONE) return { text };
  return { text, addressee };
}

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    const body = await response.text();
    throw new Error(`HTTP ${response.status}: ${body.slice(0, 300)}`);
  }
  return response;
}

export async function createSession(
  base: string,
  overrides: Record<string, unknown> = {},
  fetchImpl: FetchLike = fetch,
): Promise<string> {
  const response = await expectOk(
    await fetchImpl(`${base}/api/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(overrides),
    }),
  );
  const { session_id } = (await response.json()) as { session_id: string };
  return session_id;
}

export async function postUtterance(
  base: string,
  sessionId: string,
  text: string,
  addressee: string,
  fetchImpl: FetchLike = fetch,
): Promise<TurnRecordView> {
  const response = await expectOk(
    await fetchImpl(`${base}/api/sessions/${encodeURIComponent(sessionId)}/utterance`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(utteranceBody(text, addressee)),
    }),
  );
  return (await response.json()) as TurnRecordView;
}

export async function getWorld(
  base: string,
  sessionId: string,
  fetchImpl: FetchLike = fetch,
): Promise<WorldView> {
  const response = await expectOk(
    await fetchImpl(`${base}/api/sessions/${encodeURIComponent(sessionId)}/world`),
  );
  return (await response.json()) as WorldView;
}
