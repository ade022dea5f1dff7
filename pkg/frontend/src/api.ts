/**
 * Thin HTTP client for the session service. Every call round-trips to the
 * server and returns the fresh snapshot; the UI never mutates state locally.
 */

import type { AutocompleteSnapshot, SessionSnapshot } from "./model.js";

export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, detail?: string) {
    super(detail ? `${code}: ${detail}` : code);
    this.status = status;
    this.code = code;
  }
}

export type ApplyOutcome =
  | { kind: "applied"; snapshot: SessionSnapshot }
  | { kind: "stale"; expected: number };

export interface CreateSessionOptions {
  strategy?: string;
  configuration?: string;
}

export interface Client {
  createSession(options?: CreateSessionOptions): Promise<SessionSnapshot>;
  getSession(sessionId: string): Promise<SessionSnapshot>;
  applyAction(
    sessionId: string,
    index: number,
    step: number,
  ): Promise<ApplyOutcome>;
  undo(sessionId: string): Promise<SessionSnapshot>;
  autocomplete(sessionId: string): Promise<AutocompleteSnapshot>;
  exportConfiguration(sessionId: string): Promise<string>;
}

async function errorFrom(response: Response): Promise<ServiceError> {
  let code = `http_${response.status}`;
  let detail: string | undefined;
  try {
    const body = await response.json();
    if (typeof body.error === "string") {
      code = body.error;
    }
    if (typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status code
  }
  return new ServiceError(response.status, code, detail);
}

export function createClient(baseUrl: string): Client {
  const root = baseUrl.replace(/\/$/, "");

  async function json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(root + path, init);
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return (await response.json()) as T;
  }

  function post(body?: unknown): RequestInit {
    const init: RequestInit = { method: "POST" };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    return init;
  }

  return {
    createSession(options?: CreateSessionOptions) {
      return json<SessionSnapshot>("/sessions", post(options ?? {}));
    },

    getSession(sessionId: string) {
      return json<SessionSnapshot>(`/sessions/${sessionId}`);
    },

    async applyAction(sessionId: string, index: number, step: number) {
      const response = await fetch(
        `${root}/sessions/${sessionId}/actions/${index}`,
        post({ step }),
      );
      if (response.status === 409) {
        const body = await response.json();
        if (body.error === "stale_action_index") {
          return { kind: "stale", expected: body.expected as number };
        }
        throw new ServiceError(409, String(body.error));
      }
      if (!response.ok) {
        throw await errorFrom(response);
      }
      const snapshot = (await response.json()) as SessionSnapshot;
      return { kind: "applied", snapshot };
    },

    undo(sessionId: string) {
      return json<SessionSnapshot>(`/sessions/${sessionId}/undo`, post());
    },

    autocomplete(sessionId: string) {
      return json<AutocompleteSnapshot>(
        `/sessions/${sessionId}/autocomplete`,
        post(),
      );
    },

    async exportConfiguration(sessionId: string) {
      const response = await fetch(`${root}/sessions/${sessionId}/export`);
      if (!response.ok) {
        throw await errorFrom(response);
      }
      return response.text();
    },
  };
}
