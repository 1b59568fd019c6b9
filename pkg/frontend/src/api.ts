/**
 * Typed client for the judging-service JSON API.
 */

export interface GoalCard {
  request_slots: Record<string, string>;
  inform_slots: Record<string, string>;
}

export interface CreateSessionResponse {
  session_id: string;
  greeting: string;
  greeting_frame: string;
  goal: GoalCard;
  domain: string;
  agent_kind: string;
}

export type SessionStatus = "open" | "ended";

export interface MessageResponse {
  user_frame: string;
  agent_utterance: string;
  agent_frame: string;
  session_status: SessionStatus;
  outcome: string | null;
  failure_reason: string | null;
}

export interface TranscriptEntry {
  speaker: "user" | "agent";
  utterance: string;
  frame: string;
  ts: number;
}

export interface SessionView {
  session_id: string;
  domain: string;
  agent_kind: string;
  status: SessionStatus;
  outcome: string | null;
  failure_reason: string | null;
  rating: number | null;
  goal: GoalCard;
  transcript: TranscriptEntry[];
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "HttpError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(code, response.status, message);
}

export class JudgeApi {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  createSession(domain: string, agentKind: string): Promise<CreateSessionResponse> {
    return this.request("POST", "/api/sessions", { domain, agent_kind: agentKind });
  }

  postMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request("POST", `/api/sessions/${sessionId}/messages`, { text });
  }

  postRating(sessionId: string, rating: number): Promise<{ ok: boolean; rating: number }> {
    return this.request("POST", `/api/sessions/${sessionId}/rating`, { rating });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }
}
