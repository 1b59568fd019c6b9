import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, CreateSessionResponse, JudgeApi, MessageResponse, SessionView } from "../src/api.js";
import { ChatStore, RATING_VALUES } from "../src/store.js";

const GOAL = {
  request_slots: { ticket: "UNK" },
  inform_slots: { city: "seattle", moviename: "zoolander 2" },
};

function created(overrides: Partial<CreateSessionResponse> = {}): CreateSessionResponse {
  return {
    session_id: "s1",
    greeting: "Hello! How may I help you?",
    greeting_frame: "greeting()",
    goal: GOAL,
    domain: "movie",
    agent_kind: "rule",
    ...overrides,
  };
}

function reply(overrides: Partial<MessageResponse> = {}): MessageResponse {
  return {
    user_frame: "inform(city=seattle)",
    agent_utterance: "What movie are you interested in?",
    agent_frame: "request(moviename)",
    session_status: "open",
    outcome: null,
    failure_reason: null,
    ...overrides,
  };
}

/** JudgeApi test double driven by queued responses. */
class FakeApi extends JudgeApi {
  calls: string[] = [];
  createResult: () => Promise<CreateSessionResponse> = async () => created();
  messageResults: Array<() => Promise<MessageResponse>> = [];
  ratingResult: () => Promise<{ ok: boolean; rating: number }> = async () => ({ ok: true, rating: 4 });
  sessionResult: () => Promise<SessionView> = async () => {
    throw new Error("unexpected getSession");
  };

  override createSession(domain: string, agentKind: string) {
    this.calls.push(`create:${domain}:${agentKind}`);
    return this.createResult();
  }

  override postMessage(sessionId: string, text: string) {
    this.calls.push(`message:${text}`);
    const next = this.messageResults.shift();
    if (!next) {
      throw new Error("no queued message response");
    }
    return next();
  }

  override postRating(sessionId: string, rating: number) {
    this.calls.push(`rating:${rating}`);
    return this.ratingResult();
  }

  override getSession(sessionId: string) {
    this.calls.push(`get:${sessionId}`);
    return this.sessionResult();
  }
}

describe("ChatStore", () => {
  let api: FakeApi;
  let store: ChatStore;

  beforeEach(() => {
    api = new FakeApi("");
    store = new ChatStore(api);
  });

  it("starts a session: greeting bubble, goal card, composer focused on", async () => {
    await store.startSession("movie", "rule");
    expect(store.phase).toBe("chatting");
    expect(store.sessionId).toBe("s1");
    expect(store.messages).toHaveLength(1);
    expect(store.messages[0]).toMatchObject({ speaker: "agent", text: "Hello! How may I help you?" });
    expect(store.goalCard).toEqual(GOAL);
    expect(store.composerEnabled).toBe(true);
    expect(store.ratingPanel.visible).toBe(false);
  });

  it("surfaces a retryable banner when the service is down", async () => {
    api.createResult = async () => {
      throw new ApiError("HttpError", 502, "bad gateway");
    };
    await store.startSession("movie", "rule");
    expect(store.phase).toBe("idle");
    expect(store.sessionId).toBeNull();
    expect(store.errorBanner).toContain("bad gateway");
    expect(store.canRetry).toBe(true);
    api.createResult = async () => created();
    await store.retry();
    expect(store.phase).toBe("chatting");
  });

  it("starts sessions for either agent kind", async () => {
    api.createResult = async () => created({ agent_kind: "rl" });
    await store.startSession("movie", "rl");
    expect(api.calls).toContain("create:movie:rl");
    expect(store.messages[0].speaker).toBe("agent");
  });

  it("sends a message: optimistic user bubble then agent reply with frame", async () => {
    await store.startSession("movie", "rule");
    let resolveReply: (value: MessageResponse) => void = () => {};
    api.messageResults.push(
      () => new Promise<MessageResponse>((res) => (resolveReply = res)),
    );
    const sending = store.sendMessage("I want 2 tickets please!");
    expect(store.messages.at(-1)).toMatchObject({
      speaker: "user",
      text: "I want 2 tickets please!",
      pending: true,
    });
    expect(store.composerEnabled).toBe(false); // in-flight: composer locked
    resolveReply(reply());
    await sending;
    expect(store.messages).toHaveLength(3);
    expect(store.messages.at(-1)).toMatchObject({
      speaker: "agent",
      frame: "request(moviename)",
    });
    expect(store.composerEnabled).toBe(true);
  });

  it("ignores blank input without calling the service", async () => {
    await store.startSession("movie", "rule");
    await store.sendMessage("   ");
    expect(api.calls.filter((c) => c.startsWith("message:"))).toHaveLength(0);
    expect(store.messages).toHaveLength(1);
  });

  it("turns the composer off and the rating panel on when the reply ends the session", async () => {
    await store.startSession("movie", "rule");
    api.messageResults.push(async () =>
      reply({
        agent_utterance: "Booked!",
        agent_frame: "inform(taskcomplete;city=seattle)",
        session_status: "ended",
        outcome: "success",
      }),
    );
    await store.sendMessage("book it");
    expect(store.phase).toBe("ended");
    expect(store.composerEnabled).toBe(false);
    expect(store.ratingPanel.visible).toBe(true);
    expect(store.outcome).toBe("success");
  });

  it("moves to the rating state when the service says SessionEnded", async () => {
    await store.startSession("movie", "rule");
    api.messageResults.push(async () => {
      throw new ApiError("SessionEnded", 409, "session already ended");
    });
    await store.sendMessage("anyone there?");
    expect(store.phase).toBe("ended");
    expect(store.ratingPanel.visible).toBe(true);
    expect(store.messages).toHaveLength(1); // optimistic bubble rolled back
  });

  it("exposes exactly five discrete rating values and rejects others", async () => {
    expect(RATING_VALUES).toEqual([1, 2, 3, 4, 5]);
    await expect(store.submitRating(0)).rejects.toThrow();
    await expect(store.submitRating(6)).rejects.toThrow();
    await expect(store.submitRating(3.5)).rejects.toThrow();
  });

  it("submits a rating once and shows the confirmation state", async () => {
    await store.startSession("movie", "rule");
    api.messageResults.push(async () => reply({ session_status: "ended", outcome: "failure" }));
    await store.sendMessage("done");
    await store.submitRating(4);
    expect(store.phase).toBe("rated");
    expect(store.ratingPanel).toMatchObject({ visible: true, selected: 4, submitted: true });
    await store.submitRating(2); // second submit is a no-op
    expect(api.calls.filter((c) => c.startsWith("rating:"))).toEqual(["rating:4"]);
  });

  it("locks to the prior value when the service reports AlreadyRated", async () => {
    await store.startSession("movie", "rule");
    api.messageResults.push(async () => reply({ session_status: "ended", outcome: "success" }));
    await store.sendMessage("done");
    api.ratingResult = async () => {
      throw new ApiError("AlreadyRated", 409, "session already rated 5");
    };
    api.sessionResult = async () => ({
      session_id: "s1",
      domain: "movie",
      agent_kind: "rule",
      status: "ended",
      outcome: "success",
      failure_reason: null,
      rating: 5,
      goal: GOAL,
      transcript: [],
    });
    await store.submitRating(3);
    expect(store.ratingPanel).toMatchObject({ locked: true, submitted: true, selected: 5 });
  });

  it("reconciles bubbles with the service transcript on refresh", async () => {
    await store.startSession("movie", "rule");
    api.sessionResult = async () => ({
      session_id: "s1",
      domain: "movie",
      agent_kind: "rule",
      status: "open",
      outcome: null,
      failure_reason: null,
      rating: null,
      goal: GOAL,
      transcript: [
        { speaker: "agent", utterance: "Hello! How may I help you?", frame: "greeting()", ts: 1 },
        { speaker: "user", utterance: "hi", frame: "greeting()", ts: 2 },
        { speaker: "agent", utterance: "What movie are you interested in?", frame: "request(moviename)", ts: 3 },
      ],
    });
    await store.refresh();
    expect(store.messages).toHaveLength(3);
    expect(store.messages.map((m) => m.speaker)).toEqual(["agent", "user", "agent"]);
  });

  it("offers a new session after rating", async () => {
    await store.startSession("movie", "rule");
    api.messageResults.push(async () => reply({ session_status: "ended", outcome: "success" }));
    await store.sendMessage("done");
    await store.submitRating(5);
    const last = store.newSession();
    expect(last).toEqual({ domain: "movie", agentKind: "rule" });
    expect(store.phase).toBe("idle");
    expect(store.messages).toHaveLength(0);
  });
});
