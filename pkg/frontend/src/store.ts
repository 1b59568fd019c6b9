/**
 * Chat view model: one active session per tab, driven entirely through the
 * judging-service HTTP API.
 *
 * Invariants the store maintains:
 *  - the composer is enabled exactly while the session is open and no
 *    request is in flight;
 *  - the rating panel is visible only after the session has ended;
 *  - the rating control offers exactly the five discrete values 1-5 and a
 *    rating is submitted at most once (a duplicate locks to the prior value).
 */

import { ApiError, GoalCard, JudgeApi, SessionStatus } from "./api.js";

export interface ChatMessage {
  speaker: "user" | "agent";
  text: string;
  /** dialog-act annotation for agent bubbles (debug channel), collapsed by default */
  frame?: string;
  pending?: boolean;
}

export type Phase = "idle" | "starting" | "chatting" | "ended" | "rated";

export interface RatingPanelState {
  visible: boolean;
  selected: number | null;
  submitted: boolean;
  /** set when the service reports the session was already rated */
  locked: boolean;
}

export const RATING_VALUES: readonly number[] = [1, 2, 3, 4, 5];

export type StoreListener = () => void;

export class ChatStore {
  private api: JudgeApi;
  private phaseValue: Phase = "idle";
  private sessionIdValue: string | null = null;
  private messagesValue: ChatMessage[] = [];
  private goalValue: GoalCard | null = null;
  private outcomeValue: string | null = null;
  private ratingSelected: number | null = null;
  private ratingSubmitted = false;
  private ratingLocked = false;
  private requestInFlight = false;
  private errorValue: string | null = null;
  private retryAction: (() => Promise<void>) | null = null;
  private listeners: StoreListener[] = [];
  private lastStart: { domain: string; agentKind: string } | null = null;

  constructor(api: JudgeApi) {
    this.api = api;
  }

  // -- derived view state ----------------------------------------------------

  get phase(): Phase {
    return this.phaseValue;
  }

  get sessionId(): string | null {
    return this.sessionIdValue;
  }

  get messages(): readonly ChatMessage[] {
    return this.messagesValue;
  }

  get goalCard(): GoalCard | null {
    return this.goalValue;
  }

  get outcome(): string | null {
    return this.outcomeValue;
  }

  get composerEnabled(): boolean {
    return this.phaseValue === "chatting" && !this.requestInFlight;
  }

  get ratingPanel(): RatingPanelState {
    return {
      visible: this.phaseValue === "ended" || this.phaseValue === "rated",
      selected: this.ratingSelected,
      submitted: this.ratingSubmitted,
      locked: this.ratingLocked,
    };
  }

  get errorBanner(): string | null {
    return this.errorValue;
  }

  get canRetry(): boolean {
    return this.retryAction !== null;
  }

  onChange(listener: StoreListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  // -- operations -------------------------------------------------------------

  async startSession(domain: string, agentKind: string): Promise<void> {
    this.lastStart = { domain, agentKind };
    this.phaseValue = "starting";
    this.errorValue = null;
    this.retryAction = null;
    this.messagesValue = [];
    this.goalValue = null;
    this.sessionIdValue = null;
    this.outcomeValue = null;
    this.ratingSelected = null;
    this.ratingSubmitted = false;
    this.ratingLocked = false;
    this.notify();
    try {
      const created = await this.api.createSession(domain, agentKind);
      this.sessionIdValue = created.session_id;
      this.goalValue = created.goal;
      this.messagesValue = [
        { speaker: "agent", text: created.greeting, frame: created.greeting_frame },
      ];
      this.phaseValue = "chatting";
    } catch (err) {
      this.phaseValue = "idle";
      this.errorValue = describeError(err);
      this.retryAction = () => this.startSession(domain, agentKind);
    }
    this.notify();
  }

  async retry(): Promise<void> {
    const action = this.retryAction;
    if (action) {
      this.retryAction = null;
      await action();
    }
  }

  async sendMessage(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || !this.composerEnabled || !this.sessionIdValue) {
      return; // blank input or closed composer: no request is sent
    }
    this.requestInFlight = true;
    const optimistic: ChatMessage = { speaker: "user", text: trimmed, pending: true };
    this.messagesValue = [...this.messagesValue, optimistic];
    this.notify();
    try {
      const reply = await this.api.postMessage(this.sessionIdValue, trimmed);
      optimistic.pending = false;
      optimistic.frame = reply.user_frame;
      this.messagesValue = [
        ...this.messagesValue,
        { speaker: "agent", text: reply.agent_utterance, frame: reply.agent_frame },
      ];
      this.applyStatus(reply.session_status, reply.outcome);
    } catch (err) {
      if (err instanceof ApiError && err.code === "SessionEnded") {
        // the session ended under us: drop the unsent bubble, move to rating
        this.messagesValue = this.messagesValue.filter((m) => m !== optimistic);
        this.phaseValue = "ended";
      } else {
        this.messagesValue = this.messagesValue.filter((m) => m !== optimistic);
        this.errorValue = describeError(err);
      }
    } finally {
      this.requestInFlight = false;
    }
    this.notify();
  }

  async submitRating(rating: number): Promise<void> {
    if (!RATING_VALUES.includes(rating)) {
      throw new Error(`rating must be one of ${RATING_VALUES.join(", ")}`);
    }
    if (this.phaseValue !== "ended" || this.ratingSubmitted || !this.sessionIdValue) {
      return;
    }
    this.ratingSelected = rating;
    this.notify();
    try {
      await this.api.postRating(this.sessionIdValue, rating);
      this.ratingSubmitted = true;
      this.phaseValue = "rated";
    } catch (err) {
      if (err instanceof ApiError && err.code === "AlreadyRated") {
        this.ratingLocked = true;
        this.ratingSubmitted = true;
        this.phaseValue = "rated";
        try {
          const view = await this.api.getSession(this.sessionIdValue);
          this.ratingSelected = view.rating;
        } catch {
          // keep the local selection if the lookup fails
        }
      } else {
        this.ratingSelected = null;
        this.errorValue = describeError(err);
      }
    }
    this.notify();
  }

  /** Poll the service and reconcile local bubbles with the stored transcript. */
  async refresh(): Promise<void> {
    if (!this.sessionIdValue) {
      return;
    }
    const view = await this.api.getSession(this.sessionIdValue);
    this.messagesValue = view.transcript.map((entry) => ({
      speaker: entry.speaker,
      text: entry.utterance,
      frame: entry.frame,
    }));
    this.goalValue = view.goal;
    if (view.rating !== null) {
      this.ratingSelected = view.rating;
      this.ratingSubmitted = true;
      this.phaseValue = "rated";
    } else {
      this.applyStatus(view.status, view.outcome);
    }
    this.notify();
  }

  /** Reset to the start screen, keeping the last domain/agent choice. */
  newSession(): { domain: string; agentKind: string } | null {
    this.phaseValue = "idle";
    this.sessionIdValue = null;
    this.messagesValue = [];
    this.goalValue = null;
    this.outcomeValue = null;
    this.ratingSelected = null;
    this.ratingSubmitted = false;
    this.ratingLocked = false;
    this.errorValue = null;
    this.notify();
    return this.lastStart;
  }

  private applyStatus(status: SessionStatus, outcome: string | null): void {
    if (outcome !== null) {
      this.outcomeValue = outcome;
    }
    if (status === "ended" && this.phaseValue !== "rated") {
      this.phaseValue = "ended";
    }
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  if (err instanceof Error) {
    return err.message || "request failed";
  }
  return "request failed";
}
