/**
 * DOM layer: renders the ChatStore into the page and wires user input.
 * All state lives in the store; this module only paints and forwards events.
 */

import { ChatStore, RATING_VALUES } from "./store.js";

export interface ViewOptions {
  domains: string[];
  agents: string[];
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class ChatView {
  private root: HTMLElement;
  private store: ChatStore;
  private options: ViewOptions;
  private domainSelect!: HTMLSelectElement;
  private agentSelect!: HTMLSelectElement;
  private composer!: HTMLInputElement;
  private sendButton!: HTMLButtonElement;
  private messagesBox!: HTMLElement;

  constructor(root: HTMLElement, store: ChatStore, options: ViewOptions) {
    this.root = root;
    this.store = store;
    this.options = options;
    store.onChange(() => this.render());
  }

  mount(): void {
    this.render();
  }

  private render(): void {
    this.root.replaceChildren();
    this.root.appendChild(this.renderHeader());
    const banner = this.renderErrorBanner();
    if (banner) {
      this.root.appendChild(banner);
    }
    if (this.store.goalCard) {
      this.root.appendChild(this.renderGoalCard());
    }
    this.root.appendChild(this.renderMessages());
    this.root.appendChild(this.renderComposer());
    const rating = this.renderRatingPanel();
    if (rating) {
      this.root.appendChild(rating);
    }
    if (this.store.composerEnabled) {
      this.composer.focus();
    }
  }

  private renderHeader(): HTMLElement {
    const header = el("header", "header");
    header.appendChild(el("h1", "title", "taskchat judging"));
    const controls = el("div", "controls");
    this.domainSelect = el("select", "domain-select");
    for (const domain of this.options.domains) {
      const option = el("option", undefined, domain);
      option.value = domain;
      this.domainSelect.appendChild(option);
    }
    this.agentSelect = el("select", "agent-select");
    for (const agent of this.options.agents) {
      const option = el("option", undefined, agent);
      option.value = agent;
      this.agentSelect.appendChild(option);
    }
    const start = el("button", "start-button", "new session");
    start.onclick = () => {
      void this.store.startSession(this.domainSelect.value, this.agentSelect.value);
    };
    controls.append(this.domainSelect, this.agentSelect, start);
    header.appendChild(controls);
    return header;
  }

  private renderErrorBanner(): HTMLElement | null {
    if (!this.store.errorBanner) {
      return null;
    }
    const banner = el("div", "error-banner", this.store.errorBanner + " ");
    if (this.store.canRetry) {
      const retry = el("button", "retry-button", "retry");
      retry.onclick = () => void this.store.retry();
      banner.appendChild(retry);
    }
    return banner;
  }

  private renderGoalCard(): HTMLElement {
    const goal = this.store.goalCard!;
    const card = el("section", "goal-card");
    card.appendChild(el("h2", undefined, "your goal"));
    const asks = el("ul", "goal-asks");
    for (const slot of Object.keys(goal.request_slots)) {
      asks.appendChild(el("li", undefined, `find out: ${slot}`));
    }
    const constraints = el("ul", "goal-constraints");
    for (const [slot, value] of Object.entries(goal.inform_slots)) {
      constraints.appendChild(el("li", undefined, `${slot}: ${value}`));
    }
    card.append(asks, constraints);
    return card;
  }

  private renderMessages(): HTMLElement {
    this.messagesBox = el("main", "messages");
    for (const message of this.store.messages) {
      const bubble = el("div", `bubble ${message.speaker}${message.pending ? " pending" : ""}`);
      bubble.appendChild(el("p", "bubble-text", message.text));
      if (message.speaker === "agent" && message.frame) {
        const details = el("details", "frame-annotation");
        details.appendChild(el("summary", undefined, "frame"));
        details.appendChild(el("code", undefined, message.frame));
        bubble.appendChild(details); // collapsed (hidden) by default
      }
      this.messagesBox.appendChild(bubble);
    }
    if (this.store.outcome) {
      this.messagesBox.appendChild(el("div", "outcome", `outcome: ${this.store.outcome}`));
    }
    this.messagesBox.scrollTop = this.messagesBox.scrollHeight;
    return this.messagesBox;
  }

  private renderComposer(): HTMLElement {
    const form = el("form", "composer");
    this.composer = el("input", "composer-input");
    this.composer.type = "text";
    this.composer.placeholder = this.store.composerEnabled
      ? "type your message"
      : "session not open";
    this.composer.disabled = !this.store.composerEnabled;
    this.sendButton = el("button", "send-button", "send");
    this.sendButton.type = "submit";
    this.sendButton.disabled = !this.store.composerEnabled;
    form.append(this.composer, this.sendButton);
    form.onsubmit = (event) => {
      event.preventDefault();
      const text = this.composer.value;
      this.composer.value = "";
      void this.store.sendMessage(text);
    };
    return form;
  }

  private renderRatingPanel(): HTMLElement | null {
    const panel = this.store.ratingPanel;
    if (!panel.visible) {
      return null;
    }
    const section = el("section", "rating-panel");
    section.appendChild(el("h2", undefined, "rate this dialogue"));
    const row = el("div", "rating-row");
    for (const value of RATING_VALUES) {
      const button = el("button", "rating-button", String(value));
      button.disabled = panel.submitted;
      if (panel.selected === value) {
        button.classList.add("selected");
      }
      button.onclick = () => void this.store.submitRating(value);
      row.appendChild(button);
    }
    section.appendChild(row);
    if (panel.submitted) {
      const note = panel.locked
        ? `this session was already rated ${panel.selected}`
        : `thanks! you rated this dialogue ${panel.selected}`;
      section.appendChild(el("p", "rating-note", note));
      const again = el("button", "new-session-button", "start a new session");
      again.onclick = () => {
        const last = this.store.newSession();
        if (last) {
          void this.store.startSession(last.domain, last.agentKind);
        }
      };
      section.appendChild(again);
    }
    return section;
  }
}
