/** Chat panel: transcript, expertise selector, one in-flight request per session. */

import { ApiClient } from "./api.js";
import type { Expertise, TranscriptEntry } from "./types.js";

const EXPERTISE_LEVELS: Expertise[] = ["novice", "intermediate", "advanced"];

export class ChatPanel {
  readonly root: HTMLElement;
  readonly transcript: TranscriptEntry[] = [];
  expertise: Expertise = "intermediate";

  private sessionId: string | null = null;
  private pending = false;
  private readonly list: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;

  constructor(
    private readonly api: ApiClient,
    private readonly alertId: string,
  ) {
    this.root = document.createElement("section");
    this.root.className = "chat-panel";

    const selector = document.createElement("select");
    selector.className = "expertise-selector";
    for (const level of EXPERTISE_LEVELS) {
      const option = document.createElement("option");
      option.value = level;
      option.textContent = level;
      option.selected = level === this.expertise;
      selector.appendChild(option);
    }
    selector.addEventListener("change", () => {
      // applies to subsequent turns: a new session picks up the level
      this.expertise = selector.value as Expertise;
      this.sessionId = null;
    });
    this.root.appendChild(selector);

    this.list = document.createElement("ol");
    this.list.className = "transcript";
    this.root.appendChild(this.list);

    const form = document.createElement("form");
    form.className = "chat-form";
    this.input = document.createElement("input");
    this.input.className = "chat-input";
    this.input.type = "text";
    this.sendButton = document.createElement("button");
    this.sendButton.className = "chat-send";
    this.sendButton.type = "submit";
    this.sendButton.textContent = "Send";
    form.appendChild(this.input);
    form.appendChild(this.sendButton);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send(this.input.value);
    });
    this.input.addEventListener("input", () => this.syncSendState());
    this.root.appendChild(form);
    this.syncSendState();
  }

  /** Send is disabled for empty input and while a request is in flight. */
  get sendDisabled(): boolean {
    return this.sendButton.disabled;
  }

  private syncSendState(): void {
    this.sendButton.disabled = this.pending || this.input.value.trim() === "";
  }

  private append(entry: TranscriptEntry): void {
    // error bubbles are rendered but not part of the session transcript,
    // so a failed turn leaves only the retained question in history
    if (entry.role !== "error") this.transcript.push(entry);
    const item = document.createElement("li");
    item.className = `bubble bubble-${entry.role}`;
    item.textContent = entry.text;
    const scrolledToBottom =
      this.list.scrollTop + this.list.clientHeight >= this.list.scrollHeight - 4;
    this.list.appendChild(item);
    if (scrolledToBottom) this.list.scrollTop = this.list.scrollHeight;
  }

  async send(message: string): Promise<void> {
    const trimmed = message.trim();
    if (trimmed === "" || this.pending) return;
    this.pending = true;
    this.syncSendState();
    this.append({ role: "analyst", text: trimmed });
    this.input.value = "";
    try {
      if (this.sessionId === null) {
        const opened = await this.api.openSession(this.alertId, this.expertise);
        this.sessionId = opened.session_id;
      }
      const reply = await this.api.sendMessage(this.sessionId, trimmed);
      this.append({ role: "assistant", text: reply.answer });
    } catch (error) {
      // question retained; failure shown inline, never a blank panel
      this.append({
        role: "error",
        text: `Request failed: ${error instanceof Error ? error.message : String(error)}`,
      });
    } finally {
      this.pending = false;
      this.syncSendState();
    }
  }
}
