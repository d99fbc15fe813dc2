/** Chat-panel state machine for interactive playtest sessions.
 *
 * All narrative progress comes from the service; the client only tracks
 * whose turn it is and renders transcripts, triggers, and warnings.
 */

import type { ApiClient } from "./api.js";
import type { BatchFileDoc, PlaytestStateDoc } from "./types.js";

export type ChatPhase = "idle" | "awaiting_player" | "waiting_on_server";

export class ChatSession {
  private state: PlaytestStateDoc | null = null;
  private phase: ChatPhase = "idle";

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  get currentPhase(): ChatPhase {
    return this.phase;
  }

  get roundsCompleted(): number {
    return this.state?.round_index ?? 0;
  }

  get transcript(): PlaytestStateDoc["transcript"] {
    return this.state?.transcript ?? [];
  }

  get triggers(): PlaytestStateDoc["triggers"] {
    return this.state?.triggers ?? [];
  }

  get canSend(): boolean {
    return this.phase === "awaiting_player";
  }

  async start(): Promise<PlaytestStateDoc> {
    if (this.phase !== "idle") throw new Error("session already started");
    this.phase = "waiting_on_server";
    try {
      this.state = await this.api.playtest(this.sessionId, "start");
    } catch (e) {
      this.phase = "idle";
      throw e;
    }
    this.phase = "awaiting_player";
    return this.state;
  }

  async send(text: string): Promise<PlaytestStateDoc> {
    if (!this.canSend) throw new Error("not the player's turn");
    if (!text.trim()) throw new Error("player input is empty");
    this.phase = "waiting_on_server";
    try {
      this.state = await this.api.playtest(this.sessionId, "player", text);
    } finally {
      this.phase = "awaiting_player";
    }
    return this.state;
  }

  exportBatchFile(): Promise<BatchFileDoc> {
    if (this.state === null) throw new Error("session not started");
    return this.api.exportPlaytest(this.sessionId);
  }
}
