// HTTP + WebSocket client for the session service. The WebSocket
// constructor is injectable so the same code runs in the browser and in
// node-based tests (via the `ws` package).

import type { SceneDoc, ServerMessage, SessionSummary } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "message", fn: (ev: { data: unknown }) => void): void;
  addEventListener(type: "open" | "close" | "error", fn: () => void): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const res = await fetch(this.baseUrl + path, init);
    const body = await res.json().catch(() => ({}));
    if (!res.ok) {
      const detail = body && body.detail ? `: ${JSON.stringify(body.detail)}` : "";
      const err = new Error(`${init?.method ?? "GET"} ${path} -> ${res.status}${detail}`);
      (err as any).status = res.status;
      throw err;
    }
    return body;
  }

  createSession(participant: string, seed: number): Promise<SessionSummary> {
    return this.request("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ participant, seed }),
    });
  }

  sessionState(sessionId: string): Promise<SessionSummary> {
    return this.request(`/api/sessions/${sessionId}`);
  }

  sessionTrials(sessionId: string): Promise<{ rows: Record<string, any>[] }> {
    return this.request(`/api/sessions/${sessionId}/trials`);
  }

  scene(name: string): Promise<SceneDoc> {
    return this.request(`/api/scenes/${name}`);
  }

  submitQuestionnaire(sessionId: string, block: number, answers: Record<string, number>) {
    return this.request(`/api/sessions/${sessionId}/questionnaire`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ block, answers }),
    });
  }

  submitRanking(sessionId: string, order: string[], freeText = "") {
    return this.request(`/api/sessions/${sessionId}/ranking`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ order, free_text: freeText }),
    });
  }

  floorTextureUrl(scene: string, encoding: string): string {
    return `${this.baseUrl}/api/assets/floor/${scene}/${encoding}.png`;
  }

  legendUrl(encoding: string): string {
    return `${this.baseUrl}/api/assets/legend/${encoding}.png`;
  }
}

/** One request in flight at a time: the server answers every message, so a
 * simple reply queue keeps send/receive pairs matched. */
export class SessionSocket {
  private ws: WebSocketLike;
  private pending: ((msg: ServerMessage) => void)[] = [];
  private opened: Promise<void>;
  closed = false;
  onClose: () => void = () => {};

  constructor(url: string, factory?: WebSocketFactory) {
    const make = factory ?? ((u: string) => new WebSocket(u) as unknown as WebSocketLike);
    this.ws = make(url);
    this.opened = new Promise((resolve) => {
      this.ws.addEventListener("open", () => resolve());
    });
    this.ws.addEventListener("message", (ev) => {
      const next = this.pending.shift();
      if (next) next(parseServerMessage(String(ev.data)));
    });
    this.ws.addEventListener("close", () => {
      this.closed = true;
      this.onClose();
    });
  }

  async send(msg: Record<string, unknown>): Promise<ServerMessage> {
    await this.opened;
    if (this.closed) throw new Error("session channel closed");
    return new Promise((resolve) => {
      this.pending.push(resolve);
      this.ws.send(JSON.stringify(msg));
    });
  }

  startTrial() {
    return this.send({ type: "start_trial" });
  }

  move(intent: [number, number], dt: number) {
    return this.send({ type: "move", intent, dt });
  }

  pickCard(index: number) {
    return this.send({ type: "pick_card", index });
  }

  endTrial() {
    return this.send({ type: "end_trial" });
  }

  close() {
    this.ws.close();
  }
}

export function sessionSocketUrl(baseUrl: string, sessionId: string): string {
  return baseUrl.replace(/^http/, "ws") + `/api/sessions/${sessionId}/ws`;
}
