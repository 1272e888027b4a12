// End-to-end against the real session service: a scripted client runs the
// training block plus one full encoding block, then exercises the
// questionnaire and ranking endpoints.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";

import { ApiClient, SessionSocket, sessionSocketUrl, type WebSocketLike } from "../src/net.js";
import { ScriptedDriver } from "../src/driver.js";
import { ENCODINGS } from "../src/protocol.js";
import { initialState } from "../src/state.js";
import { QUESTIONNAIRE_ITEMS, validateAnswers } from "../src/forms.js";

const PORT = 18741;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let api: ApiClient;

const wsFactory = (url: string): WebSocketLike => new WebSocket(url) as unknown as WebSocketLike;

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/api/scenes`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const outDir = mkdtempSync(join(tmpdir(), "radvis-ui-"));
  server = spawn(
    "python3",
    ["-m", "radvis.cli", "serve", "--port", String(PORT), "--out-dir", outDir],
    { stdio: "ignore" },
  );
  api = new ApiClient(BASE);
  await waitForServer();
});

afterAll(() => {
  server?.kill();
});

describe("scripted walkthrough client", () => {
  it("completes a full block; summaries match server metrics to 1e-9; gauge monotone", async () => {
    const session = await api.createSession("UI01", 2024);
    const socket = new SessionSocket(sessionSocketUrl(BASE, session.session_id), wsFactory);

    const summaries: { block: number; trial: number; metrics: Record<string, number> }[] = [];
    let state = initialState();
    let lastGauge = 0;
    let trialsRun = 0;

    // training block (6 trials) plus the first main block (5 trials)
    for (let i = 0; i < 11; i++) {
      const pre = await api.sessionState(session.session_id);
      expect(pre.next_trial).not.toBeNull();
      const scene = await api.scene(pre.next_trial!.scene);
      const driver = new ScriptedDriver(socket, state, (s) => {
        // dose gauge never decreases within a trial
        expect(s.hud.gaugeSv).toBeGreaterThanOrEqual(lastGauge);
        lastGauge = s.hud.gaugeSv;
      });
      lastGauge = 0;
      const result = await driver.completeTrial(scene);
      state = result.finalState;
      expect(state.gaugeRegressions).toBe(0);
      summaries.push({
        block: result.started.block,
        trial: result.started.trial,
        metrics: result.ended.metrics as unknown as Record<string, number>,
      });
      trialsRun += 1;
    }
    expect(trialsRun).toBe(11);

    const post = await api.sessionState(session.session_id);
    expect(post.state).toBe("between_blocks"); // block 1 finished
    expect(post.completed_trials).toBe(11);

    // the summary shown per trial equals the server's stored metrics
    const { rows } = await api.sessionTrials(session.session_id);
    expect(rows.length).toBe(11);
    for (const s of summaries) {
      const row = rows.find((r) => r.block === s.block && r.trial === s.trial)!;
      expect(row).toBeDefined();
      for (const key of Object.keys(s.metrics)) {
        const a = s.metrics[key];
        const b = row[key] as number;
        const tol = 1e-9 * Math.max(1, Math.abs(b));
        expect(Math.abs(a - b)).toBeLessThanOrEqual(tol);
      }
    }

    // post-block questionnaire: 13 values stored per block
    const answers: Record<string, number> = {};
    for (const item of QUESTIONNAIRE_ITEMS) answers[item.id] = 4;
    expect(validateAnswers(answers)).toBeNull();
    expect(Object.keys(answers).length).toBe(13);
    const stored = await api.submitQuestionnaire(session.session_id, 1, answers);
    expect(stored.stored).toBe(true);

    socket.close();
  });

  it("rejects non-permutation rankings and accepts a valid one", async () => {
    const session = await api.createSession("UI02", 7);
    await expect(
      api.submitRanking(session.session_id, ["continuous", "continuous", "banded", "circle", "hex", "arrow"]),
    ).rejects.toThrow(/422/);
    await expect(api.submitRanking(session.session_id, ["continuous"])).rejects.toThrow(/422/);
    const ok = await api.submitRanking(session.session_id, [...ENCODINGS].reverse(), "scripted");
    expect(ok.stored).toBe(true);
  });

  it("serves the assets the view needs", async () => {
    const floor = await fetch(`${BASE}/api/assets/floor/scene_01/arrow.png`);
    expect(floor.ok).toBe(true);
    expect(floor.headers.get("content-type")).toBe("image/png");
    const legend = await fetch(`${BASE}/api/assets/legend/banded.png`);
    expect(legend.ok).toBe(true);
    const scenes = await (await fetch(`${BASE}/api/scenes`)).json();
    expect(scenes.scenes).toContain("scene_training");
  });
});
