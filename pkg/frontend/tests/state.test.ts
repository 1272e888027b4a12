import { describe, expect, it } from "vitest";

import type { ServerMessage, TrialStarted } from "../src/protocol.js";
import { initialState, nearTable, pause, reduce, resume } from "../src/state.js";

const started: TrialStarted = {
  type: "trial_started",
  block: 1,
  trial: 2,
  scene: "scene_01",
  encoding: "hex",
  cards: ["H01", "H02", "S01"],
  target_card: "H02",
  position: [0.3, 0.8],
  table: [2.25, 6.6],
};

function tick(cumulative: number, elapsed: number): ServerMessage {
  return {
    type: "tick",
    position: [1.0, 1.0],
    dose_rate_sv_h: 0.0005,
    cumulative_sv: cumulative,
    elapsed_s: elapsed,
  };
}

describe("trial state reducer", () => {
  it("starts a trial from the server message", () => {
    const s = reduce(initialState(), started);
    expect(s.phase).toBe("in_trial");
    expect(s.targetCard).toBe("H02");
    expect(s.position).toEqual([0.3, 0.8]);
  });

  it("hud mirrors server ticks and the gauge never decreases", () => {
    let s = reduce(initialState(), started);
    s = reduce(s, tick(1e-7, 0.1));
    s = reduce(s, tick(2e-7, 0.2));
    expect(s.hud.cumulativeSv).toBe(2e-7);
    expect(s.hud.gaugeSv).toBe(2e-7);
    // a regressing tick (would be a server bug) cannot move the gauge down
    s = reduce(s, tick(1.5e-7, 0.3));
    expect(s.hud.gaugeSv).toBe(2e-7);
    expect(s.hud.cumulativeSv).toBe(1.5e-7);
    expect(s.gaugeRegressions).toBe(1);
  });

  it("card acceptance flips the collected flag; rejection records reason", () => {
    let s = reduce(initialState(), started);
    s = reduce(s, { type: "card_result", accepted: false, reason: "wrong card" });
    expect(s.cardCollected).toBe(false);
    expect(s.lastError).toBe("wrong card");
    s = reduce(s, { type: "card_result", accepted: true, card: "H02" });
    expect(s.cardCollected).toBe(true);
  });

  it("trial end stores the summary shown to the user", () => {
    let s = reduce(initialState(), started);
    const metrics = {
      cumulative_dose_sv: 1e-6,
      mean_dose_rate_sv_h: 3e-4,
      mean_nearest_dist_m: 1.9,
      max_dose_rate_sv_h: 8e-4,
      table_proximity_s: 2.5,
    };
    s = reduce(s, {
      type: "trial_ended",
      metrics,
      path_side: "left",
      took_higher_exposure: false,
      task_errors: 0,
      state: "idle",
    });
    expect(s.phase).toBe("summary");
    expect(s.lastSummary).toEqual(metrics);
  });

  it("pause and resume only apply to an active trial", () => {
    let s = reduce(initialState(), started);
    s = pause(s);
    expect(s.phase).toBe("paused");
    s = resume(s);
    expect(s.phase).toBe("in_trial");
    expect(resume(initialState()).phase).toBe("idle");
  });

  it("table proximity gate uses the 1.5 m radius", () => {
    let s = reduce(initialState(), started);
    expect(nearTable(s)).toBe(false);
    s = reduce(s, { ...tick(0, 0.1), position: [2.3, 6.0] } as ServerMessage);
    expect(nearTable(s)).toBe(true);
  });
});
