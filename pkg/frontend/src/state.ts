// Client-side trial state: a reducer over server messages. The HUD always
// shows the server's numbers; the gauge clamps display regressions (which
// would indicate a protocol bug) rather than ever counting down.

import type { ServerMessage, TrialMetrics, TrialStarted } from "./protocol.js";

export interface HudState {
  elapsedS: number;
  doseRateSvH: number;
  cumulativeSv: number;
  /** highest cumulative value ever shown; display floor for the gauge */
  gaugeSv: number;
}

export interface TrialViewState {
  phase: "idle" | "in_trial" | "summary" | "paused";
  block: number;
  trial: number;
  scene: string;
  encoding: string;
  cards: string[];
  targetCard: string;
  cardCollected: boolean;
  position: [number, number];
  table: [number, number];
  hud: HudState;
  lastSummary: TrialMetrics | null;
  lastError: string;
  gaugeRegressions: number;
}

export function initialState(): TrialViewState {
  return {
    phase: "idle",
    block: 0,
    trial: 0,
    scene: "",
    encoding: "",
    cards: [],
    targetCard: "",
    cardCollected: false,
    position: [0, 0],
    table: [0, 0],
    hud: { elapsedS: 0, doseRateSvH: 0, cumulativeSv: 0, gaugeSv: 0 },
    lastSummary: null,
    lastError: "",
    gaugeRegressions: 0,
  };
}

export function reduce(state: TrialViewState, msg: ServerMessage): TrialViewState {
  switch (msg.type) {
    case "trial_started":
      return startTrial(state, msg);
    case "tick": {
      const regressed = msg.cumulative_sv < state.hud.gaugeSv;
      return {
        ...state,
        position: msg.position,
        hud: {
          elapsedS: msg.elapsed_s,
          doseRateSvH: msg.dose_rate_sv_h,
          cumulativeSv: msg.cumulative_sv,
          gaugeSv: Math.max(state.hud.gaugeSv, msg.cumulative_sv),
        },
        gaugeRegressions: state.gaugeRegressions + (regressed ? 1 : 0),
      };
    }
    case "card_result":
      return msg.accepted
        ? { ...state, cardCollected: true, lastError: "" }
        : { ...state, lastError: msg.reason ?? "card rejected" };
    case "trial_ended":
      return {
        ...state,
        phase: "summary",
        lastSummary: msg.metrics,
        lastError: "",
      };
    case "error":
      return { ...state, lastError: msg.reason };
    default:
      return state;
  }
}

function startTrial(state: TrialViewState, msg: TrialStarted): TrialViewState {
  return {
    ...initialState(),
    phase: "in_trial",
    block: msg.block,
    trial: msg.trial,
    scene: msg.scene,
    encoding: msg.encoding,
    cards: msg.cards,
    targetCard: msg.target_card,
    position: msg.position,
    table: msg.table,
    gaugeRegressions: state.gaugeRegressions,
  };
}

export function pause(state: TrialViewState): TrialViewState {
  return state.phase === "in_trial" ? { ...state, phase: "paused" } : state;
}

export function resume(state: TrialViewState): TrialViewState {
  return state.phase === "paused" ? { ...state, phase: "in_trial" } : state;
}

/** Proximity gate for card clicks (mirrors the server's 1.5 m rule for UX;
 * the server remains authoritative). */
export function nearTable(state: TrialViewState, radiusM = 1.5): boolean {
  const dx = state.position[0] - state.table[0];
  const dz = state.position[1] - state.table[1];
  return Math.hypot(dx, dz) <= radiusM;
}
