// Wire types for the session service (HTTP + WebSocket JSON bodies).

export const ENCODINGS = [
  "continuous",
  "banded",
  "transparent",
  "circle",
  "hex",
  "arrow",
] as const;

export type Encoding = (typeof ENCODINGS)[number];

export interface TrialStarted {
  type: "trial_started";
  block: number;
  trial: number;
  scene: string;
  encoding: Encoding;
  cards: string[];
  target_card: string;
  position: [number, number];
  table: [number, number];
}

export interface Tick {
  type: "tick";
  position: [number, number];
  dose_rate_sv_h: number;
  cumulative_sv: number;
  elapsed_s: number;
}

export interface CardResult {
  type: "card_result";
  accepted: boolean;
  reason?: string;
  card?: string;
}

export interface TrialMetrics {
  cumulative_dose_sv: number;
  mean_dose_rate_sv_h: number;
  mean_nearest_dist_m: number;
  max_dose_rate_sv_h: number;
  table_proximity_s: number;
}

export interface TrialEnded {
  type: "trial_ended";
  metrics: TrialMetrics;
  path_side: string;
  took_higher_exposure: boolean;
  task_errors: number;
  state: string;
}

export interface ServerError {
  type: "error";
  reason: string;
}

export type ServerMessage = TrialStarted | Tick | CardResult | TrialEnded | ServerError;

export interface SceneDoc {
  name: string;
  room: {
    width_m: number;
    length_m: number;
    partition_z_m: number;
    partition_x0_m: number;
    partition_x1_m: number;
  };
  doors: { entrance_z_m: [number, number]; exit_z_m: [number, number] };
  sources: { position_m: [number, number, number]; rate_sv_h_at_1m: number }[];
  table_anchor_m: [number, number, number];
  higher_exposure_side: string | null;
}

export interface SessionSummary {
  session_id: string;
  participant: string;
  seed: number;
  state: string;
  completed_trials: number;
  total_trials: number;
  next_trial: { block: number; trial: number; scene: string; encoding: Encoding } | null;
}

export function parseServerMessage(raw: string): ServerMessage {
  const msg = JSON.parse(raw);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error(`malformed server message: ${raw}`);
  }
  return msg as ServerMessage;
}

/** A ranking submission must order each encoding exactly once. */
export function isEncodingPermutation(order: string[]): order is Encoding[] {
  if (order.length !== ENCODINGS.length) return false;
  const seen = new Set(order);
  return seen.size === ENCODINGS.length && ENCODINGS.every((e) => seen.has(e));
}
