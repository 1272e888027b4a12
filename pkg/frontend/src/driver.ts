// Scripted trial driver: steers the avatar through a trial the way a
// keyboard user would (fixed-cadence move intents toward waypoints). Used
// by the integration tests and the demo autopilot button.

import type { SceneDoc, ServerMessage, Tick, TrialEnded, TrialStarted } from "./protocol.js";
import type { SessionSocket } from "./net.js";
import { reduce, type TrialViewState } from "./state.js";

const DT = 0.05;
const ARRIVE_M = 0.12;
const MAX_STEPS = 2000;

export interface DriverResult {
  started: TrialStarted;
  ended: TrialEnded;
  finalState: TrialViewState;
}

function expect<T extends ServerMessage["type"]>(msg: ServerMessage, type: T): ServerMessage & { type: T } {
  if (msg.type === "error") throw new Error(`server error: ${(msg as any).reason}`);
  if (msg.type !== type) throw new Error(`expected ${type}, got ${msg.type}`);
  return msg as ServerMessage & { type: T };
}

export class ScriptedDriver {
  constructor(
    private socket: SessionSocket,
    private state: TrialViewState,
    private onState: (s: TrialViewState) => void = () => {},
  ) {}

  private apply(msg: ServerMessage): ServerMessage {
    this.state = reduce(this.state, msg);
    this.onState(this.state);
    return msg;
  }

  get current(): TrialViewState {
    return this.state;
  }

  async driveTo(target: [number, number]): Promise<Tick> {
    let tick = expect(this.apply(await this.socket.move([0, 0], 0.01)), "tick") as Tick;
    for (let i = 0; i < MAX_STEPS; i++) {
      const [x, z] = tick.position;
      const dx = target[0] - x;
      const dz = target[1] - z;
      const dist = Math.hypot(dx, dz);
      if (dist < ARRIVE_M) return tick;
      tick = expect(
        this.apply(await this.socket.move([dx / dist, dz / dist], DT)),
        "tick",
      ) as Tick;
    }
    throw new Error(`drive to (${target}) did not arrive`);
  }

  /** Entrance -> gap -> table -> card -> gap -> exit -> end_trial. */
  async completeTrial(scene: SceneDoc, side: "left" | "right" = "left"): Promise<DriverResult> {
    const started = expect(this.apply(await this.socket.startTrial()), "trial_started") as TrialStarted;
    const room = scene.room;
    const gapX =
      side === "left"
        ? room.partition_x0_m / 2
        : (room.partition_x1_m + room.width_m) / 2;
    const gap: [number, number] = [gapX, room.partition_z_m];
    const table: [number, number] = started.table;

    await this.driveTo(gap);
    await this.driveTo(table);
    const idx = started.cards.indexOf(started.target_card);
    const pick = this.apply(await this.socket.pickCard(idx));
    if (pick.type !== "card_result" || !pick.accepted) {
      throw new Error(`card pick failed: ${JSON.stringify(pick)}`);
    }
    await this.driveTo(gap);
    const exitMid: [number, number] = [0.25, (scene.doors.exit_z_m[0] + scene.doors.exit_z_m[1]) / 2];
    await this.driveTo(exitMid);
    const ended = expect(this.apply(await this.socket.endTrial()), "trial_ended") as TrialEnded;
    return { started, ended, finalState: this.state };
  }
}
