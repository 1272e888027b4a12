// Top-down canvas rendering of the room, baked floor texture, avatar, and HUD.

import type { SceneDoc } from "./protocol.js";
import type { TrialViewState } from "./state.js";
import { nearTable } from "./state.js";

const WALL = "#444";
const AVATAR = "#e74c3c";
const TABLE = "#8d6e43";
const DOOR = "#2ecc71";

export class RoomView {
  private ctx: CanvasRenderingContext2D;
  private floor: HTMLImageElement | null = null;
  pxPerM = 60;

  constructor(private canvas: HTMLCanvasElement, private scene: SceneDoc) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    this.ctx = ctx;
    canvas.width = scene.room.width_m * this.pxPerM + 40;
    canvas.height = scene.room.length_m * this.pxPerM + 40;
  }

  setFloorTexture(img: HTMLImageElement) {
    this.floor = img;
  }

  /** world (x meters, z meters) -> canvas pixels; z grows downward. */
  toCanvas(x: number, z: number): [number, number] {
    return [20 + x * this.pxPerM, 20 + z * this.pxPerM];
  }

  fromCanvas(px: number, py: number): [number, number] {
    return [(px - 20) / this.pxPerM, (py - 20) / this.pxPerM];
  }

  draw(state: TrialViewState, heading: [number, number]) {
    const { ctx } = this;
    const room = this.scene.room;
    const [w, h] = [this.canvas.width, this.canvas.height];
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#d9d4cc";
    const [x0, y0] = this.toCanvas(0, 0);
    const roomW = room.width_m * this.pxPerM;
    const roomH = room.length_m * this.pxPerM;
    ctx.fillRect(x0, y0, roomW, roomH);
    if (this.floor) {
      ctx.drawImage(this.floor, x0, y0, roomW, roomH);
    }

    // walls
    ctx.strokeStyle = WALL;
    ctx.lineWidth = 4;
    ctx.strokeRect(x0, y0, roomW, roomH);

    // partition
    const [px0, py] = this.toCanvas(room.partition_x0_m, room.partition_z_m);
    const [px1] = this.toCanvas(room.partition_x1_m, room.partition_z_m);
    ctx.beginPath();
    ctx.moveTo(px0, py);
    ctx.lineTo(px1, py);
    ctx.stroke();

    // doors on the x=0 wall
    ctx.strokeStyle = DOOR;
    for (const [z0, z1] of [this.scene.doors.entrance_z_m, this.scene.doors.exit_z_m]) {
      const [dx, dy0] = this.toCanvas(0, z0);
      const [, dy1] = this.toCanvas(0, z1);
      ctx.beginPath();
      ctx.moveTo(dx, dy0);
      ctx.lineTo(dx, dy1);
      ctx.stroke();
    }

    // table with proximity ring
    const [tx, tz] = state.table;
    const [ctx_, cty] = this.toCanvas(tx, tz);
    ctx.fillStyle = TABLE;
    ctx.fillRect(ctx_ - 18, cty - 12, 36, 24);
    ctx.strokeStyle = nearTable(state) ? DOOR : "#999";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.arc(ctx_, cty, 1.5 * this.pxPerM, 0, Math.PI * 2);
    ctx.stroke();
    ctx.setLineDash([]);

    // avatar with heading tick
    const [ax, az] = state.position;
    const [cax, cay] = this.toCanvas(ax, az);
    ctx.fillStyle = AVATAR;
    ctx.beginPath();
    ctx.arc(cax, cay, 7, 0, Math.PI * 2);
    ctx.fill();
    const hn = Math.hypot(heading[0], heading[1]) || 1;
    ctx.strokeStyle = AVATAR;
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(cax, cay);
    ctx.lineTo(cax + (heading[0] / hn) * 14, cay + (heading[1] / hn) * 14);
    ctx.stroke();
  }
}

export function formatHud(state: TrialViewState): string {
  const h = state.hud;
  return (
    `t ${h.elapsedS.toFixed(1)} s | ` +
    `rate ${(h.doseRateSvH * 1e3).toFixed(3)} mSv/h | ` +
    `dose ${(h.gaugeSv * 1e6).toFixed(3)} uSv`
  );
}

export function formatSummary(state: TrialViewState): string[] {
  const m = state.lastSummary;
  if (!m) return [];
  return [
    `cumulative dose: ${(m.cumulative_dose_sv * 1e6).toFixed(4)} uSv`,
    `mean dose rate: ${(m.mean_dose_rate_sv_h * 1e3).toFixed(4)} mSv/h`,
    `mean nearest source: ${m.mean_nearest_dist_m.toFixed(2)} m`,
    `max dose rate: ${(m.max_dose_rate_sv_h * 1e3).toFixed(4)} mSv/h`,
    `time near table: ${m.table_proximity_s.toFixed(1)} s`,
  ];
}
