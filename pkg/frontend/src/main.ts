// Browser entry: session setup, keyboard-driven trial loop, questionnaire
// and ranking screens. Movement intents go to the server at a fixed
// cadence; everything on the HUD is the server's reply.

import { ApiClient, SessionSocket, sessionSocketUrl } from "./net.js";
import type { SceneDoc, TrialStarted } from "./protocol.js";
import { ScriptedDriver } from "./driver.js";
import { buildQuestionnaireForm, buildRankingForm } from "./forms.js";
import { initialState, nearTable, pause, reduce, resume, type TrialViewState } from "./state.js";
import { RoomView, formatHud, formatSummary } from "./view.js";

const TICK_MS = 50;

const params = new URLSearchParams(location.search);
const serverUrl = params.get("server") ?? "http://127.0.0.1:8000";

const app = document.getElementById("app")!;
const api = new ApiClient(serverUrl);

let state: TrialViewState = initialState();
let socket: SessionSocket | null = null;
let sessionId = "";
let view: RoomView | null = null;
let keys = new Set<string>();
let moveTimer: number | undefined;
let inFlight = false;

function screen(html: string): HTMLElement {
  app.innerHTML = html;
  return app;
}

function setupScreen() {
  const root = screen(`
    <h1>Radiation walkthrough</h1>
    <p>Steer with WASD / arrow keys. Find the matching card at the table,
       click it, then leave through the exit door.</p>
    <label>Participant <input id="participant" value="P01"></label>
    <label>Seed <input id="seed" type="number" value="42"></label>
    <button id="start">Start session</button>
    <p id="status"></p>
  `);
  root.querySelector("#start")!.addEventListener("click", async () => {
    const participant = (root.querySelector("#participant") as HTMLInputElement).value;
    const seed = parseInt((root.querySelector("#seed") as HTMLInputElement).value, 10);
    try {
      const summary = await api.createSession(participant, seed);
      sessionId = summary.session_id;
      socket = new SessionSocket(sessionSocketUrl(serverUrl, sessionId));
      socket.onClose = onChannelLoss;
      await lobbyScreen();
    } catch (err) {
      (root.querySelector("#status") as HTMLElement).textContent = String(err);
    }
  });
}

async function lobbyScreen() {
  const summary = await api.sessionState(sessionId);
  if (summary.state === "finished") {
    screen(`<h1>Session complete</h1><p>Thanks for walking through.</p>`);
    return;
  }
  if (summary.state === "between_blocks") {
    questionnaireScreen(summary.completed_trials);
    return;
  }
  const next = summary.next_trial;
  if (!next) {
    rankingScreen();
    return;
  }
  const root = screen(`
    <h1>${next.block === 0 ? "Training" : `Block ${next.block}`} — trial ${next.trial}</h1>
    <p>Scene ${next.scene}, encoding <b>${next.encoding}</b></p>
    <img id="legend" alt="color scale legend">
    <button id="go">Enter the room</button>
    <button id="auto">Autopilot demo</button>
  `);
  (root.querySelector("#legend") as HTMLImageElement).src = api.legendUrl(next.encoding);
  root.querySelector("#go")!.addEventListener("click", () => trialScreen(false));
  root.querySelector("#auto")!.addEventListener("click", () => trialScreen(true));
}

async function trialScreen(autopilot: boolean) {
  const root = screen(`
    <div id="banner"></div>
    <canvas id="room"></canvas>
    <div id="hud"></div>
    <div id="cards"></div>
    <div id="message"></div>
    <button id="leave">End trial (at the exit)</button>
  `);
  const started = (await socket!.startTrial()) as TrialStarted;
  if (started.type !== "trial_started") {
    (root.querySelector("#message") as HTMLElement).textContent = JSON.stringify(started);
    return;
  }
  state = reduce(state, started);
  const scene: SceneDoc = await api.scene(started.scene);
  const canvas = root.querySelector("#room") as HTMLCanvasElement;
  view = new RoomView(canvas, scene);
  const floor = new Image();
  floor.crossOrigin = "anonymous";
  floor.src = api.floorTextureUrl(started.scene, started.encoding);
  floor.onload = () => view!.setFloorTexture(floor);

  (root.querySelector("#banner") as HTMLElement).textContent =
    `${started.block === 0 ? "Training" : `Block ${started.block}`} · trial ${started.trial} · ` +
    `${started.encoding} · your card: ${started.target_card}`;

  renderCards(root, started);

  root.querySelector("#leave")!.addEventListener("click", async () => {
    const reply = await socket!.send({ type: "end_trial" });
    state = reduce(state, reply);
    refresh(root);
    if (reply.type === "trial_ended") {
      stopLoop();
      summaryScreen();
    }
  });

  if (autopilot) {
    const driver = new ScriptedDriver(socket!, state, (s) => {
      state = s;
      refresh(root);
    });
    const result = await driver.completeTrial(scene);
    state = result.finalState;
    stopLoop();
    summaryScreen();
    return;
  }
  startLoop(root);
}

function renderCards(root: HTMLElement, started: TrialStarted) {
  const host = root.querySelector("#cards") as HTMLElement;
  host.innerHTML = "";
  started.cards.forEach((label, index) => {
    const tile = document.createElement("button");
    tile.className = "card";
    tile.textContent = label;
    tile.addEventListener("click", async () => {
      if (!nearTable(state)) {
        flash(root, "walk to the table first");
        return;
      }
      const reply = await socket!.send({ type: "pick_card", index });
      state = reduce(state, reply);
      flash(root, reply.type === "card_result" && reply.accepted ? "card collected" : state.lastError);
      refresh(root);
    });
    host.appendChild(tile);
  });
}

function flash(root: HTMLElement, text: string) {
  (root.querySelector("#message") as HTMLElement).textContent = text;
}

function startLoop(root: HTMLElement) {
  window.addEventListener("keydown", onKey);
  window.addEventListener("keyup", onKey);
  moveTimer = window.setInterval(async () => {
    if (state.phase !== "in_trial" || inFlight || !socket) return;
    const intent = keyIntent();
    inFlight = true;
    try {
      const reply = await socket.send({ type: "move", intent, dt: TICK_MS / 1000 });
      state = reduce(state, reply);
      refresh(root);
    } finally {
      inFlight = false;
    }
  }, TICK_MS);
}

function stopLoop() {
  if (moveTimer !== undefined) window.clearInterval(moveTimer);
  window.removeEventListener("keydown", onKey);
  window.removeEventListener("keyup", onKey);
}

function onKey(ev: KeyboardEvent) {
  if (ev.type === "keydown") keys.add(ev.key);
  else keys.delete(ev.key);
}

function keyIntent(): [number, number] {
  let x = 0;
  let z = 0;
  if (keys.has("ArrowLeft") || keys.has("a")) x -= 1;
  if (keys.has("ArrowRight") || keys.has("d")) x += 1;
  if (keys.has("ArrowUp") || keys.has("w")) z -= 1;
  if (keys.has("ArrowDown") || keys.has("s")) z += 1;
  return [x, z];
}

function refresh(root: HTMLElement) {
  if (view) view.draw(state, keyIntent());
  (root.querySelector("#hud") as HTMLElement).textContent = formatHud(state);
  if (state.phase === "paused") {
    flash(root, "connection lost — reconnect to resume");
  }
}

function onChannelLoss() {
  state = pause(state);
  const banner = document.createElement("div");
  banner.className = "paused-overlay";
  banner.innerHTML = `<p>Connection lost.</p><button id="resume">Resume</button>`;
  document.body.appendChild(banner);
  banner.querySelector("#resume")!.addEventListener("click", () => {
    socket = new SessionSocket(sessionSocketUrl(serverUrl, sessionId));
    socket.onClose = onChannelLoss;
    state = resume(state);
    banner.remove();
  });
}

function summaryScreen() {
  const lines = formatSummary(state)
    .map((l) => `<li>${l}</li>`)
    .join("");
  const root = screen(`
    <h1>Trial complete</h1>
    <ul>${lines}</ul>
    <button id="next">Continue</button>
  `);
  root.querySelector("#next")!.addEventListener("click", lobbyScreen);
}

function questionnaireScreen(completedTrials: number) {
  const block = Math.max(1, Math.ceil((completedTrials - 6) / 5));
  const root = screen(`<div id="form"></div>`);
  buildQuestionnaireForm(root.querySelector("#form") as HTMLElement, block, async (answers) => {
    await api.submitQuestionnaire(sessionId, block, answers);
    const summary = await api.sessionState(sessionId);
    if (summary.next_trial === null) rankingScreen();
    else lobbyScreen();
  });
}

function rankingScreen() {
  const root = screen(`<div id="form"></div>`);
  buildRankingForm(root.querySelector("#form") as HTMLElement, async (order, freeText) => {
    try {
      await api.submitRanking(sessionId, order, freeText);
      screen(`<h1>Session complete</h1><p>Ranking stored. Thanks!</p>`);
    } catch (err) {
      alert(String(err));
    }
  });
}

setupScreen();
