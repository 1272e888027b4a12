"""Walkthrough session backend.

Server-authoritative trial state: clients send movement intents, the server
integrates positions, accrues dose, and computes the final trial metrics, so
logs cannot be spoofed and match the offline pipeline exactly. Assets
(scene JSON, baked floor textures, legends, stencil previews) are read-only
and cached.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from PIL import Image

from . import exposure
from .agents import PARTITION_HALF_THICKNESS_M, SENSOR_HEIGHT_M, WALK_SPEED_M_S, _clamp_move
from .encoding import KINDS, make_spec
from .exposure import TABLE_PROXIMITY_M, TrajectoryLog
from .field import dose_rate
from .raster import bake_floor_texture, legend_strip
from .schedule import Schedule, Trial, generate_schedule
from .scenes import Scene, load_bundled_scenes, scene_to_dict
from .stencil import PATTERNS, pattern_preview

MAX_DT_S = 0.1
EXIT_TOLERANCE_M = 0.5
CARD_COUNT = 26
CARD_LABELS = tuple(f"{suit}{rank:02d}" for suit in ("H", "S") for rank in range(1, 14))


@dataclass
class TrialRuntime:
    trial: Trial
    scene: Scene
    target_card: str
    times: list[float] = field(default_factory=list)
    positions: list[tuple[float, float, float]] = field(default_factory=list)
    rates: list[float] = field(default_factory=list)
    cumulative_sv: float = 0.0
    card_collected: bool = False
    task_errors: int = 0

    @property
    def elapsed(self) -> float:
        return self.times[-1] if self.times else 0.0


class Session:
    """One participant's run through the schedule. All mutating commands are
    serialized by the per-session lock."""

    def __init__(self, participant: str, seed: int, scenes: dict[str, Scene], out_dir: Path):
        if not participant:
            raise ValueError("participant id must be non-empty")
        self.id = uuid.uuid4().hex[:12]
        self.participant = participant
        self.seed = seed
        self.schedule: Schedule = generate_schedule(participant, seed)
        self.scenes = scenes
        self.out_dir = out_dir / self.id
        self.lock = threading.Lock()

        self._trials: list[Trial] = self.schedule.all_trials
        self.cursor = 0
        self.state = "idle"
        self.avatar = (0.0, 0.0)  # (x, z); meaningful only in_trial
        self.current: TrialRuntime | None = None
        self.metrics_rows: list[dict] = []
        self.questionnaires: dict[int, dict] = {}
        self.ranking: dict | None = None
        self._card_order: tuple[str, ...] = ()
        self._card_block = -1

    # -- deterministic per-session randomness ------------------------------

    def _rng(self, *key: object) -> np.random.Generator:
        digest = hashlib.sha256(
            f"{self.participant}:{':'.join(str(k) for k in key)}".encode()
        ).digest()
        words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
        return np.random.default_rng(
            np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, *words])
        )

    def _cards_for_block(self, block: int) -> tuple[str, ...]:
        # Layout is re-randomized between blocks, fixed within one.
        if block != self._card_block:
            rng = self._rng("cards", block)
            order = rng.permutation(CARD_COUNT)
            self._card_order = tuple(CARD_LABELS[i] for i in order)
            self._card_block = block
        return self._card_order

    # -- lifecycle ----------------------------------------------------------

    def peek_trial(self) -> Trial | None:
        if self.cursor >= len(self._trials):
            return None
        return self._trials[self.cursor]

    def start_trial(self) -> dict:
        if self.state != "idle":
            raise CommandRejected(f"cannot start a trial in state {self.state!r}")
        trial = self.peek_trial()
        if trial is None:
            raise CommandRejected("schedule complete")
        scene = self.scenes[trial.scene]
        cards = self._cards_for_block(trial.block)
        target = cards[int(self._rng("target", trial.block, trial.trial).integers(CARD_COUNT))]

        _, ez = scene.room.door_mid("entrance")
        start = (0.3, ez)
        rt = TrialRuntime(trial=trial, scene=scene, target_card=target)
        pos3 = (start[0], SENSOR_HEIGHT_M, start[1])
        rt.times.append(0.0)
        rt.positions.append(pos3)
        rt.rates.append(dose_rate(pos3, scene.sources))
        self.current = rt
        self.avatar = start
        self.state = "in_trial"
        return {
            "type": "trial_started",
            "block": trial.block,
            "trial": trial.trial,
            "scene": trial.scene,
            "encoding": trial.encoding,
            "cards": list(cards),
            "target_card": target,
            "position": [start[0], start[1]],
            "table": [scene.table_anchor[0], scene.table_anchor[2]],
        }

    def move(self, intent: tuple[float, float], dt: float) -> dict:
        if self.state != "in_trial" or self.current is None:
            raise CommandRejected("move requires an active trial")
        if not (0.0 < dt <= MAX_DT_S):
            raise CommandRejected(f"dt must be in (0, {MAX_DT_S}]")
        ix, iz = float(intent[0]), float(intent[1])
        mag = math.hypot(ix, iz)
        if mag > 1.0:
            ix, iz = ix / mag, iz / mag
        rt = self.current
        room = rt.scene.room
        x, z = self.avatar
        nx = x + ix * WALK_SPEED_M_S * dt
        nz = z + iz * WALK_SPEED_M_S * dt
        x2, z2 = _clamp_move(room, x, z, nx, nz)

        t_new = rt.times[-1] + dt
        dt_used = t_new - rt.times[-1]  # matches the offline diff exactly
        pos3 = (x2, SENSOR_HEIGHT_M, z2)
        rate = dose_rate(pos3, rt.scene.sources)
        rt.cumulative_sv += 0.5 * (rt.rates[-1] + rate) * dt_used / 3600.0
        rt.times.append(t_new)
        rt.positions.append(pos3)
        rt.rates.append(rate)
        self.avatar = (x2, z2)
        return {
            "type": "tick",
            "position": [x2, z2],
            "dose_rate_sv_h": rate,
            "cumulative_sv": rt.cumulative_sv,
            "elapsed_s": rt.elapsed,
        }

    def pick_card(self, index: int) -> dict:
        if self.state != "in_trial" or self.current is None:
            raise CommandRejected("pick_card requires an active trial")
        rt = self.current
        if not (0 <= index < CARD_COUNT):
            raise CommandRejected(f"card index out of range: {index}")
        x, z = self.avatar
        tx, _, tz = rt.scene.table_anchor
        if math.hypot(x - tx, z - tz) > TABLE_PROXIMITY_M:
            return {"type": "card_result", "accepted": False, "reason": "too far from table"}
        if rt.card_collected:
            return {"type": "card_result", "accepted": False, "reason": "card already collected"}
        cards = self._cards_for_block(rt.trial.block)
        if cards[index] == rt.target_card:
            rt.card_collected = True
            return {"type": "card_result", "accepted": True, "card": cards[index]}
        rt.task_errors += 1
        return {"type": "card_result", "accepted": False, "reason": "wrong card"}

    def end_trial(self) -> dict:
        if self.state != "in_trial" or self.current is None:
            raise CommandRejected("end_trial requires an active trial")
        rt = self.current
        if not rt.card_collected:
            raise CommandRejected("target card not collected")
        room = rt.scene.room
        x, z = self.avatar
        z0, z1 = room.exit_z
        dz = 0.0 if z0 <= z <= z1 else min(abs(z - z0), abs(z - z1))
        if math.hypot(x - 0.0, dz) > EXIT_TOLERANCE_M:
            raise CommandRejected("avatar is not at the exit door")
        if len(rt.times) < 2:
            raise CommandRejected("trial has no movement to score")

        log = TrajectoryLog(np.array(rt.times), np.array(rt.positions))
        cleaned = exposure.clean_trajectory(log, room)
        metrics = exposure.compute_metrics(cleaned, rt.scene)
        try:
            side, took = exposure.path_side(cleaned, rt.scene)
        except ValueError:
            side, took = "", False

        row = {
            "participant": self.participant,
            "block": rt.trial.block,
            "trial": rt.trial.trial,
            "scene": rt.trial.scene,
            "encoding": rt.trial.encoding,
            **metrics.as_dict(),
            "path_side": side,
            "took_higher_exposure": took,
            "scene_designates_side": rt.scene.higher_exposure_side is not None,
        }
        self.metrics_rows.append(row)
        self._persist_trial(rt, log, row)

        self.cursor += 1
        nxt = self.peek_trial()
        if nxt is None or (rt.trial.block >= 1 and nxt.block != rt.trial.block):
            self.state = "between_blocks"
        else:
            self.state = "idle"
        self.current = None
        return {
            "type": "trial_ended",
            "metrics": metrics.as_dict(),
            "path_side": side,
            "took_higher_exposure": took,
            "task_errors": rt.task_errors,
            "state": self.state,
        }

    def submit_questionnaire(self, block: int, answers: dict) -> dict:
        if self.state not in ("between_blocks", "finished"):
            raise CommandRejected("questionnaire accepted only between blocks")
        self.questionnaires[block] = answers
        self._persist_json("questionnaires.json", {str(k): v for k, v in self.questionnaires.items()})
        if self.peek_trial() is not None:
            self.state = "idle"
        return {"stored": True, "block": block}

    def submit_ranking(self, order: list[str], free_text: str = "") -> dict:
        if sorted(order) != sorted(KINDS):
            raise CommandRejected("ranking must be a permutation of the six encodings")
        self.ranking = {"order": order, "free_text": free_text}
        self._persist_json("ranking.json", self.ranking)
        if self.peek_trial() is None:
            self.state = "finished"
        return {"stored": True}

    def summary(self) -> dict:
        nxt = self.peek_trial()
        return {
            "session_id": self.id,
            "participant": self.participant,
            "seed": self.seed,
            "state": self.state,
            "completed_trials": self.cursor,
            "total_trials": len(self._trials),
            "next_trial": None if nxt is None else nxt.__dict__,
            "schedule": self.schedule.as_dict(),
        }

    # -- persistence ---------------------------------------------------------

    def _persist_trial(self, rt: TrialRuntime, log: TrajectoryLog, row: dict) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        stem = f"trial_b{rt.trial.block}_t{rt.trial.trial}"
        sidecar = {
            "participant": self.participant,
            "block": rt.trial.block,
            "trial": rt.trial.trial,
            "scene": rt.trial.scene,
            "encoding": rt.trial.encoding,
            "seed": self.seed,
            "target_card": rt.target_card,
            "task_errors": rt.task_errors,
        }
        exposure.write_trajectory_csv(log, self.out_dir / f"{stem}.csv", sidecar)
        exposure.write_metrics_csv(self.metrics_rows, self.out_dir / "metrics.csv")

    def _persist_json(self, name: str, payload: dict) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / name).write_text(json.dumps(payload, indent=2) + "\n")


class CommandRejected(Exception):
    pass


class SessionManager:
    def __init__(self, out_dir: str | Path = "sessions"):
        self.scenes = load_bundled_scenes()
        self.out_dir = Path(out_dir)
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._asset_cache: dict[tuple, bytes] = {}

    def create(self, participant: str, seed: int) -> Session:
        session = Session(participant, seed, self.scenes, self.out_dir)
        with self._lock:
            self.sessions[session.id] = session
        return session

    def get(self, sid: str) -> Session:
        try:
            return self.sessions[sid]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no session {sid}") from None

    def floor_png(self, scene_name: str, encoding: str) -> bytes:
        key = ("floor", scene_name, encoding)
        if key not in self._asset_cache:
            scene = self.scenes.get(scene_name)
            if scene is None or encoding not in KINDS:
                raise HTTPException(status_code=404, detail="unknown scene or encoding")
            extent = (0.0, 0.0, scene.room.width, scene.room.length)
            nx = 192
            nz = int(round(nx * scene.room.length / scene.room.width))
            img = bake_floor_texture(scene, make_spec(encoding), extent, (nx, nz))
            self._asset_cache[key] = _png_bytes(img)
        return self._asset_cache[key]

    def legend_png(self, encoding: str) -> bytes:
        key = ("legend", encoding)
        if key not in self._asset_cache:
            if encoding not in KINDS:
                raise HTTPException(status_code=404, detail="unknown encoding")
            self._asset_cache[key] = _png_bytes(legend_strip(make_spec(encoding)))
        return self._asset_cache[key]

    def stencil_png(self, kind: str) -> bytes:
        key = ("stencil", kind)
        if key not in self._asset_cache:
            if kind not in PATTERNS:
                raise HTTPException(status_code=404, detail="unknown stencil")
            self._asset_cache[key] = _png_bytes(pattern_preview(kind, size=256))
        return self._asset_cache[key]


def _png_bytes(arr: np.ndarray) -> bytes:
    mode = "RGBA" if arr.ndim == 3 else "L"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def create_app(out_dir: str | Path = "sessions") -> FastAPI:
    app = FastAPI(title="radvis session service")
    from fastapi.middleware.cors import CORSMiddleware

    # the walkthrough UI may be served from another origin (dev server, file://)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    manager = SessionManager(out_dir=out_dir)
    app.state.manager = manager

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict):
        participant = body.get("participant", "")
        seed = body.get("seed")
        if not participant or not isinstance(seed, int):
            raise HTTPException(status_code=422, detail="need participant (non-empty) and integer seed")
        session = manager.create(participant, seed)
        return session.summary()

    @app.get("/api/sessions/{sid}")
    def session_state(sid: str):
        return manager.get(sid).summary()

    @app.get("/api/sessions/{sid}/trials")
    def session_trials(sid: str):
        return {"rows": manager.get(sid).metrics_rows}

    @app.post("/api/sessions/{sid}/questionnaire")
    def questionnaire(sid: str, body: dict):
        session = manager.get(sid)
        block = body.get("block")
        answers = body.get("answers")
        if not isinstance(block, int) or not isinstance(answers, dict):
            raise HTTPException(status_code=422, detail="need block (int) and answers (object)")
        with session.lock:
            try:
                return session.submit_questionnaire(block, answers)
            except CommandRejected as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None

    @app.post("/api/sessions/{sid}/ranking")
    def ranking(sid: str, body: dict):
        session = manager.get(sid)
        order = body.get("order")
        if not isinstance(order, list):
            raise HTTPException(status_code=422, detail="need order (list of six encodings)")
        with session.lock:
            try:
                return session.submit_ranking(order, body.get("free_text", ""))
            except CommandRejected as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None

    @app.get("/api/scenes")
    def list_scenes():
        return {"scenes": sorted(manager.scenes)}

    @app.get("/api/scenes/{name}")
    def get_scene(name: str):
        scene = manager.scenes.get(name)
        if scene is None:
            raise HTTPException(status_code=404, detail=f"no scene {name}")
        return scene_to_dict(scene)

    @app.get("/api/assets/floor/{scene}/{encoding}.png")
    def floor_asset(scene: str, encoding: str):
        return Response(manager.floor_png(scene, encoding), media_type="image/png")

    @app.get("/api/assets/legend/{encoding}.png")
    def legend_asset(encoding: str):
        return Response(manager.legend_png(encoding), media_type="image/png")

    @app.get("/api/assets/stencil/{kind}.png")
    def stencil_asset(kind: str):
        return Response(manager.stencil_png(kind), media_type="image/png")

    @app.websocket("/api/sessions/{sid}/ws")
    async def session_ws(ws: WebSocket, sid: str):
        session = manager.sessions.get(sid)
        await ws.accept()
        if session is None:
            await ws.send_json({"type": "error", "reason": f"no session {sid}"})
            await ws.close()
            return
        try:
            while True:
                msg = await ws.receive_json()
                await ws.send_json(_dispatch(session, msg))
        except WebSocketDisconnect:
            return

    return app


def _dispatch(session: Session, msg: dict) -> dict:
    kind = msg.get("type")
    try:
        with session.lock:
            if kind == "start_trial":
                return session.start_trial()
            if kind == "move":
                intent = msg.get("intent", (0.0, 0.0))
                return session.move((intent[0], intent[1]), float(msg.get("dt", 0.05)))
            if kind == "pick_card":
                return session.pick_card(int(msg.get("index", -1)))
            if kind == "end_trial":
                return session.end_trial()
            if kind == "state":
                return {"type": "state", **session.summary()}
        return {"type": "error", "reason": f"unknown message type {kind!r}"}
    except CommandRejected as exc:
        return {"type": "error", "reason": str(exc)}
    except (TypeError, ValueError, KeyError, IndexError) as exc:
        return {"type": "error", "reason": f"bad message: {exc}"}
