"""Command-line harness tying rendering, simulation, metrics, and stats into
reproducible runs. Exit codes: 0 ok, 1 usage error, 2 runtime failure."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import agents, exposure, schedule as sched, scenes, stats
from .backend import active_backend
from .camera import Camera
from .encoding import KINDS, make_spec
from .mesh import load_mesh, make_plane, make_room_mesh
from .raster import (
    bake_floor_texture,
    billboard_overlay,
    default_threads,
    legend_strip,
    render,
    save_png,
)
from .stencil import PATTERNS, pattern_preview

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_vec3(text: str) -> tuple[float, float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    return parts[0], parts[1], parts[2]


def _resolve_mesh(name: str):
    if name == "plane":
        return make_plane(4.0, 4.0, divisions=32)
    if name == "room":
        return make_room_mesh()
    return load_mesh(name)


def _load_scene_arg(name: str) -> scenes.Scene:
    return scenes.load_scene(name)


def _default_camera(scene: scenes.Scene | None, width: int, height: int) -> Camera:
    if scene is None:
        return Camera(position=(2.0, 4.5, -1.5), look_at=(2.0, 0.0, 2.0), resolution=(width, height))
    room = scene.room
    return Camera(
        position=(room.width / 2.0, 6.5, -2.5),
        look_at=(room.width / 2.0, 0.0, room.length / 2.0),
        resolution=(width, height),
    )


def cmd_render(args) -> int:
    scene = _load_scene_arg(args.scene) if args.scene else None
    mesh = _resolve_mesh(args.mesh)
    field = scene if scene is not None else scenes.fig_style_demo_sources()
    if args.camera_pos and args.camera_look:
        cam = Camera(
            position=_parse_vec3(args.camera_pos),
            look_at=_parse_vec3(args.camera_look),
            fov_deg=args.fov,
            resolution=(args.width, args.height),
        )
    else:
        cam = _default_camera(scene, args.width, args.height)
    spec = make_spec(args.encoding)
    frame = render(mesh, field, spec, cam, threads=args.threads)
    if args.billboards:
        frame = billboard_overlay(frame, field, cam, spec=spec, threads=args.threads)
    frame.save_png(args.out)
    print(f"wrote {args.out} ({active_backend()} backend)")
    return EXIT_OK


def cmd_bake(args) -> int:
    scene = _load_scene_arg(args.scene)
    spec = make_spec(args.encoding)
    extent = (0.0, 0.0, scene.room.width, scene.room.length)
    nx = args.texels
    nz = int(round(nx * scene.room.length / scene.room.width))
    img = bake_floor_texture(scene, spec, extent, (nx, nz), threads=args.threads)
    save_png(img, args.out)
    print(f"wrote {args.out} ({nx}x{nz} texels)")
    return EXIT_OK


def cmd_schedule(args) -> int:
    s = sched.generate_schedule(args.participant, args.seed)
    text = json.dumps(s.as_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def _trial_rng(participant: str, seed: int, block: int, trial: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{participant}:{block}:{trial}".encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *words]))


def _trial_policy(scene: scenes.Scene, encoding: str, rng: np.random.Generator, kind: str):
    """Synthetic behavior model: encodings that read faster get higher
    avoidance gains; per-trial jitter varies routes between participants."""
    gains = {
        "continuous": 0.15,
        "banded": 0.30,
        "transparent": 0.20,
        "circle": 0.28,
        "hex": 0.33,
        "arrow": 0.42,
    }
    dwell = float(rng.uniform(2.0, 4.0))
    waypoints, dwells = agents.default_route(scene, side="auto", dwell_s=dwell)
    jitter = rng.uniform(-0.2, 0.2, size=(len(waypoints), 2))
    jitter[0] = 0.0  # entrance and exit stay on the door segments
    jitter[-1] = 0.0
    pts = tuple(
        (float(w[0] + j[0]), float(w[1] + j[1])) for w, j in zip(waypoints, jitter)
    )
    if kind == "waypoint":
        return agents.WaypointPolicy(pts, dwells)
    return agents.GradientAvoiderPolicy(pts, dwells, repulsion_gain=gains.get(encoding, 0.25))


def cmd_simulate(args) -> int:
    scene = _load_scene_arg(args.scene)
    rng = _trial_rng(args.participant, args.seed, args.block, args.trial)
    policy = _trial_policy(scene, args.encoding, rng, args.policy)
    log = agents.simulate_agent(scene, policy, step_s=args.step_s)
    sidecar = {
        "participant": args.participant,
        "block": args.block,
        "trial": args.trial,
        "scene": args.scene,
        "encoding": args.encoding,
        "seed": args.seed,
        "policy": args.policy,
        "step_s": args.step_s,
    }
    exposure.write_trajectory_csv(log, args.out, sidecar)
    print(f"wrote {args.out} ({len(log)} samples, {log.duration:.1f} s)")
    return EXIT_OK


def cmd_metrics(args) -> int:
    traj_dir = Path(args.traj_dir)
    files = sorted(traj_dir.glob("*.csv"))
    if not files:
        raise RuntimeError(f"no trajectory CSVs in {traj_dir}")
    rows = []
    for f in files:
        if not f.with_suffix(".json").exists():
            continue  # not a trajectory (no sidecar), e.g. a metrics output
        log = exposure.read_trajectory_csv(f)
        meta = exposure.read_sidecar(f)
        scene = _load_scene_arg(meta["scene"])
        cleaned = exposure.clean_trajectory(log, scene.room)
        m = exposure.compute_metrics(cleaned, scene)
        try:
            side, took = exposure.path_side(cleaned, scene)
        except ValueError:
            side, took = "", False
        rows.append(
            {
                "participant": meta["participant"],
                "block": meta["block"],
                "trial": meta["trial"],
                "scene": meta["scene"],
                "encoding": meta["encoding"],
                **m.as_dict(),
                "path_side": side,
                "took_higher_exposure": took,
                "scene_designates_side": scene.higher_exposure_side is not None,
            }
        )
    exposure.write_metrics_csv(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} trials)")
    return EXIT_OK


def cmd_analyze(args) -> int:
    rows = exposure.read_metrics_csv(args.metrics)
    covariates = None
    if args.covariates:
        covariates = {}
        import csv as _csv

        with open(args.covariates, newline="") as fh:
            for row in _csv.DictReader(fh):
                covariates[row["participant"]] = float(row["score"])
    report = stats.build_report(rows, covariates=covariates)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_goldens(args) -> int:
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    mesh = make_plane(4.0, 4.0, divisions=64)
    sources = scenes.fig_style_demo_sources()
    cam = Camera(position=(2.0, 4.5, -1.5), look_at=(2.0, 0.0, 2.0), resolution=(args.width, args.height))
    manifest = {"backend": active_backend(), "images": {}}
    for kind in KINDS:
        frame = render(mesh, sources, make_spec(kind), cam, threads=args.threads)
        path = outdir / f"plane_{kind}.png"
        frame.save_png(path)
        manifest["images"][path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
        strip = legend_strip(make_spec(kind))
        spath = outdir / f"legend_{kind}.png"
        save_png(strip, spath)
        manifest["images"][spath.name] = hashlib.sha256(spath.read_bytes()).hexdigest()
    for name in PATTERNS:
        img = pattern_preview(name, size=512)
        path = outdir / f"stencil_{name}.png"
        save_png(img, path)
        manifest["images"][path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(manifest['images'])} images to {outdir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(out_dir=args.out_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="radvis", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="render a mesh with an encoding to PNG")
    r.add_argument("--mesh", default="plane", help="'plane', 'room', or an OBJ/JSON path")
    r.add_argument("--scene", default=None, help="scene name or JSON path (default: demo sources)")
    r.add_argument("--encoding", choices=KINDS, default="continuous")
    r.add_argument("--out", required=True)
    r.add_argument("--width", type=int, default=640)
    r.add_argument("--height", type=int, default=360)
    r.add_argument("--camera-pos", default=None, help="x,y,z")
    r.add_argument("--camera-look", default=None, help="x,y,z")
    r.add_argument("--fov", type=float, default=60.0)
    r.add_argument("--billboards", action="store_true", help="overlay distant-source billboards")
    r.add_argument("--threads", type=int, default=default_threads())
    r.set_defaults(func=cmd_render)

    b = sub.add_parser("bake", help="bake a scene's floor texture to PNG")
    b.add_argument("--scene", required=True)
    b.add_argument("--encoding", choices=KINDS, default="continuous")
    b.add_argument("--out", required=True)
    b.add_argument("--texels", type=int, default=256, help="texels across the room width")
    b.add_argument("--threads", type=int, default=default_threads())
    b.set_defaults(func=cmd_bake)

    s = sub.add_parser("schedule", help="generate a participant schedule JSON")
    s.add_argument("--participant", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_schedule)

    sim = sub.add_parser("simulate", help="simulate one agent trial to a trajectory CSV")
    sim.add_argument("--scene", required=True)
    sim.add_argument("--encoding", choices=KINDS, default="continuous")
    sim.add_argument("--participant", default="SIM")
    sim.add_argument("--block", type=int, default=1)
    sim.add_argument("--trial", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--policy", choices=("waypoint", "gradient"), default="gradient")
    sim.add_argument("--step-s", type=float, default=0.1)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    m = sub.add_parser("metrics", help="compute per-trial metrics over trajectory CSVs")
    m.add_argument("--traj-dir", required=True)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_metrics)

    a = sub.add_parser("analyze", help="nonparametric stats report from a metrics CSV")
    a.add_argument("--metrics", required=True)
    a.add_argument("--out", default=None)
    a.add_argument("--covariates", default=None, help="CSV with participant,score columns")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("goldens", help="regenerate the pinned demo images")
    g.add_argument("--out-dir", default="goldens")
    g.add_argument("--width", type=int, default=480)
    g.add_argument("--height", type=int, default=360)
    g.add_argument("--threads", type=int, default=default_threads())
    g.set_defaults(func=cmd_goldens)

    v = sub.add_parser("serve", help="start the walkthrough session service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8000)
    v.add_argument("--out-dir", default="sessions")
    v.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"radvis: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
