#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Usage: python3 benchmarks/bench_render.py [--triangles 100000] [--size 1280x720]
"""

import argparse
import os
import time

import numpy as np

from radvis import Camera, RadiationSource, make_spec, render
from radvis.backend import get_kernels
from radvis.mesh import make_plane
from radvis.raster import bake_floor_texture

KINDS = ("continuous", "banded", "transparent", "circle", "hex", "arrow")


def demo_sources():
    return [
        RadiationSource((1.0, 0.25, 1.0), 0.001),
        RadiationSource((3.0, 0.25, 1.4), 0.001),
        RadiationSource((2.0, 0.25, 3.0), 0.001),
    ]


def best_of(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--triangles", type=int, default=100_000)
    ap.add_argument("--size", default="1280x720")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--python-reps", type=int, default=1)
    args = ap.parse_args()

    width, height = (int(v) for v in args.size.split("x"))
    divisions = max(1, int(round((args.triangles / 2) ** 0.5)))
    mesh = make_plane(4.0, 4.0, divisions=divisions)
    sources = demo_sources()
    cam = Camera(position=(2.0, 5.0, -2.0), look_at=(2.0, 0.0, 2.0), resolution=(width, height))
    threads = min(8, os.cpu_count() or 1)

    backends = ["python"]
    try:
        get_kernels("compiled")
        backends.insert(0, "compiled")
    except ImportError:
        print("compiled kernels unavailable; benchmarking the fallback only")

    print(f"mesh: {mesh.triangle_count} triangles, frame {width}x{height}, "
          f"{len(sources)} sources, {threads} threads\n")
    print(f"{'encoding':12s}" + "".join(f"{b + ' (ms)':>16s}" for b in backends) + f"{'ratio':>10s}")
    for kind in KINDS:
        row = {}
        for backend in backends:
            reps = args.reps if backend == "compiled" else args.python_reps
            row[backend] = best_of(
                lambda: render(mesh, sources, make_spec(kind), cam,
                               threads=threads, backend_name=backend),
                reps,
            )
        ratio = row["python"] / row[backends[0]]
        print(f"{kind:12s}" + "".join(f"{row[b]:16.1f}" for b in backends) + f"{ratio:10.1f}x")

    print("\nfloor bake 256x256:")
    for kind in ("continuous", "arrow"):
        row = {}
        for backend in backends:
            row[backend] = best_of(
                lambda: bake_floor_texture(sources, make_spec(kind), (0, 0, 4, 4),
                                           (256, 256), threads=threads, backend_name=backend),
                args.reps,
            )
        ratio = row["python"] / row[backends[0]]
        print(f"{kind:12s}" + "".join(f"{row[b]:16.1f}" for b in backends) + f"{ratio:10.1f}x")

    if backends[0] == "compiled":
        print("\nthread scaling (compiled, continuous):")
        for n in (1, 2, 4, 8):
            if n > (os.cpu_count() or 1):
                break
            ms = best_of(
                lambda: render(mesh, sources, make_spec("continuous"), cam,
                               threads=n, backend_name="compiled"),
                args.reps,
            )
            print(f"  {n} threads: {ms:7.1f} ms")


if __name__ == "__main__":
    main()
