"""Experiment schedules: one training block plus six encoding blocks of five
scene trials, all orders derived from a seeded PCG64 stream.

The stream is keyed by (seed, sha256(participant)), so schedules replicate
across processes and platforms for the same inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoding import KINDS
from .scenes import SCENE_NAMES, TRAINING_SCENE

ENCODINGS = KINDS  # block order permutes these six


@dataclass(frozen=True)
class Trial:
    block: int  # 0 = training
    trial: int  # 1-based within block
    scene: str
    encoding: str


@dataclass(frozen=True)
class Schedule:
    participant: str
    seed: int
    training: tuple[Trial, ...]
    blocks: tuple[tuple[Trial, ...], ...]

    @property
    def main_trials(self) -> list[Trial]:
        return [t for block in self.blocks for t in block]

    @property
    def all_trials(self) -> list[Trial]:
        return [*self.training, *self.main_trials]

    def as_dict(self) -> dict:
        return {
            "participant": self.participant,
            "seed": self.seed,
            "training": [t.__dict__ for t in self.training],
            "blocks": [
                {
                    "block": i + 1,
                    "encoding": block[0].encoding,
                    "trials": [t.__dict__ for t in block],
                }
                for i, block in enumerate(self.blocks)
            ],
        }


def _rng_for(participant: str, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(participant.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *words]))


def generate_schedule(participant: str, seed: int) -> Schedule:
    """Deterministic for (participant, seed); every (encoding, scene) pair
    appears exactly once across the six main blocks."""
    if not participant:
        raise ValueError("participant id must be non-empty")
    rng = _rng_for(participant, seed)

    training_order = rng.permutation(len(ENCODINGS))
    training = tuple(
        Trial(block=0, trial=i + 1, scene=TRAINING_SCENE, encoding=ENCODINGS[j])
        for i, j in enumerate(training_order)
    )

    block_order = rng.permutation(len(ENCODINGS))
    blocks = []
    for b, enc_idx in enumerate(block_order):
        scene_order = rng.permutation(len(SCENE_NAMES))
        blocks.append(
            tuple(
                Trial(
                    block=b + 1,
                    trial=i + 1,
                    scene=SCENE_NAMES[j],
                    encoding=ENCODINGS[enc_idx],
                )
                for i, j in enumerate(scene_order)
            )
        )
    return Schedule(participant=participant, seed=seed, training=training, blocks=tuple(blocks))


def save_schedule(schedule: Schedule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schedule.as_dict(), indent=2) + "\n")


def load_schedule(path: str | Path) -> Schedule:
    doc = json.loads(Path(path).read_text())
    training = tuple(Trial(**t) for t in doc["training"])
    blocks = tuple(tuple(Trial(**t) for t in b["trials"]) for b in doc["blocks"])
    return Schedule(doc["participant"], doc["seed"], training, blocks)
