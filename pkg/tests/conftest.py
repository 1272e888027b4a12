import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from radvis.encoding import load_viridis
from radvis.field import RadiationSource
from radvis.scenes import load_bundled_scenes


@pytest.fixture(scope="session")
def lut():
    return load_viridis()


@pytest.fixture(scope="session")
def lut_rgb_list(lut):
    return [tuple(int(c) for c in row) for row in lut.rgb]


@pytest.fixture(scope="session")
def demo_sources():
    return [
        RadiationSource((1.0, 0.25, 1.0), 0.001),
        RadiationSource((3.0, 0.25, 1.4), 0.001),
        RadiationSource((2.0, 0.25, 3.0), 0.001),
    ]


@pytest.fixture(scope="session")
def demo_sources_raw(demo_sources):
    return [(s.position, s.rate_at_1m) for s in demo_sources]


@pytest.fixture(scope="session")
def scenes_by_name():
    return load_bundled_scenes()


def rng(seed=0):
    return np.random.default_rng(seed)
