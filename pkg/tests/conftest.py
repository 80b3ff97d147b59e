"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest

from orthosfm import geometry as geo
from orthosfm import scene_sim as sim

# The worked example used throughout: a triangle with squared edge lengths
# exactly (4, 9, 12.6878), i.e. a = 2, b = 3, c = 3.562 (to 4 digits).
GOLDEN_SQ = (4.0, 9.0, 12.6878)

TRIANGLE_PAIRS = (("P", "Q"), ("Q", "R"), ("R", "P"))
TETRA_PAIRS = TRIANGLE_PAIRS + (("T", "R"), ("T", "P"), ("T", "Q"))


def golden_body():
    """Planar embedding of the worked-example triangle."""
    a_sq, b_sq, c_sq = GOLDEN_SQ
    x = (a_sq + c_sq - b_sq) / (2.0 * math.sqrt(a_sq))
    y = math.sqrt(c_sq - x * x)
    return (
        ("P", geo.Point3(0.0, 0.0, 0.0)),
        ("Q", geo.Point3(math.sqrt(a_sq), 0.0, 0.0)),
        ("R", geo.Point3(x, y, 0.0)),
    )


def golden_scene(n_frames: int, seed: int = 42) -> sim.Scene:
    motions = [geo.RigidMotion.identity()]
    for j in range(1, n_frames):
        motions.append(sim.gen_motion(sim.subseed(seed, j)))
    return sim.Scene(body=golden_body(), motions=tuple(motions), seed=seed)


def frames_sq(scene: sim.Scene, labels=None):
    """Projected squared distances of every rendered frame."""
    labels = labels or scene.labels
    return [geo.projected_sq_distances(f, labels) for f in sim.render(scene)]


def true_sq(scene: sim.Scene, pairs=TRIANGLE_PAIRS):
    return np.array([scene.true_sq_distance(a, b) for a, b in pairs])


def observation_scale(frames):
    """Diameter of the observation set across frames."""
    return math.sqrt(max(f.scale_sq() for f in frames))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
