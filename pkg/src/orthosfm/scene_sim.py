"""Ground-truth scene generation and rendering.

Random rigid point bodies, random unrestricted motions, orthographic frame
rendering, and calibrated multiplicative noise.  Everything is
deterministic given an explicit 64-bit seed; per-trial sub-streams are
derived with numpy's SeedSequence spawn keys so parallel Monte-Carlo runs
reproduce serial ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import (
    FrameObservation,
    Point2,
    Point3,
    RigidMotion,
    apply_motion,
    project,
)

DEFAULT_LABELS = ("P", "Q", "R", "T", "S")

# Motions rejected as unusable for recovery: nearly no rotation, or the
# rotation axis so close to the viewing direction that depths barely change.
MIN_ROTATION_ANGLE = 0.1        # radians
MIN_AXIS_TILT = 0.1             # |axis_xy|; axis ~ e_z means in-plane motion

_COND_MARGIN = 0.05             # genericity margin for generated bodies


@dataclass(frozen=True)
class Scene:
    """A ground-truth body plus one rigid motion per frame (frame 1 identity)."""

    body: tuple            # of (label, Point3)
    motions: tuple         # of RigidMotion
    seed: int

    def __post_init__(self):
        if len(self.body) < 3:
            raise InvalidInputError("a scene needs at least 3 points")
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "motions", tuple(self.motions))

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.body)

    def true_sq_distance(self, label_a, label_b) -> float:
        pts = dict(self.body)
        d = pts[label_a].as_array() - pts[label_b].as_array()
        return float(d @ d)


@dataclass(frozen=True)
class NoiseSpec:
    """Relative per-coordinate measurement noise.

    level is the maximum relative perturbation for the uniform distribution;
    for gaussian it is treated as a 3-sigma bound.
    """

    level: float
    distribution: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.level < 0:
            raise InvalidInputError("noise level must be >= 0")
        if self.distribution not in ("uniform", "gaussian"):
            raise InvalidInputError(f"unknown distribution {self.distribution!r}")


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _labels_for(n: int) -> tuple:
    if n <= len(DEFAULT_LABELS):
        return DEFAULT_LABELS[:n]
    return DEFAULT_LABELS + tuple(f"X{i}" for i in range(n - len(DEFAULT_LABELS)))


def _is_generic(pts: np.ndarray) -> bool:
    """Non-collinear for 3 points; additionally non-coplanar for >= 4."""
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[1] < _COND_MARGIN * sv[0]:
        return False
    if len(pts) >= 4 and sv[2] < _COND_MARGIN * sv[0]:
        return False
    return True


def gen_body(n: int, seed, _reject_first: int = 0) -> tuple:
    """Sample n labeled points in the unit cube, resampling until the
    configuration is non-collinear (non-coplanar for n >= 4).

    _reject_first is a test hook forcing that many initial draws to be
    discarded as if degenerate.
    """
    if n < 3:
        raise InvalidInputError("need at least 3 points")
    rng = np.random.default_rng(_as_seedseq(seed))
    labels = _labels_for(n)
    for attempt in range(1000):
        pts = rng.uniform(0.0, 1.0, size=(n, 3))
        if attempt < _reject_first:
            continue
        if _is_generic(pts):
            return tuple(
                (lab, Point3(*map(float, p))) for lab, p in zip(labels, pts))
    raise AssertionError("body resampling failed 1000 times")  # pragma: no cover


def _quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotation_angle_axis(rot: np.ndarray) -> tuple:
    """Rotation angle in [0, pi] and a unit axis (arbitrary for angle 0)."""
    angle = math.acos(min(1.0, max(-1.0, (np.trace(rot) - 1.0) / 2.0)))
    axis = np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]])
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        # angle ~ 0 or ~ pi; fall back to the dominant eigenvector
        vals, vecs = np.linalg.eigh((rot + rot.T) / 2.0)
        axis = vecs[:, int(np.argmax(vals))]
        return angle, axis / np.linalg.norm(axis)
    return angle, axis / norm


def gen_motion(seed) -> RigidMotion:
    """A rigid motion with rotation uniform on SO(3) and translation uniform
    in [-1, 1]^2, rejecting near-degenerate motions (tiny rotation, or an
    axis so close to the viewing direction that the motion is in-plane)."""
    rng = np.random.default_rng(_as_seedseq(seed))
    for _ in range(1000):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        rot = _quat_to_matrix(q)
        angle, axis = rotation_angle_axis(rot)
        if angle < MIN_ROTATION_ANGLE:
            continue
        if math.hypot(axis[0], axis[1]) < MIN_AXIS_TILT:
            continue
        translation = rng.uniform(-1.0, 1.0, size=2)
        return RigidMotion(rot, translation)
    raise AssertionError("motion resampling failed 1000 times")  # pragma: no cover


def subseed(seed, *key) -> np.random.SeedSequence:
    """Deterministic sub-stream derivation: identical (seed, key) pairs give
    identical streams regardless of drawing order.  Accepts an int or an
    already-derived SeedSequence (keys concatenate)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(key))


def gen_scene(n_points: int, n_frames: int, seed) -> Scene:
    """A random generic body with one random motion per frame beyond the
    first (frame 1 observes the unmoved body)."""
    if n_frames < 1:
        raise InvalidInputError("need at least 1 frame")
    body = gen_body(n_points, subseed(seed, 0))
    motions = [RigidMotion.identity()]
    for j in range(1, n_frames):
        motions.append(gen_motion(subseed(seed, j)))
    provenance = seed.entropy if isinstance(seed, np.random.SeedSequence) else int(seed)
    return Scene(body=body, motions=tuple(motions), seed=int(provenance))


def render(scene: Scene) -> list:
    """Orthographic frames of the scene: frame j projects motion_j(body)."""
    frames = []
    for motion in scene.motions:
        pts = tuple(
            (lab, project(apply_motion(motion, p))) for lab, p in scene.body)
        frames.append(FrameObservation(pts))
    return frames


def add_noise(frames, spec: NoiseSpec) -> list:
    """Multiplicative per-coordinate noise: x -> x * (1 + eps).

    Uniform: eps ~ U(-level, level).  Gaussian: eps ~ N(0, (level/3)^2),
    so the stated level is a 3-sigma bound.  Bit-identical for level 0.
    """
    if spec.level == 0.0:
        return [FrameObservation(f.points) for f in frames]
    rng = np.random.default_rng(_as_seedseq(spec.seed))
    noisy = []
    for frame in frames:
        coords = np.array([[p.x, p.y] for _, p in frame.points])
        if spec.distribution == "uniform":
            eps = rng.uniform(-spec.level, spec.level, size=coords.shape)
        else:
            eps = rng.normal(0.0, spec.level / 3.0, size=coords.shape)
        coords = coords * (1.0 + eps)
        pts = tuple(
            (lab, Point2(float(x), float(y)))
            for (lab, _), (x, y) in zip(frame.points, coords))
        noisy.append(FrameObservation(pts))
    return noisy
