"""Core value types and elementary operations for orthographic multiframe geometry.

Conventions used throughout the library:

* The image plane is z = 0 and orthographic projection drops the z
  coordinate: (x, y, z) -> (x, y).  Depth translation is unobservable, so
  rigid motions carry an in-plane (2D) translation only.
* Squared lengths are the canonical representation; square roots are taken
  only at API edges.
* Triangle edge order is PQ, QR, RP (lengths a, b, c); a tetrahedron adds
  TR, TP, TQ (lengths d, f, g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentLengthsError, InvalidInputError, MissingLabelError

ORTHONORMALITY_TOL = 1e-12

# Edge order conventions: consecutive label pairs measured by
# projected_sq_distances.  Index into the label list (P, Q, R[, T]).
TRIANGLE_EDGES = ((0, 1), (1, 2), (2, 0))                      # PQ, QR, RP
TETRA_EDGES = TRIANGLE_EDGES + ((3, 2), (3, 0), (3, 1))        # + TR, TP, TQ


@dataclass(frozen=True)
class Point2:
    """A 2D image point."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInputError(f"non-finite Point2 ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class Point3:
    """A 3D scene point; z is depth, orthogonal to the image plane."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise InvalidInputError(f"non-finite Point3 ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class RigidMotion:
    """A proper rotation plus an in-plane translation.

    Depth translation has no effect on an orthographic image, so it is
    excluded by construction rather than projected away.
    """

    rotation: np.ndarray      # 3x3, orthonormal, det +1
    translation: np.ndarray   # (tx, ty)

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        tr = np.asarray(self.translation, dtype=float)
        if rot.shape != (3, 3) or tr.shape != (2,):
            raise InvalidInputError("RigidMotion needs a 3x3 rotation and a 2-vector")
        if not (np.isfinite(rot).all() and np.isfinite(tr).all()):
            raise InvalidInputError("non-finite RigidMotion")
        err = np.abs(rot.T @ rot - np.eye(3)).max()
        if err > 1e-9:
            raise InvalidInputError(f"rotation not orthonormal (err={err:.3g})")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise InvalidInputError("rotation must be proper (det +1)")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @staticmethod
    def identity() -> "RigidMotion":
        return RigidMotion(np.eye(3), np.zeros(2))


@dataclass(frozen=True)
class FrameObservation:
    """Labeled 2D projections of the traced points within one frame."""

    points: tuple  # of (label, Point2)

    def __post_init__(self):
        pts = tuple(self.points)
        labels = [lab for lab, _ in pts]
        if len(set(labels)) != len(labels):
            raise InvalidInputError("duplicate labels in frame")
        if len(pts) < 3:
            raise InvalidInputError("a frame needs at least 3 points")
        object.__setattr__(self, "points", pts)

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.points)

    def get(self, label) -> Point2:
        for lab, pt in self.points:
            if lab == label:
                return pt
        raise MissingLabelError(f"label {label!r} absent from frame")

    def scale_sq(self) -> float:
        """Squared diameter of the observation set (tolerance scaling)."""
        arr = np.array([[p.x, p.y] for _, p in self.points])
        diff = arr[:, None, :] - arr[None, :, :]
        return float((diff ** 2).sum(axis=2).max())


@dataclass(frozen=True)
class TriangleDistances:
    """Squared pairwise lengths of a traced triangle (a=|PQ|, b=|QR|, c=|RP|).

    Construction does not enforce positivity so that solver candidates that
    fail feasibility can still be represented; call validate() to check the
    strict invariants.
    """

    a_sq: float
    b_sq: float
    c_sq: float

    def as_tuple(self) -> tuple:
        return (self.a_sq, self.b_sq, self.c_sq)

    def validate(self) -> None:
        a2, b2, c2 = self.as_tuple()
        if not all(math.isfinite(v) and v > 0 for v in (a2, b2, c2)):
            raise InvalidInputError(f"squared lengths must be finite and positive: {self}")
        a, b, c = math.sqrt(a2), math.sqrt(b2), math.sqrt(c2)
        if a + b < c or b + c < a or c + a < b:
            raise InvalidInputError(f"triangle inequality violated: {self}")


@dataclass(frozen=True)
class TetraDistances:
    """Squared pairwise lengths of four traced points.

    Edge naming: a=|PQ|, b=|QR|, c=|RP|, d=|TR|, f=|TP|, g=|TQ|.
    """

    a_sq: float
    b_sq: float
    c_sq: float
    d_sq: float
    f_sq: float
    g_sq: float

    def as_tuple(self) -> tuple:
        return (self.a_sq, self.b_sq, self.c_sq, self.d_sq, self.f_sq, self.g_sq)

    def face_triangles(self) -> tuple:
        """The four face triangles as TriangleDistances."""
        a2, b2, c2, d2, f2, g2 = self.as_tuple()
        return (
            TriangleDistances(a2, b2, c2),   # P Q R
            TriangleDistances(a2, g2, f2),   # P Q T (PQ, QT, TP)
            TriangleDistances(b2, d2, g2),   # Q R T (QR, RT, TQ)
            TriangleDistances(c2, f2, d2),   # R P T (RP, PT, TR)
        )

    def cayley_menger(self) -> float:
        """Cayley-Menger determinant of the four points (288 * volume^2)."""
        a2, b2, c2, d2, f2, g2 = self.as_tuple()
        m = np.array([
            [0.0, 1.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, a2, c2, f2],
            [1.0, a2, 0.0, b2, g2],
            [1.0, c2, b2, 0.0, d2],
            [1.0, f2, g2, d2, 0.0],
        ])
        return float(np.linalg.det(m))

    def validate(self) -> None:
        if not all(math.isfinite(v) and v > 0 for v in self.as_tuple()):
            raise InvalidInputError(f"squared lengths must be finite and positive: {self}")
        for tri in self.face_triangles():
            tri.validate()
        scale = max(self.as_tuple())
        if self.cayley_menger() < -1e-9 * scale ** 4:
            raise InvalidInputError("Cayley-Menger determinant negative: not embeddable in 3D")


@dataclass(frozen=True)
class DofBalance:
    """Unknown-vs-measurement count for p points over k frames."""

    unknowns: int
    information: int
    recoverable: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "recoverable", self.unknowns <= self.information)


def project(p: Point3) -> Point2:
    """Orthographic projection: drop the depth coordinate."""
    return Point2(p.x, p.y)


def apply_motion(m: RigidMotion, p: Point3) -> Point3:
    """Rotate and translate a point; translation acts in the image plane only."""
    v = m.rotation @ p.as_array()
    return Point3(v[0] + m.translation[0], v[1] + m.translation[1], v[2])


def projected_sq_distances(frame: FrameObservation, labels) -> tuple:
    """Squared distances between consecutive label pairs in the canonical
    edge order: PQ, QR, RP for three labels, plus TR, TP, TQ for four.

    Raises MissingLabelError when a label is absent from the frame.
    """
    labels = tuple(labels)
    if len(labels) == 3:
        edges = TRIANGLE_EDGES
    elif len(labels) == 4:
        edges = TETRA_EDGES
    else:
        raise InvalidInputError("expected 3 or 4 labels")
    pts = [frame.get(lab) for lab in labels]
    out = []
    for i, j in edges:
        dx = pts[i].x - pts[j].x
        dy = pts[i].y - pts[j].y
        out.append(dx * dx + dy * dy)
    return tuple(out)


def dof_balance(p: int, k: int) -> DofBalance:
    """Recoverability balance for p traced points over k frames.

    Unknowns: -1 + 3p + 5(k-1); measurements: 2kp.  Integer-exact.
    """
    if p < 1 or k < 1:
        raise InvalidInputError("need p >= 1 points and k >= 1 frames")
    return DofBalance(unknowns=-1 + 3 * p + 5 * (k - 1), information=2 * k * p)


def embed_depths(true_sq: TriangleDistances, frame_sq, tol: float = 1e-9):
    """Per-edge depth offsets consistent with one frame's projections.

    Given true squared lengths (a^2, b^2, c^2) and the frame's projected
    squared lengths, recovers (dz_PQ, dz_QR, dz_RP) -- the depth change
    across each edge -- as the signed square roots of the per-edge deficits.
    The three offsets must close to zero around the triangle; exactly one
    sign assignment (up to a global flip) achieves that, and both reflection
    branches are returned.

    Raises InconsistentLengthsError when no sign assignment closes within
    tolerance, or when a projection exceeds its true length.
    """
    true_vals = true_sq.as_tuple()
    frame_vals = tuple(frame_sq)
    scale_sq = max(max(abs(v) for v in true_vals), max(abs(v) for v in frame_vals), 1e-300)
    mags = []
    for t, f in zip(true_vals, frame_vals):
        deficit = t - f
        if deficit < -tol * scale_sq:
            raise InconsistentLengthsError(
                f"projected length exceeds true length (deficit {deficit:.3g})")
        mags.append(math.sqrt(max(deficit, 0.0)))
    u, v, w = mags
    best = None
    for sv in (1.0, -1.0):
        for sw in (1.0, -1.0):
            closure = abs(u + sv * v + sw * w)
            if best is None or closure < best[0]:
                best = (closure, (u, sv * v, sw * w))
    closure, branch = best
    if closure > tol * max(math.sqrt(scale_sq), 1.0) * 10:
        raise InconsistentLengthsError(
            f"no sign assignment closes the depth loop (gap {closure:.3g})")
    other = tuple(-x for x in branch)
    return branch, other
