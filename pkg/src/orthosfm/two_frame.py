"""Everything recoverable (and provably unrecoverable) from exactly two frames.

Two frames never determine a rigid body's 3D structure: a one-parameter
family of distinct interpretations reprojects exactly onto both images
(ambiguity_family constructs it).  What the leftover information does
support is point identification: with four points, three correspondences
predict a line in the second frame that the fourth point's image must lie
on.  The distance to that line (collinearity_residual_4pt) scores
candidate assignments (match_points) or, with known labels, serves as a
rigidity test (rigidity_score).  Five points make the prediction fully
linear (residual_5pt).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBasisError,
    DegenerateEliminationError,
    InconsistentLengthsError,
    InvalidInputError,
    NoConsistentAssignmentError,
    NoSolutionError,
)
from .geometry import (
    FrameObservation,
    Point3,
    RigidMotion,
    apply_motion,
    project,
)
from .solvers import quad_coeffs

# Assumed-length policy for the 4-point scorer: start at 1.5x the longest
# projection of edge RP and grow geometrically while infeasible.
C_START_FACTOR = 1.5
C_GROW_FACTOR = 1.25
C_MAX_STEPS = 40

DEFAULT_RIGIDITY_TOL = 1e-6     # relative to the observation diameter


@dataclass(frozen=True)
class BofCCoeffs:
    """Coefficients of the two-frame biquadratic linking b^2 and c^2.

    With B = b^2 and C = c^2 the relation reads
      B^2*f_b2 + B*(C*f_cb + f_b) + (C*f_c + C^2*f_c2 + f_Cst) = 0.
    """

    f_cb: float
    f_c: float
    f_b: float
    f_Cst: float
    f_b2: float
    f_c2: float

    def evaluate(self, b_sq: float, c_sq: float) -> float:
        return (b_sq * b_sq * self.f_b2
                + b_sq * (c_sq * self.f_cb + self.f_b)
                + c_sq * self.f_c + c_sq * c_sq * self.f_c2 + self.f_Cst)

    def a_sq_of(self, b_sq: float, c_sq: float) -> float:
        """Back-substituted a^2 from the eliminated linear relation."""
        return self.p * b_sq + self.q * c_sq + self.r

    # affine coefficients of the eliminated a^2 = p*B + q*C + r
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0


def b_of_c_coeffs(frame1_sq, frame2_sq) -> BofCCoeffs:
    """Eliminate a^2 between the two frames' quartic identities.

    Each identity is quadratic in a^2 with a unit leading coefficient, so
    their difference is linear in a^2; solving and substituting back gives
    a relation quadratic in both b^2 and c^2.

    Raises DegenerateEliminationError when the a^2 coefficients of the two
    frames coincide (identical frames, or a motion leaving the edge
    deficits equal).
    """
    q1, q2 = quad_coeffs(frame1_sq), quad_coeffs(frame2_sq)
    denom = q1.coef_a - q2.coef_a
    scale = max(abs(v) for f in (frame1_sq, frame2_sq) for v in f)
    if abs(denom) < 1e-12 * max(scale, 1.0):
        raise DegenerateEliminationError("a^2 coefficients coincide between frames")
    p = -(q1.coef_b - q2.coef_b) / denom
    q = -(q1.coef_c - q2.coef_c) / denom
    r = -(q1.const - q2.const) / denom
    return BofCCoeffs(
        f_b2=(1.0 - p) ** 2,
        f_c2=(1.0 - q) ** 2,
        f_cb=2.0 * (p * q - p - q - 1.0),
        f_b=2.0 * p * r - 2.0 * r + q1.coef_b + q1.coef_a * p,
        f_c=2.0 * q * r - 2.0 * r + q1.coef_c + q1.coef_a * q,
        f_Cst=r * r + q1.const + q1.coef_a * r,
        p=p, q=q, r=r,
    )


def solve_b_given_c(coeffs: BofCCoeffs, c_sq: float, tol: float = 1e-9) -> tuple:
    """Non-negative roots b^2 of the biquadratic for an assumed c^2.

    Raises NoSolutionError when the discriminant is decisively negative
    (the assumed c is below the feasible range and must be increased).
    """
    if c_sq < 0:
        raise InvalidInputError("c_sq must be non-negative")
    lin = c_sq * coeffs.f_cb + coeffs.f_b
    const = c_sq * coeffs.f_c + c_sq * c_sq * coeffs.f_c2 + coeffs.f_Cst
    lead = coeffs.f_b2
    coeff_scale = max(lin * lin, abs(4.0 * lead * const), 1e-300)
    if abs(lead) < 1e-14 * math.sqrt(coeff_scale):
        if lin == 0.0:
            raise NoSolutionError("degenerate biquadratic")
        roots = (-const / lin,)
    else:
        disc = lin * lin - 4.0 * lead * const
        if disc < 0.0:
            if disc > -tol * coeff_scale:
                roots = (-lin / (2.0 * lead),)
            else:
                raise NoSolutionError("negative discriminant for assumed c")
        else:
            sq = math.sqrt(disc)
            roots = ((-lin + sq) / (2.0 * lead), (-lin - sq) / (2.0 * lead))
    return tuple(sorted(b for b in roots if b >= 0.0))


def _get4(frame: FrameObservation, labels) -> list:
    return [frame.get(lab).as_array() for lab in labels]


def _sq(v) -> float:
    return float(v @ v)


def _signed_depth_pair(c_dep: float, b_dep: float, a_dep: float) -> tuple:
    """Depths (z_P, z_Q) over a frame given the three edge deficits.

    z_P^2 = c_dep, z_Q^2 = b_dep, (z_P - z_Q)^2 = a_dep; the product
    z_P*z_Q = (c_dep + b_dep - a_dep)/2 fixes the relative sign.
    """
    z_p = math.sqrt(max(c_dep, 0.0))
    z_q = math.sqrt(max(b_dep, 0.0))
    if (c_dep + b_dep - a_dep) < 0.0:
        z_q = -z_q
    return z_p, z_q


def _point_line_distance(pt, anchor, other) -> float:
    d = other - anchor
    nd = np.linalg.norm(d)
    if nd < 1e-12:
        return float(np.linalg.norm(pt - anchor))
    return float(abs(d[0] * (pt - anchor)[1] - d[1] * (pt - anchor)[0]) / nd)


@dataclass(frozen=True)
class Assignment:
    """An ordered bijection of four probe labels into second-frame labels."""

    pairs: tuple   # ((p1,p2), (q1,q2), (r1,r2), (t1,t2))

    def __post_init__(self):
        pairs = tuple(tuple(p) for p in self.pairs)
        targets = [b for _, b in pairs]
        if len(set(targets)) != len(targets):
            raise InvalidInputError("assignment must be injective")
        object.__setattr__(self, "pairs", pairs)

    @property
    def source_labels(self) -> tuple:
        return tuple(a for a, _ in self.pairs)

    @property
    def target_labels(self) -> tuple:
        return tuple(b for _, b in self.pairs)

    def as_dict(self) -> dict:
        return dict(self.pairs)


def collinearity_residual_4pt(frame1: FrameObservation, frame2: FrameObservation,
                              assignment: Assignment, c_sq: float,
                              tol: float = 1e-9) -> float:
    """Distance of the fourth point's second-frame image to its predicted line.

    The first three correspondences (P, Q, R) plus an assumed squared length
    c^2 = |RP|^2 fix a two-frame triangle interpretation.  The fourth
    point's first-frame ray is expressed through two reference points: T_a
    in the plane RPQ and T_b shifted one unit along RP x RQ.  Mapping both
    into the second frame predicts a line that must contain T2.  The
    minimum over the two b-branches and the second frame's reflection
    branches is returned.

    Raises DegenerateBasisError for collinear P, Q, R and propagates
    NoSolutionError when the assumed c admits no triangle.
    """
    src = assignment.source_labels
    dst = assignment.target_labels
    p1, q1, r1, t1 = _get4(frame1, src)
    p2, q2, r2, t2 = _get4(frame2, dst)

    a1s, b1s, c1s = _sq(p1 - q1), _sq(q1 - r1), _sq(r1 - p1)
    a2s, b2s, c2s = _sq(p2 - q2), _sq(q2 - r2), _sq(r2 - p2)
    scale = math.sqrt(max(frame1.scale_sq(), frame2.scale_sq(), 1e-300))

    coeffs = b_of_c_coeffs((a1s, b1s, c1s), (a2s, b2s, c2s))
    roots = solve_b_given_c(coeffs, c_sq, tol)
    if not roots:
        raise NoSolutionError("no non-negative b^2 root for assumed c")

    basis1 = np.column_stack([p1 - r1, q1 - r1])
    if abs(np.linalg.det(basis1)) < 1e-12 * scale * scale:
        raise DegenerateBasisError("P1, Q1, R1 nearly collinear")
    basis2 = np.column_stack([p2 - r2, q2 - r2])

    slack = tol * scale * scale
    best = None
    for b_sq in roots:
        a_sq = coeffs.a_sq_of(b_sq, c_sq)
        # the assumed lengths must dominate their projections in both frames
        if a_sq < max(a1s, a2s) - slack or b_sq < max(b1s, b2s) - slack \
                or c_sq < max(c1s, c2s) - slack:
            continue
        zp1, zq1 = _signed_depth_pair(c_sq - c1s, b_sq - b1s, a_sq - a1s)
        rp1 = np.array([*(p1 - r1), zp1])
        rq1 = np.array([*(q1 - r1), zq1])
        n1 = np.cross(rp1, rq1)
        n1_norm = np.linalg.norm(n1)
        if n1_norm < 1e-12 * scale * scale:
            raise DegenerateBasisError("embedded triangle degenerate")
        n1 /= n1_norm
        st_a = np.linalg.solve(basis1, t1 - r1)
        st_b = np.linalg.solve(basis1, t1 - r1 - n1[:2])

        zp2, zq2 = _signed_depth_pair(c_sq - c2s, b_sq - b2s, a_sq - a2s)
        for flip in (1.0, -1.0):
            rp2 = np.array([*(p2 - r2), flip * zp2])
            rq2 = np.array([*(q2 - r2), flip * zq2])
            n2 = np.cross(rp2, rq2)
            n2_norm = np.linalg.norm(n2)
            if n2_norm < 1e-12 * scale * scale:
                continue
            n2 /= n2_norm
            t2_a = r2 + basis2 @ st_a
            t2_b = r2 + basis2 @ st_b + n2[:2]
            dist = _point_line_distance(t2, t2_a, t2_b)
            if best is None or dist < best:
                best = dist
    if best is None:
        raise NoSolutionError("assumed c infeasible for every branch")
    return best


def _assumed_c_sq(frame1, frame2, assignment) -> float:
    r1 = frame1.get(assignment.source_labels[2]).as_array()
    p1 = frame1.get(assignment.source_labels[0]).as_array()
    r2 = frame2.get(assignment.target_labels[2]).as_array()
    p2 = frame2.get(assignment.target_labels[0]).as_array()
    longest = max(_sq(r1 - p1), _sq(r2 - p2))
    return C_START_FACTOR ** 2 * longest


def _scored_residual(frame1, frame2, assignment, tol) -> float:
    """collinearity_residual_4pt with the deterministic c policy: start at
    1.5x the longest RP projection, grow geometrically while infeasible."""
    c_sq = _assumed_c_sq(frame1, frame2, assignment)
    if c_sq == 0.0:
        c_sq = max(frame1.scale_sq(), frame2.scale_sq(), 1.0)
    for _ in range(C_MAX_STEPS):
        try:
            return collinearity_residual_4pt(frame1, frame2, assignment, c_sq, tol)
        except NoSolutionError:
            c_sq *= C_GROW_FACTOR ** 2
    raise NoSolutionError("no feasible assumed length found for assignment")


@dataclass(frozen=True)
class MatchReport:
    """Scored assignments for two unlabeled frames."""

    ranking: tuple          # of (Assignment, residual), ascending
    best: Assignment
    best_residual: float
    margin: float           # runner-up residual minus best residual
    n_scored: int
    full_assignment: dict   # all labels, incl. greedily matched extras


def _probe_labels(frame: FrameObservation) -> tuple:
    """Four probe points; for n > 4 the quadruple maximizing the area of its
    convex hull, for a well-conditioned RP x RQ basis."""
    labels = frame.labels
    if len(labels) == 4:
        return labels
    pts = {lab: frame.get(lab).as_array() for lab in labels}

    def hull_area(quad):
        arr = [pts[lab] for lab in quad]
        best = 0.0
        # max over the three pairings of the quad into two triangles
        for order in ((0, 1, 2, 3), (0, 2, 1, 3), (0, 1, 3, 2)):
            o = [arr[k] for k in order]
            area = 0.0
            for i in range(4):
                j = (i + 1) % 4
                area += o[i][0] * o[j][1] - o[j][0] * o[i][1]
            best = max(best, abs(area) / 2.0)
        return best

    return max(itertools.combinations(labels, 4), key=hull_area)


def match_points(frame1: FrameObservation, frame2: FrameObservation,
                 tol: float = 1e-9,
                 rigidity_tol: float = DEFAULT_RIGIDITY_TOL) -> MatchReport:
    """Recover the point-to-point correspondence between two frames of one
    rigid body with unknown identities.

    Four probe points are chosen in the first frame and every ordered
    4-point assignment into the second frame is scored by the fourth
    point's distance to its predicted line: n(n-1)(n-2)(n-3) assignments
    for n points.  Remaining points (n > 4) are then matched greedily by
    the same line prediction.

    Raises NoConsistentAssignmentError when every assignment's residual
    exceeds the rigidity threshold.
    """
    labels1, labels2 = frame1.labels, frame2.labels
    if len(labels1) != len(labels2):
        raise InvalidInputError("frames must have equal cardinality")
    if len(labels1) < 4:
        raise InvalidInputError("matching needs at least 4 points")
    probe = _probe_labels(frame1)
    scale = math.sqrt(max(frame1.scale_sq(), frame2.scale_sq()))
    threshold = rigidity_tol * scale

    scored = []
    for perm in itertools.permutations(labels2, 4):
        assignment = Assignment(tuple(zip(probe, perm)))
        try:
            residual = _scored_residual(frame1, frame2, assignment, tol)
        except (NoSolutionError, DegenerateBasisError, DegenerateEliminationError):
            residual = math.inf
        scored.append((assignment, residual))
    # deterministic: sort by residual, ties by target label order
    scored.sort(key=lambda item: (item[1], item[0].target_labels))
    best, best_residual = scored[0]
    if not math.isfinite(best_residual) or best_residual > threshold:
        raise NoConsistentAssignmentError(
            f"best residual {best_residual:.3g} exceeds threshold {threshold:.3g}")
    margin = (scored[1][1] - best_residual) if len(scored) > 1 else math.inf

    full = best.as_dict()
    remaining1 = [lab for lab in labels1 if lab not in best.source_labels]
    remaining2 = [lab for lab in labels2 if lab not in best.target_labels]
    base = best.pairs[:3]
    for lab in remaining1:
        scored_rest = []
        for cand in remaining2:
            try:
                res = _scored_residual(
                    frame1, frame2, Assignment(base + ((lab, cand),)), tol)
            except (NoSolutionError, DegenerateBasisError, DegenerateEliminationError):
                res = math.inf
            scored_rest.append((res, cand))
        scored_rest.sort()
        res, cand = scored_rest[0]
        if res > threshold:
            raise NoConsistentAssignmentError(
                f"point {lab!r}: best residual {res:.3g} exceeds threshold")
        full[lab] = cand
        remaining2.remove(cand)
    return MatchReport(
        ranking=tuple(scored), best=best, best_residual=best_residual,
        margin=margin, n_scored=len(scored), full_assignment=full)


def rigidity_score(frame1: FrameObservation, frame2: FrameObservation,
                   labels=None, tol: float = 1e-9) -> float:
    """Collinearity residual under the identity assignment.

    Small means the four labeled points move as one rigid body between the
    frames; large means at least one point moves independently.
    """
    if labels is None:
        labels = frame1.labels[:4]
    labels = tuple(labels)
    if len(labels) != 4:
        raise InvalidInputError("rigidity_score needs exactly 4 labels")
    assignment = Assignment(tuple((lab, lab) for lab in labels))
    return _scored_residual(frame1, frame2, assignment, tol)


def residual_5pt(frame1: FrameObservation, frame2: FrameObservation,
                 labels=None) -> float:
    """Linear five-point consistency residual.

    The fifth point's first-frame ray is intersected with the planes PQT
    and RPQ; both intersection points have affine coordinates computable
    from the first frame alone, and their second-frame images span the
    line that must contain S2.  No quadratic is solved.

    Raises DegenerateBasisError when either in-frame basis is near-parallel.
    """
    if labels is None:
        labels = frame1.labels[:5]
    labels = tuple(labels)
    if len(labels) != 5:
        raise InvalidInputError("residual_5pt needs exactly 5 labels")
    p1, q1, r1, t1, s1 = (frame1.get(lab).as_array() for lab in labels)
    p2, q2, r2, t2, s2 = (frame2.get(lab).as_array() for lab in labels)
    scale_sq = max(frame1.scale_sq(), frame2.scale_sq(), 1e-300)

    basis_a = np.column_stack([p1 - t1, q1 - t1])
    basis_b = np.column_stack([p1 - r1, q1 - r1])
    if abs(np.linalg.det(basis_a)) < 1e-12 * scale_sq \
            or abs(np.linalg.det(basis_b)) < 1e-12 * scale_sq:
        raise DegenerateBasisError("in-frame plane basis nearly parallel")
    uv_a = np.linalg.solve(basis_a, s1 - t1)
    uv_b = np.linalg.solve(basis_b, s1 - r1)
    s2_a = t2 + np.column_stack([p2 - t2, q2 - t2]) @ uv_a
    s2_b = r2 + np.column_stack([p2 - r2, q2 - r2]) @ uv_b
    return _point_line_distance(s2, s2_a, s2_b)


@dataclass(frozen=True)
class Interpretation:
    """One consistent 3D reading of a two-frame observation pair: the body
    in first-frame coordinates plus the motion carrying it into the second
    frame."""

    points: tuple          # of (label, Point3)
    motion: RigidMotion

    def reprojection_residuals(self, frame1, frame2) -> tuple:
        """Max image distance to each frame's observed points."""
        r1 = max(
            math.hypot(p.x - frame1.get(lab).x, p.y - frame1.get(lab).y)
            for lab, p in ((lab, project(pt)) for lab, pt in self.points))
        r2 = 0.0
        for lab, pt in self.points:
            img = project(apply_motion(self.motion, pt))
            obs = frame2.get(lab)
            r2 = max(r2, math.hypot(img.x - obs.x, img.y - obs.y))
        return r1, r2


@dataclass(frozen=True)
class AmbiguityMember:
    """One member of the two-frame ambiguity family."""

    angle: float
    points: tuple          # of (label, Point3)
    motion: RigidMotion

    def as_interpretation(self) -> Interpretation:
        return Interpretation(self.points, self.motion)


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    k = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def ambiguity_family(frame1: FrameObservation, frame2: FrameObservation,
                     base: Interpretation, angles,
                     tol: float = 1e-9) -> list:
    """Construct distinct 3D interpretations all reprojecting onto both frames.

    The second frame's projection rays, pulled back through the base
    motion, share a direction d.  Each plane spanned by a first-frame ray
    and its pulled-back partner is orthogonal to n = e_z x d; rotating the
    pulled-back ray bundle about the axis through the first base point
    along n keeps every ray inside its plane, so new intersections with
    the first-frame rays exist and yield a new consistent body.  Angle 0
    returns the base interpretation.

    Angles whose rotated rays become parallel to the first-frame rays are
    skipped (returned as members with points=None and a parallel flag).

    Raises DegenerateBasisError for in-plane motion (rays already parallel).
    """
    res1, res2 = base.reprojection_residuals(frame1, frame2)
    scale = math.sqrt(max(frame1.scale_sq(), frame2.scale_sq(), 1e-300))
    if max(res1, res2) > max(tol * scale * 100, 1e-7 * scale):
        raise InvalidInputError(
            f"base interpretation does not reproduce the frames "
            f"(residuals {res1:.3g}, {res2:.3g})")
    rot = base.motion.rotation
    d = rot.T @ np.array([0.0, 0.0, 1.0])
    axis = np.cross(np.array([0.0, 0.0, 1.0]), d)
    axis_norm = np.linalg.norm(axis)
    if axis_norm < 1e-9:
        raise DegenerateBasisError(
            "motion is in-plane: ambiguity axis undefined")
    axis /= axis_norm
    anchor = base.points[0][1].as_array()

    members = []
    for angle in angles:
        spin = _axis_rotation(axis, float(angle))
        new_dir = spin @ d
        dir_xy = new_dir[:2]
        nd = np.linalg.norm(dir_xy)
        if nd < 1e-9:
            members.append(AmbiguityMember(float(angle), None, None))
            continue
        new_points = []
        ok = True
        for lab, pt in base.points:
            x = pt.as_array()
            moved = anchor + spin @ (x - anchor)
            target = frame1.get(lab).as_array()
            s = float(dir_xy @ (target - moved[:2])) / float(dir_xy @ dir_xy)
            y = moved + s * new_dir
            if np.linalg.norm(y[:2] - target) > max(tol * scale * 100, 1e-6 * scale):
                ok = False
                break
            new_points.append((lab, Point3(*map(float, y))))
        if not ok:
            members.append(AmbiguityMember(float(angle), None, None))
            continue
        new_rot = rot @ spin.T
        shift = rot @ anchor - new_rot @ anchor
        new_tr = base.motion.translation + shift[:2]
        members.append(AmbiguityMember(
            float(angle), tuple(new_points), RigidMotion(new_rot, new_tr)))
    return members


# A worked two-frame configuration with a strikingly non-unique structure:
# at REFERENCE_AMBIGUITY_ANGLE the family member moves Q and R several
# units in depth while both images stay pixel-identical.
REFERENCE_BODY = (
    ("P", Point3(0.0, 0.0, 0.0)),
    ("Q", Point3(2.0, -2.0, 3.46537)),
    ("R", Point3(5.0, 4.0, 0.68697)),
)
_REFERENCE_PHI = 2.7805551414450389    # azimuth of the pulled-back ray direction
_REFERENCE_TILT = 0.4                  # tilt of that direction from the view axis
REFERENCE_AMBIGUITY_ANGLE = 1.456756913094817
REFERENCE_ALTERNATE_DEPTHS = {"Q": 4.63902, "R": 4.37296}


def reference_ambiguity_scene():
    """The frozen demonstration scene for the two-frame ambiguity.

    Returns (body, motion): the 3-point body above and a rigid motion such
    that rotating the family by REFERENCE_AMBIGUITY_ANGLE yields a member
    whose Q and R depths are REFERENCE_ALTERNATE_DEPTHS while both frames
    reproject exactly.
    """
    d = np.array([
        math.sin(_REFERENCE_TILT) * math.cos(_REFERENCE_PHI),
        math.sin(_REFERENCE_TILT) * math.sin(_REFERENCE_PHI),
        math.cos(_REFERENCE_TILT),
    ])
    ez = np.array([0.0, 0.0, 1.0])
    axis = np.cross(d, ez)
    axis /= np.linalg.norm(axis)
    rot = _axis_rotation(axis, math.atan2(np.linalg.norm(np.cross(d, ez)), float(d @ ez)))
    return REFERENCE_BODY, RigidMotion(rot, np.zeros(2))


def interpretation_from_scene(scene) -> Interpretation:
    """Ground-truth interpretation of a simulated scene's first two frames."""
    if len(scene.motions) < 2:
        raise InvalidInputError("scene needs at least 2 frames")
    return Interpretation(points=scene.body, motion=scene.motions[1])


def base_interpretation_from_frames(frame1: FrameObservation,
                                    frame2: FrameObservation,
                                    tol: float = 1e-9) -> Interpretation:
    """Construct some consistent 3D interpretation of two frames of a rigid
    body, using the first three points as the gauge triangle.

    The assumed |RP| follows the same deterministic policy as the matcher;
    the triangle is embedded in both frames, the proper rotation between
    the embeddings recovered, and any further points placed on their
    first-frame rays at the depth that reproduces the second frame.

    Raises InconsistentLengthsError when no branch reproduces the frames
    (the two frames are not images of one rigid body).
    """
    labels = frame1.labels
    if len(labels) < 3:
        raise InvalidInputError("need at least 3 points")
    lp, lq, lr = labels[:3]
    p1, q1, r1 = (frame1.get(lab).as_array() for lab in (lp, lq, lr))
    p2, q2, r2 = (frame2.get(lab).as_array() for lab in (lp, lq, lr))
    a1s, b1s, c1s = _sq(p1 - q1), _sq(q1 - r1), _sq(r1 - p1)
    a2s, b2s, c2s = _sq(p2 - q2), _sq(q2 - r2), _sq(r2 - p2)
    scale = math.sqrt(max(frame1.scale_sq(), frame2.scale_sq(), 1e-300))

    coeffs = b_of_c_coeffs((a1s, b1s, c1s), (a2s, b2s, c2s))
    c_sq = C_START_FACTOR ** 2 * max(c1s, c2s)
    if c_sq == 0.0:
        c_sq = scale * scale

    best = None
    for _ in range(C_MAX_STEPS):
        try:
            roots = solve_b_given_c(coeffs, c_sq, tol)
        except NoSolutionError:
            roots = ()
        for b_sq in roots:
            a_sq = coeffs.a_sq_of(b_sq, c_sq)
            if a_sq < max(a1s, a2s) or b_sq < max(b1s, b2s) \
                    or c_sq < max(c1s, c2s):
                continue
            zp1, zq1 = _signed_depth_pair(c_sq - c1s, b_sq - b1s, a_sq - a1s)
            e1 = np.array([[*p1, zp1], [*q1, zq1], [*r1, 0.0]])
            zp2, zq2 = _signed_depth_pair(c_sq - c2s, b_sq - b2s, a_sq - a2s)
            for flip in (1.0, -1.0):
                e2 = np.array([[*p2, flip * zp2], [*q2, flip * zq2], [*r2, 0.0]])
                cand = _fit_interpretation(frame1, frame2, e1, e2, tol)
                if cand is None:
                    continue
                residual, interp = cand
                if best is None or residual < best[0]:
                    best = (residual, interp)
        if best is not None and best[0] < tol * scale * 10:
            return best[1]
        c_sq *= C_GROW_FACTOR ** 2
    if best is not None and best[0] < 1e-6 * scale:
        return best[1]
    raise InconsistentLengthsError(
        "no rigid two-frame interpretation found for these observations")


def _fit_interpretation(frame1, frame2, e1: np.ndarray, e2: np.ndarray, tol):
    """Kabsch-fit a proper rotation e1 -> e2 and lift all frame points.

    Returns (worst reprojection residual, Interpretation) or None when the
    embeddings require an improper motion.
    """
    cen1, cen2 = e1.mean(axis=0), e2.mean(axis=0)
    h = (e1 - cen1).T @ (e2 - cen2)
    u, _, vt = np.linalg.svd(h)
    det = np.linalg.det(vt.T @ u.T)
    rot = vt.T @ np.diag([1.0, 1.0, det]) @ u.T
    if abs(np.linalg.det(rot) - 1.0) > 1e-9:
        return None
    fit_err = np.abs(rot @ (e1 - cen1).T - (e2 - cen2).T).max()
    scale = math.sqrt(max(frame1.scale_sq(), frame2.scale_sq(), 1e-300))
    if fit_err > max(tol * scale * 100, 1e-6 * scale):
        return None
    translation = (cen2 - rot @ cen1)[:2]
    motion = RigidMotion(rot, translation)

    points = []
    worst = 0.0
    rxy = rot[:2, :]  # top 2x3 block maps lifted points to image xy
    for lab in frame1.labels:
        i1 = frame1.get(lab).as_array()
        i2 = frame2.get(lab).as_array()
        # solve for depth z on the first-frame ray that lands on i2
        col = rxy[:, 2]
        rhs = i2 - translation - rxy[:, :2] @ i1
        denom = float(col @ col)
        z = float(col @ rhs) / denom if denom > 1e-18 else 0.0
        resid = np.linalg.norm(rhs - z * col)
        worst = max(worst, float(resid))
        points.append((lab, Point3(float(i1[0]), float(i1[1]), z)))
    return worst, Interpretation(tuple(points), motion)
