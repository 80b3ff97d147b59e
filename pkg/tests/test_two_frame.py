import math

import numpy as np
import pytest

from orthosfm import geometry as geo
from orthosfm import scene_sim as sim
from orthosfm import two_frame as tf
from orthosfm.errors import (
    DegenerateBasisError,
    DegenerateEliminationError,
    InvalidInputError,
    NoConsistentAssignmentError,
    NoSolutionError,
)

from conftest import frames_sq, true_sq


def two_frames(scene):
    f = sim.render(scene)
    return f[0], f[1]


def scale_of(frame1, frame2):
    return math.sqrt(max(frame1.scale_sq(), frame2.scale_sq()))


class TestBofCCoeffsSymbolic:
    def test_matches_symbolic_elimination(self):
        # Independent oracle: eliminate A between the two frames' quartic
        # identities with sympy and compare polynomial coefficients in B, C.
        import sympy as sp

        rng = np.random.default_rng(7)
        B, C, A = sp.symbols("B C A")
        for _ in range(10):
            f1 = tuple(sp.Rational(int(v), 1000) for v in rng.integers(100, 5000, 3))
            f2 = tuple(sp.Rational(int(v), 1000) for v in rng.integers(100, 5000, 3))

            def identity(frame):
                x, y, z = frame
                return ((A - x) ** 2 + (B - y) ** 2 + (C - z) ** 2
                        - 2 * (A - x) * (B - y) - 2 * (A - x) * (C - z)
                        - 2 * (B - y) * (C - z))

            id1, id2 = identity(f1), identity(f2)
            diff = sp.expand(id1 - id2)  # linear in A
            a_lin = sp.solve(diff, A)[0]
            oracle = sp.expand(id1.subs(A, a_lin))

            got = tf.b_of_c_coeffs(
                tuple(float(v) for v in f1), tuple(float(v) for v in f2))
            expect = {
                (2, 0): got.f_b2, (0, 2): got.f_c2, (1, 1): got.f_cb,
                (1, 0): got.f_b, (0, 1): got.f_c, (0, 0): got.f_Cst,
            }
            poly = sp.Poly(oracle, B, C)
            # the oracle may carry an overall rational scale; normalize on B^2
            scale = float(poly.coeff_monomial(B ** 2)) / got.f_b2 \
                if got.f_b2 != 0 else 1.0
            for (db, dc), coef in expect.items():
                mono = B ** db * C ** dc
                oracle_val = float(poly.coeff_monomial(mono))
                assert oracle_val == pytest.approx(scale * coef, rel=1e-9, abs=1e-9)

    def test_identical_frames_degenerate(self):
        with pytest.raises(DegenerateEliminationError):
            tf.b_of_c_coeffs((1.0, 2.0, 3.0), (1.0, 2.0, 3.0))


class TestBofCAtTruth:
    def test_vanishes_at_true_lengths(self):
        for seed in range(100):
            scene = sim.gen_scene(3, 2, seed)
            a_sq, b_sq, c_sq = true_sq(scene)
            f1, f2 = frames_sq(scene)
            coeffs = tf.b_of_c_coeffs(f1, f2)
            scale = max(a_sq, b_sq, c_sq)
            assert abs(coeffs.evaluate(b_sq, c_sq)) < 1e-9 * scale ** 2
            assert coeffs.a_sq_of(b_sq, c_sq) == pytest.approx(a_sq, rel=1e-7)


class TestSolveBGivenC:
    def test_recovers_true_b(self):
        for seed in range(50):
            scene = sim.gen_scene(3, 2, seed)
            a_sq, b_sq, c_sq = true_sq(scene)
            f1, f2 = frames_sq(scene)
            coeffs = tf.b_of_c_coeffs(f1, f2)
            roots = tf.solve_b_given_c(coeffs, c_sq)
            assert min(abs(r - b_sq) for r in roots) < 1e-7 * max(b_sq, 1.0)

    def test_negative_discriminant_raises(self):
        # B^2 + 1 = 0 has no real root
        coeffs = tf.BofCCoeffs(f_cb=0.0, f_c=0.0, f_b=0.0, f_Cst=1.0,
                               f_b2=1.0, f_c2=0.0)
        with pytest.raises(NoSolutionError):
            tf.solve_b_given_c(coeffs, 1.0)

    def test_too_small_c_infeasible(self):
        # an assumed c far below the projections can yield roots, but they
        # must be shorter than the observed b projection in some frame
        scene = sim.gen_scene(3, 2, 4)
        f1, f2 = frames_sq(scene)
        coeffs = tf.b_of_c_coeffs(f1, f2)
        roots = tf.solve_b_given_c(coeffs, 1e-9)
        proj_b = max(f1[1], f2[1])
        assert all(r < proj_b for r in roots)

    def test_negative_c_invalid(self):
        scene = sim.gen_scene(3, 2, 4)
        coeffs = tf.b_of_c_coeffs(*frames_sq(scene))
        with pytest.raises(InvalidInputError):
            tf.solve_b_given_c(coeffs, -1.0)


def identity_assignment(labels=("P", "Q", "R", "T")):
    return tf.Assignment(tuple((lab, lab) for lab in labels))


class TestCollinearityResidual:
    def test_zero_for_rigid_scene_true_c(self):
        for seed in range(50):
            scene = sim.gen_scene(4, 2, seed)
            frame1, frame2 = two_frames(scene)
            c_sq = scene.true_sq_distance("R", "P")
            res = tf.collinearity_residual_4pt(
                frame1, frame2, identity_assignment(), c_sq)
            assert res < 1e-9 * scale_of(frame1, frame2)

    def test_zero_for_any_feasible_c(self):
        # the prediction works for wrong-but-feasible assumed lengths too
        scene = sim.gen_scene(4, 2, 17)
        frame1, frame2 = two_frames(scene)
        c_sq = 4.0 * scene.true_sq_distance("R", "P")
        res = tf.collinearity_residual_4pt(
            frame1, frame2, identity_assignment(), c_sq)
        assert res < 1e-9 * scale_of(frame1, frame2)

    def test_nonzero_for_broken_rigidity(self):
        scene = sim.gen_scene(4, 2, 21)
        frame1, frame2 = two_frames(scene)
        pts = list(frame2.points)
        lab, p = pts[3]
        pts[3] = (lab, geo.Point2(p.x + 0.31, p.y - 0.24))
        broken = geo.FrameObservation(tuple(pts))
        c_sq = scene.true_sq_distance("R", "P")
        res = tf.collinearity_residual_4pt(frame1, broken, identity_assignment(), c_sq)
        assert res > 1e-3 * scale_of(frame1, broken)

    def test_collinear_basis_raises(self):
        f1 = geo.FrameObservation((
            ("P", geo.Point2(0, 0)), ("Q", geo.Point2(1, 0)),
            ("R", geo.Point2(2, 0)), ("T", geo.Point2(0, 1))))
        scene = sim.gen_scene(4, 2, 3)
        _, frame2 = two_frames(scene)
        with pytest.raises(DegenerateBasisError):
            tf.collinearity_residual_4pt(f1, frame2, identity_assignment(), 100.0)


class TestMatchPoints:
    def test_recovers_identity_assignment(self):
        hits = 0
        tried = 0
        for seed in range(30):
            scene = sim.gen_scene(4, 2, seed)
            frame1, frame2 = two_frames(scene)
            try:
                report = tf.match_points(frame1, frame2)
            except NoConsistentAssignmentError:
                continue
            tried += 1
            if all(report.full_assignment[lab] == lab for lab in frame1.labels):
                hits += 1
            assert report.n_scored == 24
        assert tried >= 25 and hits == tried

    def test_five_points_full_assignment(self):
        scene = sim.gen_scene(5, 2, 8)
        frame1, frame2 = two_frames(scene)
        report = tf.match_points(frame1, frame2)
        assert set(report.full_assignment) == set(frame1.labels)
        assert all(report.full_assignment[lab] == lab for lab in frame1.labels)
        assert report.n_scored == 5 * 4 * 3 * 2  # ordered 4-tuples of 5 labels

    def test_shuffled_labels_recovered(self):
        scene = sim.gen_scene(4, 2, 12)
        frame1, frame2 = two_frames(scene)
        relabel = {"P": "W2", "Q": "W0", "R": "W3", "T": "W1"}
        shuffled = geo.FrameObservation(tuple(
            (relabel[lab], p) for lab, p in frame2.points))
        report = tf.match_points(frame1, shuffled)
        assert report.full_assignment == relabel

    def test_non_rigid_rejected(self):
        scene = sim.gen_scene(4, 2, 5)
        frame1, frame2 = two_frames(scene)
        rng = np.random.default_rng(0)
        pts = tuple(
            (lab, geo.Point2(*(p.as_array() + rng.uniform(0.3, 0.6, 2))))
            for lab, p in frame2.points)
        with pytest.raises(NoConsistentAssignmentError):
            tf.match_points(frame1, geo.FrameObservation(pts))

    def test_needs_four_points(self):
        scene = sim.gen_scene(3, 2, 1)
        frame1, frame2 = two_frames(scene)
        with pytest.raises(InvalidInputError):
            tf.match_points(frame1, frame2)


class TestRigidityScore:
    def test_small_for_rigid(self):
        scene = sim.gen_scene(4, 2, 14)
        frame1, frame2 = two_frames(scene)
        assert tf.rigidity_score(frame1, frame2) < 1e-9 * scale_of(frame1, frame2)

    def test_large_for_independent_motion(self):
        scene = sim.gen_scene(4, 2, 14)
        frame1, frame2 = two_frames(scene)
        pts = list(frame2.points)
        lab, p = pts[0]
        pts[0] = (lab, geo.Point2(p.x - 0.4, p.y + 0.5))
        broken = geo.FrameObservation(tuple(pts))
        assert tf.rigidity_score(frame1, broken) > 1e-3 * scale_of(frame1, broken)


class TestResidual5pt:
    def test_zero_for_rigid(self):
        for seed in range(50):
            scene = sim.gen_scene(5, 2, seed)
            frame1, frame2 = two_frames(scene)
            assert tf.residual_5pt(frame1, frame2) < 1e-9 * scale_of(frame1, frame2)

    def test_nonzero_when_fifth_point_moves(self):
        scene = sim.gen_scene(5, 2, 9)
        frame1, frame2 = two_frames(scene)
        pts = list(frame2.points)
        lab, p = pts[4]
        pts[4] = (lab, geo.Point2(p.x + 0.4, p.y + 0.3))
        broken = geo.FrameObservation(tuple(pts))
        assert tf.residual_5pt(frame1, broken) > 1e-3 * scale_of(frame1, broken)

    def test_needs_five_labels(self):
        scene = sim.gen_scene(4, 2, 2)
        frame1, frame2 = two_frames(scene)
        with pytest.raises(InvalidInputError):
            tf.residual_5pt(frame1, frame2, labels=("P", "Q", "R", "T"))


class TestAmbiguityFamily:
    def test_members_reproject_exactly(self):
        for seed in range(20):
            scene = sim.gen_scene(3, 2, seed)
            frame1, frame2 = two_frames(scene)
            base = tf.interpretation_from_scene(scene)
            scale = scale_of(frame1, frame2)
            angles = np.linspace(-1.2, 1.2, 9)
            members = tf.ambiguity_family(frame1, frame2, base, angles)
            realized = [m for m in members if m.points is not None]
            assert len(realized) >= 8
            for m in realized:
                interp = m.as_interpretation()
                r1, r2 = interp.reprojection_residuals(frame1, frame2)
                assert max(r1, r2) < 1e-9 * scale

    def test_angle_zero_is_base(self):
        scene = sim.gen_scene(3, 2, 6)
        frame1, frame2 = two_frames(scene)
        base = tf.interpretation_from_scene(scene)
        (member,) = tf.ambiguity_family(frame1, frame2, base, [0.0])
        for (lab, p), (lab2, q) in zip(member.points, base.points):
            assert lab == lab2
            assert np.allclose(p.as_array(), q.as_array(), atol=1e-9)

    def test_nonzero_angle_distinct_structure(self):
        scene = sim.gen_scene(3, 2, 6)
        frame1, frame2 = two_frames(scene)
        base = tf.interpretation_from_scene(scene)
        (member,) = tf.ambiguity_family(frame1, frame2, base, [0.7])
        base_z = np.array([p.z for _, p in base.points])
        new_z = np.array([p.z for _, p in member.points])
        assert np.abs(new_z - base_z).max() > 1e-3

    def test_in_plane_motion_degenerate(self):
        body = sim.gen_body(3, 1)
        ang = 0.8
        c, s = math.cos(ang), math.sin(ang)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        motions = (geo.RigidMotion.identity(), geo.RigidMotion(rot, np.array([0.1, 0.2])))
        scene = sim.Scene(body=body, motions=motions, seed=0)
        frame1, frame2 = two_frames(scene)
        base = tf.interpretation_from_scene(scene)
        with pytest.raises(DegenerateBasisError):
            tf.ambiguity_family(frame1, frame2, base, [0.3])

    def test_bad_base_rejected(self):
        scene = sim.gen_scene(3, 2, 6)
        frame1, frame2 = two_frames(scene)
        bad = tf.Interpretation(
            points=tuple((lab, geo.Point3(p.x + 1.0, p.y, p.z))
                         for lab, p in scene.body),
            motion=scene.motions[1])
        with pytest.raises(InvalidInputError):
            tf.ambiguity_family(frame1, frame2, bad, [0.1])


class TestReferenceAmbiguity:
    def test_reference_depths(self):
        body, motion = tf.reference_ambiguity_scene()
        scene = sim.Scene(body=body,
                          motions=(geo.RigidMotion.identity(), motion), seed=0)
        frame1, frame2 = two_frames(scene)
        base = tf.interpretation_from_scene(scene)
        (member,) = tf.ambiguity_family(
            frame1, frame2, base, [tf.REFERENCE_AMBIGUITY_ANGLE])
        depths = {lab: p.z for lab, p in member.points}
        assert depths["P"] == pytest.approx(0.0, abs=1e-9)
        for lab, expect in tf.REFERENCE_ALTERNATE_DEPTHS.items():
            assert depths[lab] == pytest.approx(expect, abs=1e-4)
        # and the images are untouched
        interp = member.as_interpretation()
        r1, r2 = interp.reprojection_residuals(frame1, frame2)
        assert max(r1, r2) < 1e-9 * scale_of(frame1, frame2)


class TestBaseInterpretationFromFrames:
    def test_reproduces_frames(self):
        for seed in range(30):
            scene = sim.gen_scene(4, 2, seed)
            frame1, frame2 = two_frames(scene)
            interp = tf.base_interpretation_from_frames(frame1, frame2)
            r1, r2 = interp.reprojection_residuals(frame1, frame2)
            assert max(r1, r2) < 1e-7 * scale_of(frame1, frame2)
