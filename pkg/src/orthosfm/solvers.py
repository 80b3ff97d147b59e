"""Closed-form recovery of squared 3D lengths from projected squared lengths.

Three solvers are provided:

* solve_p3f3 -- 3 points / 3 frames, the minimal case.  Frame differences
  linearize two of the unknowns; the remaining unknown satisfies a
  quadratic, so there can be 0, 1 or 2 candidates.
* solve_p3f4 -- 3 points / 4 frames.  Differencing against the first frame
  yields a 3x3 linear system with a unique solution.
* solve_p4f3 -- 4 points / 3 frames.  Three edge triples per frame pair
  yield a 6x6 linear system in the six squared lengths.

All solvers consume per-frame projected squared distances in the canonical
edge order (see geometry) and return a RecoveryResult whose candidates are
flagged for physical feasibility rather than silently dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEliminationError,
    InvalidInputError,
    SingularSystemError,
)
from .geometry import TetraDistances, TriangleDistances

# Triples of 6-vector indices (a,b,c,d,f,g) forming the tetrahedron's
# constrained triangles: (PQ,QT,TP), (TR,RQ,QT), (TR,RP,PT).
_TETRA_TRIPLES = ((0, 5, 4), (3, 1, 5), (3, 4, 2))


def frame_constant(x: float, y: float, z: float) -> float:
    """x^2 + y^2 + z^2 - 2xy - 2xz - 2yz for one frame's squared lengths."""
    return x * x + y * y + z * z - 2.0 * (x * y + x * z + y * z)


@dataclass(frozen=True)
class QuadCoeffs3:
    """Per-frame coefficients of the sign-free quartic identity.

    The identity reads
      A^2 + B^2 + C^2 - 2AB - 2AC - 2BC
        + coef_a*A + coef_b*B + coef_c*C + const = 0
    in the unknown squared lengths A, B, C.
    """

    coef_a: float
    coef_b: float
    coef_c: float
    const: float


def quad_coeffs(frame_sq) -> QuadCoeffs3:
    x, y, z = frame_sq
    return QuadCoeffs3(
        coef_a=2.0 * (-x + y + z),
        coef_b=2.0 * (x - y + z),
        coef_c=2.0 * (x + y - z),
        const=frame_constant(x, y, z),
    )


def eq1_residual(lengths: TriangleDistances, frame_sq) -> float:
    """Value of the sign-free quartic identity for one frame.

    Zero iff the candidate squared lengths are consistent with the frame's
    projections (for some depth-sign assignment).  Computed in the deficit
    form u^2+v^2+w^2-2uv-2uw-2vw with u = a^2-a_i^2 etc., which is exact
    for planar frames.
    """
    u = lengths.a_sq - frame_sq[0]
    v = lengths.b_sq - frame_sq[1]
    w = lengths.c_sq - frame_sq[2]
    return frame_constant(u, v, w)


@dataclass(frozen=True)
class LinearizedPair:
    """Frame-difference coefficients and the resulting elimination.

    The two difference equations are
      d_a1*A + d_b1*B + d_c1*C + d_Cst1 = 0
      d_a2*A + d_b2*B + d_c2*C + d_Cst2 = 0
    and eliminating A, B gives A = A_c*C + A_Cst, B = B_c*C + B_Cst.
    """

    d_a1: float
    d_b1: float
    d_c1: float
    d_Cst1: float
    d_a2: float
    d_b2: float
    d_c2: float
    d_Cst2: float
    A_c: float
    A_Cst: float
    B_c: float
    B_Cst: float


def linearized_pair(frame1_sq, frame2_sq, pivot_sq) -> LinearizedPair:
    """Difference two frames against a pivot frame and eliminate A and B."""
    q1, q2, qp = quad_coeffs(frame1_sq), quad_coeffs(frame2_sq), quad_coeffs(pivot_sq)
    d_a1, d_b1, d_c1 = q1.coef_a - qp.coef_a, q1.coef_b - qp.coef_b, q1.coef_c - qp.coef_c
    d_cst1 = q1.const - qp.const
    d_a2, d_b2, d_c2 = q2.coef_a - qp.coef_a, q2.coef_b - qp.coef_b, q2.coef_c - qp.coef_c
    d_cst2 = q2.const - qp.const
    det = d_a1 * d_b2 - d_a2 * d_b1
    if det == 0.0:
        raise DegenerateEliminationError("frame differences are linearly dependent")
    a_c = (-d_c1 * d_b2 + d_c2 * d_b1) / det
    a_cst = (-d_cst1 * d_b2 + d_cst2 * d_b1) / det
    b_c = (-d_a1 * d_c2 + d_a2 * d_c1) / det
    b_cst = (-d_a1 * d_cst2 + d_a2 * d_cst1) / det
    return LinearizedPair(d_a1, d_b1, d_c1, d_cst1, d_a2, d_b2, d_c2, d_cst2,
                          a_c, a_cst, b_c, b_cst)


@dataclass(frozen=True)
class Candidate:
    """One recovered squared-length solution with diagnostics."""

    lengths: object          # TriangleDistances or TetraDistances
    feasible: bool
    residuals: tuple         # per-frame quartic-identity residuals

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


@dataclass(frozen=True)
class RecoveryResult:
    """Candidate solutions sorted by max per-frame residual, ascending."""

    candidates: tuple

    @property
    def feasible_candidates(self) -> tuple:
        return tuple(c for c in self.candidates if c.feasible)

    @property
    def best(self):
        return self.candidates[0] if self.candidates else None


def feasibility_check(candidate, frames, tol: float = 1e-9) -> bool:
    """Physical feasibility: squared lengths non-negative and at least as
    long as their projections in every frame, within tolerance."""
    cand = tuple(candidate.as_tuple() if hasattr(candidate, "as_tuple") else candidate)
    scale = max(max(abs(v) for f in frames for v in f), 1.0)
    slack = tol * scale
    if any(v < -slack for v in cand):
        return False
    for frame in frames:
        for v, proj in zip(cand, frame):
            if v < proj - slack:
                return False
    return True


def _observation_scale(frames) -> float:
    """Largest projected squared distance across frames; unit floor."""
    return max(max(abs(v) for f in frames for v in f), 1.0)


def _solve_quadratic(q2: float, q1: float, q0: float, tol: float):
    """Real roots of q2 t^2 + q1 t + q0 = 0, robust near double roots.

    A slightly negative discriminant (relative to the coefficient scale) is
    clamped to a double root so squaring noise cannot empty the solution set.
    """
    coeff_scale = max(q1 * q1, abs(4.0 * q2 * q0), 1e-300)
    if abs(q2) * math.sqrt(coeff_scale) < tol * coeff_scale or q2 == 0.0:
        # effectively linear
        if q1 == 0.0:
            return ()
        return (-q0 / q1,)
    disc = q1 * q1 - 4.0 * q2 * q0
    if disc < 0.0:
        if disc > -tol * coeff_scale:
            return (-q1 / (2.0 * q2),)
        return ()
    sq = math.sqrt(disc)
    # Citardauq-stable split: avoid cancellation in the smaller root
    if q1 >= 0.0:
        big = -(q1 + sq) / 2.0
    else:
        big = -(q1 - sq) / 2.0
    roots = [big / q2]
    if big != 0.0:
        roots.append(q0 / big)
    else:
        roots.append(-q1 / q2 - roots[0])
    return tuple(sorted(set(roots)))


def _newton_polish(sol, frames, iterations: int = 3):
    """Newton-polish a (A, B, C) triple on the three per-frame identities."""
    x = np.array(sol, dtype=float)
    coeffs = [quad_coeffs(f) for f in frames]

    def residuals(v):
        return np.array([
            frame_constant(v[0] - f[0], v[1] - f[1], v[2] - f[2])
            for f in frames
        ])

    r = residuals(x)
    for _ in range(iterations):
        jac = np.empty((3, 3))
        for i, q in enumerate(coeffs):
            a, b, c = x
            jac[i, 0] = 2.0 * a - 2.0 * b - 2.0 * c + q.coef_a
            jac[i, 1] = 2.0 * b - 2.0 * a - 2.0 * c + q.coef_b
            jac[i, 2] = 2.0 * c - 2.0 * a - 2.0 * b + q.coef_c
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        x_new = x + step
        r_new = residuals(x_new)
        if np.abs(r_new).max() >= np.abs(r).max():
            break
        x, r = x_new, r_new
    return tuple(x)


def solve_p3f3(frames, tol: float = 1e-9, degeneracy_tol: float = 1e-12) -> RecoveryResult:
    """Recover a triangle's squared lengths from 3 frames (minimal case).

    Differences against a pivot frame express A = a^2 and B = b^2 as affine
    functions of C = c^2; substituting into the pivot frame's quartic
    identity leaves a quadratic in C.  All three pivot choices are tried
    and the best-conditioned elimination kept.  Returns 0, 1 or 2
    candidates, feasibility-flagged and sorted by max residual.

    Raises DegenerateEliminationError when every elimination is singular
    (collinear points, or frames identical up to in-plane motion).
    """
    frames = [tuple(f) for f in frames]
    if len(frames) != 3 or any(len(f) != 3 for f in frames):
        raise InvalidInputError("solve_p3f3 needs 3 frames of 3 squared distances")
    scale = _observation_scale(frames)

    best_pivot = None
    for pivot in range(3):
        i, j = [k for k in range(3) if k != pivot]
        q_i, q_j, q_p = (quad_coeffs(frames[k]) for k in (i, j, pivot))
        det = ((q_i.coef_a - q_p.coef_a) * (q_j.coef_b - q_p.coef_b)
               - (q_j.coef_a - q_p.coef_a) * (q_i.coef_b - q_p.coef_b))
        if best_pivot is None or abs(det) > abs(best_pivot[0]):
            best_pivot = (det, pivot, i, j)
    det, pivot, i, j = best_pivot
    if abs(det) < degeneracy_tol * scale * scale:
        raise DegenerateEliminationError(
            "all frame-difference eliminations are singular")

    pair = linearized_pair(frames[i], frames[j], frames[pivot])
    qp = quad_coeffs(frames[pivot])
    a_c, a0, b_c, b0 = pair.A_c, pair.A_Cst, pair.B_c, pair.B_Cst
    q2 = a_c * a_c + b_c * b_c + 1.0 - 2.0 * a_c * b_c - 2.0 * a_c - 2.0 * b_c
    q1 = (2.0 * a_c * a0 + 2.0 * b_c * b0 - 2.0 * (a_c * b0 + a0 * b_c)
          - 2.0 * (a0 + b0) + qp.coef_a * a_c + qp.coef_b * b_c + qp.coef_c)
    q0 = (a0 * a0 + b0 * b0 - 2.0 * a0 * b0 + qp.const
          + qp.coef_a * a0 + qp.coef_b * b0)

    candidates = []
    for c_sq in _solve_quadratic(q2, q1, q0, tol):
        a_sq = a_c * c_sq + a0
        b_sq = b_c * c_sq + b0
        a_sq, b_sq, c_sq = _newton_polish((a_sq, b_sq, c_sq), frames)
        lengths = TriangleDistances(a_sq, b_sq, c_sq)
        residuals = tuple(eq1_residual(lengths, f) for f in frames)
        feasible = feasibility_check(lengths, frames, tol)
        candidates.append(Candidate(lengths, feasible, residuals))
    candidates.sort(key=lambda c: c.max_residual)
    return RecoveryResult(tuple(candidates))


def solve_pivoted(matrix, rhs, singular_tol: float = 1e-10):
    """Solve a small dense square system by partially pivoted elimination.

    Raises SingularSystemError when a pivot falls below singular_tol times
    the largest row norm.  Two iterative-refinement passes with extended-
    precision residuals tighten the forward error.
    """
    a = np.array(matrix, dtype=float)
    b = np.array(rhs, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise InvalidInputError("solve_pivoted needs a square system")
    row_scale = max(float(np.abs(a).sum(axis=1).max()), 1e-300)

    work = np.hstack([a, b[:, None]])
    for col in range(n):
        piv = col + int(np.abs(work[col:, col]).argmax())
        if abs(work[piv, col]) < singular_tol * row_scale:
            raise SingularSystemError(
                f"pivot {abs(work[piv, col]):.3g} below threshold")
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
        factors = work[col + 1:, col] / work[col, col]
        work[col + 1:, col:] -= factors[:, None] * work[col, col:]
    x = np.empty(n)
    for row in range(n - 1, -1, -1):
        x[row] = (work[row, n] - work[row, row + 1:n] @ x[row + 1:]) / work[row, row]

    # refinement: residual in extended precision
    a_l = a.astype(np.longdouble)
    b_l = b.astype(np.longdouble)
    for _ in range(2):
        r = np.asarray(b_l - a_l @ x.astype(np.longdouble), dtype=float)
        try:
            dx = np.linalg.solve(a, r)
        except np.linalg.LinAlgError:
            break
        x = x + dx
    return x


def solve_p3f4(frames, tol: float = 1e-9, singular_tol: float = 1e-10) -> RecoveryResult:
    """Recover a triangle's squared lengths from 4 frames (linear case).

    Subtracting the first frame's quartic identity from each of the other
    three leaves a 3x3 linear system in (a^2, b^2, c^2) with at most one
    solution.

    Raises SingularSystemError for degenerate motion (e.g. repeated frames).
    """
    frames = [tuple(f) for f in frames]
    if len(frames) != 4 or any(len(f) != 3 for f in frames):
        raise InvalidInputError("solve_p3f4 needs 4 frames of 3 squared distances")
    q0 = quad_coeffs(frames[0])
    mat = np.empty((3, 3))
    rhs = np.empty(3)
    for row, frame in enumerate(frames[1:]):
        q = quad_coeffs(frame)
        mat[row] = (q.coef_a - q0.coef_a, q.coef_b - q0.coef_b, q.coef_c - q0.coef_c)
        rhs[row] = -(q.const - q0.const)
    sol = solve_pivoted(mat, rhs, singular_tol)
    lengths = TriangleDistances(*sol)
    residuals = tuple(eq1_residual(lengths, f) for f in frames)
    feasible = feasibility_check(lengths, frames, tol)
    return RecoveryResult((Candidate(lengths, feasible, residuals),))


def solve_p4f3(frames, tol: float = 1e-9, singular_tol: float = 1e-10) -> RecoveryResult:
    """Recover a tetrahedron's six squared lengths from 3 frames.

    Each frame constrains three edge triples -- (a,g,f), (d,b,g), (d,f,c) --
    through the quartic identity; differencing frames 2 and 3 against frame
    1 gives six equations linear in the six squared lengths.

    Raises SingularSystemError for degenerate motion or configurations.
    """
    frames = [tuple(f) for f in frames]
    if len(frames) != 3 or any(len(f) != 6 for f in frames):
        raise InvalidInputError("solve_p4f3 needs 3 frames of 6 squared distances")
    mat = np.zeros((6, 6))
    rhs = np.empty(6)
    row = 0
    for frame in frames[1:]:
        for triple in _TETRA_TRIPLES:
            q = quad_coeffs([frame[k] for k in triple])
            q0 = quad_coeffs([frames[0][k] for k in triple])
            mat[row, :] = 0.0
            mat[row, triple[0]] = q.coef_a - q0.coef_a
            mat[row, triple[1]] = q.coef_b - q0.coef_b
            mat[row, triple[2]] = q.coef_c - q0.coef_c
            rhs[row] = -(q.const - q0.const)
            row += 1
    sol = solve_pivoted(mat, rhs, singular_tol)
    lengths = TetraDistances(*sol)
    residuals = []
    for frame in frames:
        worst = 0.0
        for triple in _TETRA_TRIPLES + ((0, 1, 2),):
            tri = TriangleDistances(sol[triple[0]], sol[triple[1]], sol[triple[2]])
            worst = max(worst, abs(eq1_residual(tri, [frame[k] for k in triple])))
        residuals.append(worst)
    feasible = feasibility_check(lengths, frames, tol)
    return RecoveryResult((Candidate(lengths, feasible, tuple(residuals)),))
