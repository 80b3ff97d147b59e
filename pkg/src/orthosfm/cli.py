"""Command-line interface.

Subcommands: recover, match, simulate, noise-study, ambiguity, dof.

Exit codes are a stable contract: 0 success, 1 input error, 2 no
solution/assignment, 3 degenerate input.  All randomized commands are
reproducible from --seed alone (env ORTHOSFM_SEED is the fallback).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import io_files, scene_sim, solvers, two_frame
from .errors import (
    DegenerateBasisError,
    DegenerateEliminationError,
    InvalidInputError,
    NoConsistentAssignmentError,
    NoSolutionError,
    OrthoSfmError,
    SingularSystemError,
)
from .geometry import dof_balance, projected_sq_distances

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_SOLUTION = 2
EXIT_DEGENERATE = 3


def _default_seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get("ORTHOSFM_SEED")
    return int(env) if env else 0


def _write(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_frames(path):
    with open(path, encoding="utf-8") as fh:
        return io_files.frames_from_csv(fh.read())


def _pick_mode(n_points: int, n_frames: int) -> str:
    # prefer the linear solvers (unique solutions) when counts allow
    if n_points >= 4 and n_frames >= 3:
        return "p4f3"
    if n_points == 3 and n_frames >= 4:
        return "p3f4"
    if n_points == 3 and n_frames == 3:
        return "p3f3"
    raise InvalidInputError(
        f"no solver for {n_points} points over {n_frames} frames "
        "(two frames cannot determine structure)")


def cmd_recover(args) -> int:
    start = time.perf_counter()
    try:
        frames = _read_frames(args.frames_file)
    except (OSError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    labels = frames[0].labels
    n_points, n_frames = len(labels), len(frames)
    try:
        mode = args.mode if args.mode != "auto" else _pick_mode(n_points, n_frames)
        if mode == "p3f3":
            use_labels, use_frames = labels[:3], frames[:3]
        elif mode == "p3f4":
            use_labels, use_frames = labels[:3], frames[:4]
        else:
            use_labels, use_frames = labels[:4], frames[:3]
        sq = [projected_sq_distances(f, use_labels) for f in use_frames]
        if mode == "p3f3":
            result = solvers.solve_p3f3(sq, tol=args.tol)
        elif mode == "p3f4":
            result = solvers.solve_p3f4(sq, tol=args.tol)
        else:
            result = solvers.solve_p4f3(sq, tol=args.tol)
    except (DegenerateEliminationError, SingularSystemError) as exc:
        report = {
            "solver": args.mode,
            "status": "degenerate",
            "reason": str(exc),
        }
        _write(io_files.report_to_json(report), args.out)
        return EXIT_DEGENERATE
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    balance = dof_balance(n_points, n_frames)
    names = (("a_sq", "b_sq", "c_sq") if mode != "p4f3"
             else ("a_sq", "b_sq", "c_sq", "d_sq", "f_sq", "g_sq"))
    report = {
        "solver": mode,
        "status": "ok" if result.feasible_candidates else "no_feasible_candidate",
        "dof": {
            "points": n_points,
            "frames": n_frames,
            "unknowns": balance.unknowns,
            "information": balance.information,
            "recoverable": balance.recoverable,
        },
        "candidates": [
            {
                "lengths_sq": dict(zip(names, c.lengths.as_tuple())),
                "feasible": c.feasible,
                "residuals": list(c.residuals),
            }
            for c in result.candidates
        ],
        "tolerance": args.tol,
        "timing_s": time.perf_counter() - start,
    }
    _write(io_files.report_to_json(report), args.out)
    return EXIT_OK if result.feasible_candidates else EXIT_NO_SOLUTION


def cmd_match(args) -> int:
    start = time.perf_counter()
    try:
        frames = _read_frames(args.frames_file)
        if len(frames) != 2:
            raise InvalidInputError("match needs exactly 2 frames")
    except (OSError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    frame1, frame2 = frames
    report = {"command": "match", "unlabeled": bool(args.unlabeled)}
    try:
        if args.unlabeled:
            match = two_frame.match_points(
                frame1, frame2, rigidity_tol=args.threshold)
            report["assignment"] = {str(k): str(v) for k, v in match.full_assignment.items()}
            report["best_residual"] = match.best_residual
            report["margin"] = match.margin
            report["n_scored"] = match.n_scored
            report["ranking"] = [
                {"targets": list(a.target_labels), "residual": r}
                for a, r in match.ranking
            ]
        else:
            score = two_frame.rigidity_score(frame1, frame2)
            scale = math.sqrt(max(frame1.scale_sq(), frame2.scale_sq()))
            consistent = score <= args.threshold * scale
            report["rigidity_residual"] = score
            report["verdict"] = "consistent" if consistent else "inconsistent"
            if not consistent:
                report["timing_s"] = time.perf_counter() - start
                _write(io_files.report_to_json(report), args.out)
                return EXIT_NO_SOLUTION
    except NoConsistentAssignmentError as exc:
        report["status"] = "no_consistent_assignment"
        report["reason"] = str(exc)
        _write(io_files.report_to_json(report), args.out)
        return EXIT_NO_SOLUTION
    except NoSolutionError as exc:
        # no assumed length admits a rigid reading: decisively inconsistent
        report["verdict"] = "inconsistent"
        report["reason"] = str(exc)
        _write(io_files.report_to_json(report), args.out)
        return EXIT_NO_SOLUTION
    except (DegenerateBasisError, DegenerateEliminationError) as exc:
        report["status"] = "degenerate"
        report["reason"] = str(exc)
        _write(io_files.report_to_json(report), args.out)
        return EXIT_DEGENERATE
    report["timing_s"] = time.perf_counter() - start
    _write(io_files.report_to_json(report), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _default_seed(args.seed)
    if args.points < 3 or args.frames < 2:
        print("error: need --points >= 3 and --frames >= 2", file=sys.stderr)
        return EXIT_INPUT
    scene = scene_sim.gen_scene(args.points, args.frames, seed)
    frames = scene_sim.render(scene)
    if args.noise > 0:
        spec = scene_sim.NoiseSpec(level=args.noise, seed=scene_sim.subseed(seed, 10**6))
        frames = scene_sim.add_noise(frames, spec)
    prefix = args.out or f"scene_{seed}"
    with open(prefix + ".scene.json", "w", encoding="utf-8") as fh:
        fh.write(io_files.scene_to_json(scene))
    with open(prefix + ".frames.csv", "w", encoding="utf-8") as fh:
        fh.write(io_files.frames_to_csv(frames))
    print(f"wrote {prefix}.scene.json and {prefix}.frames.csv")
    return EXIT_OK


def run_noise_study(mode: str, levels, trials: int, seed: int):
    """Per-level relative-error statistics of recovered squared lengths.

    Returns a list of dict rows.  Deterministic: trial t at level index i
    draws its scene from sub-stream (i, t, 0) and its noise from (i, t, 1).
    """
    n_points = 4 if mode == "p4f3" else 3
    n_frames = {"p3f3": 3, "p3f4": 4, "p4f3": 3}[mode]
    solve = {"p3f3": solvers.solve_p3f3, "p3f4": solvers.solve_p3f4,
             "p4f3": solvers.solve_p4f3}[mode]
    rows = []
    for li, level in enumerate(levels):
        errors = []
        failures = 0
        for t in range(trials):
            scene = scene_sim.gen_scene(n_points, n_frames,
                                        scene_sim.subseed(seed, li, t, 0))
            labels = scene.labels[:n_points]
            frames = scene_sim.render(scene)
            if level > 0:
                spec = scene_sim.NoiseSpec(level=level,
                                           seed=scene_sim.subseed(seed, li, t, 1))
                frames = scene_sim.add_noise(frames, spec)
            sq = [projected_sq_distances(f, labels) for f in frames]
            pairs = ([("P", "Q"), ("Q", "R"), ("R", "P")] if n_points == 3 else
                     [("P", "Q"), ("Q", "R"), ("R", "P"),
                      ("T", "R"), ("T", "P"), ("T", "Q")])
            truth = np.array([scene.true_sq_distance(*p) for p in pairs])
            try:
                result = solve(sq)
            except (DegenerateEliminationError, SingularSystemError):
                failures += 1
                continue
            if not result.candidates:
                failures += 1
                continue
            best = min(
                result.candidates,
                key=lambda c: np.abs(np.array(c.lengths.as_tuple()) - truth).max())
            rec = np.array(best.lengths.as_tuple())
            errors.extend(np.abs(rec - truth) / np.abs(truth))
        errors = np.array(errors) if errors else np.array([np.nan])
        rows.append({
            "level": level,
            "trials": trials,
            "failures": failures,
            "median_rel_error": float(np.median(errors)),
            "mean_rel_error": float(np.mean(errors)),
            "p95_rel_error": float(np.percentile(errors, 95)),
        })
    return rows


def cmd_noise_study(args) -> int:
    seed = _default_seed(args.seed)
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        levels = [float(v) for v in args.levels.split(",") if v.strip()]
    except ValueError:
        print("error: --levels must be comma-separated numbers", file=sys.stderr)
        return EXIT_INPUT
    rows = run_noise_study(args.mode, levels, args.trials, seed)
    lines = ["level,trials,failures,median_rel_error,mean_rel_error,p95_rel_error"]
    for row in rows:
        lines.append("{level},{trials},{failures},{median_rel_error!r},"
                     "{mean_rel_error!r},{p95_rel_error!r}".format(**row))
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_ambiguity(args) -> int:
    try:
        frames = _read_frames(args.frames_file)
        if len(frames) != 2:
            raise InvalidInputError("ambiguity needs exactly 2 frames")
    except (OSError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    frame1, frame2 = frames
    try:
        angles = [float(v) for v in args.angles.split(",") if v.strip()]
    except ValueError:
        print("error: --angles must be comma-separated radians", file=sys.stderr)
        return EXIT_INPUT
    try:
        base = two_frame.base_interpretation_from_frames(frame1, frame2)
        members = two_frame.ambiguity_family(frame1, frame2, base, angles)
    except (DegenerateBasisError, DegenerateEliminationError) as exc:
        print(f"error: degenerate configuration: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (NoSolutionError, OrthoSfmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    base_pts = dict(base.points)
    lines = ["angle,status,reproj_residual_frame1,reproj_residual_frame2,"
             "max_displacement," + ",".join(
                 f"{lab}_z" for lab, _ in base.points)]
    for m in members:
        if m.points is None:
            lines.append(f"{m.angle!r},parallel_rays,,,," + "," * (len(base_pts) - 1))
            continue
        r1, r2 = m.as_interpretation().reprojection_residuals(frame1, frame2)
        disp = max(
            float(np.linalg.norm(p.as_array() - base_pts[lab].as_array()))
            for lab, p in m.points)
        depths = ",".join(repr(p.z) for _, p in m.points)
        lines.append(f"{m.angle!r},ok,{r1!r},{r2!r},{disp!r},{depths}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_dof(args) -> int:
    try:
        balance = dof_balance(args.points, args.frames)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    verdict = "recoverable" if balance.recoverable else "not recoverable"
    print(f"points={args.points} frames={args.frames} "
          f"unknowns={balance.unknowns} information={balance.information} "
          f"-> {verdict}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthosfm",
        description="Recover rigid point-body geometry from orthographic multiframes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="recover squared 3D lengths from a frames file")
    p.add_argument("frames_file")
    p.add_argument("--mode", choices=["p3f3", "p3f4", "p4f3", "auto"], default="auto")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("match", help="match or rigidity-test points across 2 frames")
    p.add_argument("frames_file")
    p.add_argument("--unlabeled", action="store_true",
                   help="labels do not correspond; search assignments")
    p.add_argument("--threshold", type=float, default=two_frame.DEFAULT_RIGIDITY_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("simulate", help="generate a ground-truth scene and frames")
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output path prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("noise-study", help="Monte-Carlo error statistics vs noise level")
    p.add_argument("--mode", choices=["p3f3", "p3f4", "p4f3"], default="p3f4")
    p.add_argument("--levels", default="0.001,0.01,0.1")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_noise_study)

    p = sub.add_parser("ambiguity", help="sample the two-frame ambiguity family")
    p.add_argument("frames_file")
    p.add_argument("--angles", default="0,0.2,0.4,0.6,0.8,1.0,1.2,1.4,1.6")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ambiguity)

    p = sub.add_parser("dof", help="degrees-of-freedom recoverability balance")
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.set_defaults(func=cmd_dof)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
