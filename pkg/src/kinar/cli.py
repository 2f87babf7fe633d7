"""Command line front end.

Exit codes: 0 success, 1 file I/O failure, 2 usage error, 3 invalid scene or
input file, 4 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .error_model import ChainParameters, monte_carlo_sigma, propagate_sigma, sensitivity_sweep
from .errors import ConfigError, NumericalError
from .geometry import EulerAngles
from .pose_solver import reprojection_residual, solve_pose
from .report import build_report
from .rig_sim import RigState, run_static_experiment, run_tracking_experiment, simulate_trajectory
from .scene import scene_to_dict

log = logging.getLogger("kinar")

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    p.add_argument("--scene", type=Path, default=None, help="scene file (default: bundled rig scene)")
    p.add_argument("--seed", type=int, default=None, help="override the scene noise seed (u64)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="format of tabular output")
    p.add_argument("--verbose", "-v", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinar", description="Kinematic AR registration toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="overlay pixel of the scene anchor for rig states")
    _common(p)
    p.add_argument("--trajectory", type=Path, help="CSV with t_s, encoder_counts, alpha_rad, beta_rad")
    p.add_argument("--counts", type=int, default=0)
    p.add_argument("--alpha-deg", type=float, default=None)
    p.add_argument("--beta-deg", type=float, default=None)
    p.add_argument("--point", type=float, nargs=3, metavar=("X", "Y", "Z"), help="world anchor (mm)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("solve-pose", help="DLT camera resection from correspondences")
    _common(p)
    p.add_argument("--points", type=Path, required=True, help="CSV with X, Y, Z, u, v")
    p.add_argument("--no-normalize", action="store_true", help="skip data normalization")
    p.set_defaults(func=cmd_solve_pose)

    p = sub.add_parser("error-budget", help="first-order registration error sweep")
    _common(p)
    p.add_argument("--beta-min", type=float, default=0.0, help="deg")
    p.add_argument("--beta-max", type=float, default=45.0, help="deg")
    p.add_argument("--beta-step", type=float, default=5.0, help="deg")
    p.add_argument("--alpha", type=float, default=0.0, help="turntable roll, deg")
    p.add_argument("--x", type=float, default=100.0, help="camera-frame X of the observed point (mm)")
    p.add_argument("--y", type=float, default=100.0)
    p.add_argument("--z", type=float, default=3000.0)
    p.add_argument("--positions", type=float, nargs="+", default=[0.0], help="rail positions (mm)")
    p.add_argument("--with-mcr", action="store_true", help="include the scene hand-eye transform")
    p.add_argument("--mc-samples", type=int, default=0, help="Monte-Carlo cross-check at beta-max")
    p.set_defaults(func=cmd_error_budget)

    p = sub.add_parser("simulate", help="simulated rig experiments")
    ssub = p.add_subparsers(dest="experiment", required=True)
    for name, func in (("static", cmd_simulate_static), ("tracking", cmd_simulate_tracking)):
        q = ssub.add_parser(name)
        _common(q)
        q.add_argument("--quantization", action=argparse.BooleanOptionalAction, default=None)
        q.add_argument("--turntable-sigma-deg", type=float, default=None)
        q.add_argument("--pixel-sigma", type=float, default=None)
        if name == "static":
            q.add_argument("--points", type=float, nargs="+", default=None, help="observation points (mm)")
            q.add_argument("--trials", type=int, default=None)
        else:
            q.add_argument("--speed", type=float, default=None, help="mm/s")
            q.add_argument("--duration", type=float, default=None, help="s")
            q.add_argument("--dt", type=float, default=None, help="s")
            q.add_argument("--offset", type=float, default=None, help="overlay offset along X (mm)")
        q.set_defaults(func=func)

    p = sub.add_parser("validate-scene", help="load and check a scene file")
    _common(p)
    p.set_defaults(func=cmd_validate_scene)
    return parser


def _load(args):
    path = args.scene if args.scene is not None else io.paper_scene_path()
    return io.load_scene(path)


def _seed(args, scene):
    seed = args.seed if args.seed is not None else scene.noise.seed
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    return seed


def _noise(args, scene):
    n = scene.noise.spec(_seed(args, scene))
    if args.quantization is not None:
        n = replace(n, quantization=args.quantization)
    if args.turntable_sigma_deg is not None:
        n = replace(n, turntable_sigma=float(np.radians(args.turntable_sigma_deg)))
    if args.pixel_sigma is not None:
        n = replace(n, pixel_sigma=args.pixel_sigma)
    return n


def _table(args, stem, columns, rows):
    args.out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        return io.write_csv(args.out / f"{stem}.csv", columns, rows)
    return io.write_json(args.out / f"{stem}.json", [dict(zip(columns, r)) for r in rows])


def _report(args, kind, scene, seed, results, references=()):
    args.out.mkdir(parents=True, exist_ok=True)
    return io.write_json(args.out / "report.json", build_report(kind, scene_to_dict(scene), seed, results, references))


def cmd_project(args) -> int:
    scene = _load(args)
    if args.trajectory is not None:
        states = io.read_trajectory(args.trajectory)
    else:
        alpha = np.radians(args.alpha_deg) if args.alpha_deg is not None else scene.turntable.alpha
        beta = np.radians(args.beta_deg) if args.beta_deg is not None else scene.turntable.beta
        states = [RigState(args.counts, EulerAngles(alpha, beta, 0.0), 0.0)]
    if args.point is not None:
        # an explicit world anchor replaces the workpiece-derived one
        scene = replace(scene, p1=tuple(args.point), p3=tuple(np.add(args.point, (0, 1, 0))), p5=tuple(np.add(args.point, (0, 0, 1))), anchor_offset=(0.0, 0.0, 0.0))
    rows = []
    for state, pose, px in simulate_trajectory(scene, states):
        if px is None:
            rows.append((state.timestamp, state.encoder_counts, float("nan"), float("nan"), False))
        else:
            rows.append((state.timestamp, state.encoder_counts, px.u, px.v, px.in_image(scene.intrinsics)))
    path = _table(args, "overlay", ("t_s", "encoder_counts", "u", "v", "in_image"), rows)
    _report(args, "project", scene, None, {"n_states": len(rows), "anchor_world_mm": scene.anchor_world()})
    if len(rows) == 1:
        print(f"u={rows[0][2]:.4f} v={rows[0][3]:.4f} -> {path}")
    else:
        print(f"{len(rows)} overlay pixels -> {path}")
    return 0


def cmd_solve_pose(args) -> int:
    scene = _load(args)
    pts = io.read_correspondences(args.points)
    sol = solve_pose(pts, scene.intrinsics, normalize=not args.no_normalize)
    res = reprojection_residual(sol.projection, pts)
    e = sol.euler
    results = {
        "projection": sol.projection.m,
        "rotation": sol.extrinsic.rotation,
        "translation_mm": sol.extrinsic.translation,
        "euler_rad": {"alpha": e.alpha, "beta": e.beta, "gamma": e.gamma, "gimbal_lock": e.gimbal_lock},
        "euler_deg": {"alpha": np.degrees(e.alpha), "beta": np.degrees(e.beta), "gamma": np.degrees(e.gamma)},
        "rms_reprojection": sol.rms_reprojection,
        "condition_indicator": sol.condition_indicator,
        "n_points": len(pts),
        "n_behind": res.n_behind,
    }
    args.out.mkdir(parents=True, exist_ok=True)
    io.write_json(args.out / "pose.json", results)
    rows = [(*c.world.coords, c.pixel.u, c.pixel.v, err) for c, err in zip(pts, res.errors)]
    _table(args, "residuals", ("X", "Y", "Z", "u", "v", "error_px"), rows)
    _report(args, "solve-pose", scene, None, results)
    print(f"rms_reprojection={sol.rms_reprojection:.3e} px, condition={sol.condition_indicator:.3e}")
    return 0


def cmd_error_budget(args) -> int:
    scene = _load(args)
    if args.beta_step <= 0:
        raise UsageError("--beta-step must be positive")
    betas = np.arange(args.beta_min, args.beta_max + 0.5 * args.beta_step, args.beta_step)
    betas = betas[betas <= args.beta_max + 1e-9]
    pc = np.array([args.x, args.y, args.z])
    u = scene.uncertainty.inputs()
    m_cr = scene.m_cr if args.with_mcr else None
    rows = sensitivity_sweep(np.radians(betas), args.positions, pc, u, alpha=np.radians(args.alpha), m_cr=m_cr)
    table = [(r.beta_deg, r.s_mm, r.sigma_x, r.sigma_y, r.sigma_z) for r in rows]
    path = _table(args, "error_budget", io.SWEEP_COLUMNS, table)
    sig = np.array([[r.sigma_x, r.sigma_y, r.sigma_z] for r in rows])
    summary = {
        "operating_point_mm": pc,
        "alpha_deg": args.alpha,
        "beta_range_deg": [float(betas[0]), float(betas[-1])],
        "input_sigmas": {
            "sigma_alpha_rad": u.sigma_alpha, "sigma_beta_rad": u.sigma_beta,
            "sigma_tx_mm": u.sigma_tx, "sigma_ty_mm": u.sigma_ty, "sigma_tz_mm": u.sigma_tz,
        },
        "max_sigma_mm": {"x": sig[:, 0].max(), "y": sig[:, 1].max(), "z": sig[:, 2].max()},
        "with_mcr": args.with_mcr,
    }
    seed = None
    if args.mc_samples:
        seed = _seed(args, scene)
        kw = {"m_cr": scene.m_cr} if args.with_mcr else {}
        p = ChainParameters(np.radians(args.alpha), np.radians(betas[-1]), **kw)
        mc = monte_carlo_sigma(p, pc, u, args.mc_samples, seed)
        cf = propagate_sigma(p, pc, u)
        summary["monte_carlo_check"] = {"beta_deg": float(betas[-1]), "samples": args.mc_samples, "closed_form": cf, "monte_carlo": mc}
    _report(args, "error-budget", scene, seed, summary, references=("output_sigmas_mm",))
    print(f"{len(rows)} sweep rows -> {path}")
    return 0


def cmd_simulate_static(args) -> int:
    scene = _load(args)
    noise = _noise(args, scene)
    points = args.points if args.points is not None else scene.static.observation_points_mm
    trials = args.trials if args.trials is not None else scene.static.trials
    if trials < 2:
        raise UsageError("--trials must be >= 2")
    rows = run_static_experiment(scene, points, trials, noise)
    columns = ("label", "position_mm", "mean_mm", "std_mm")
    table = [(r.label, r.position_mm, r.mean_mm, r.std_mm) for r in rows]
    args.out.mkdir(parents=True, exist_ok=True)
    io.write_json(args.out / "static.json", {"rows": [dict(zip(columns, t)) for t in table]})
    if args.format == "csv":
        io.write_csv(args.out / "static.csv", columns, table)
    results = {
        "rows": [dict(zip(columns, t)) for t in table],
        "trials": trials,
        "failed_trials": {r.label: r.failed for r in rows},
        "noise": noise,
    }
    _report(args, "simulate-static", scene, noise.seed, results, references=("static_measurements",))
    for r in rows:
        print(f"{r.label:>14s} {r.position_mm:8.1f} mm  mean {r.mean_mm:10.4f} mm  std {r.std_mm:.4f}")
    return 0


def cmd_simulate_tracking(args) -> int:
    scene = _load(args)
    noise = _noise(args, scene)
    cfg = scene.tracking
    speed = args.speed if args.speed is not None else cfg.speed_mm_s
    duration = args.duration if args.duration is not None else cfg.duration_s
    dt = args.dt if args.dt is not None else cfg.dt_s
    offset = args.offset if args.offset is not None else cfg.offset_mm
    if dt <= 0 or duration < 0 or speed < 0:
        raise UsageError("--dt must be > 0; --duration and --speed must be >= 0")
    result = run_tracking_experiment(scene, speed, duration, dt, noise, offset)
    rows = [(s.t, s.expected_offset, s.measured_offset, s.error) for s in result.samples]
    path = _table(args, "tracking", io.TRACKING_COLUMNS, rows)
    results = {
        "n_samples": len(rows),
        "rms_mm": result.rms_mm,
        "rms_percent": result.rms_percent,
        "rms_window_indices": list(result.window_indices),
        "speed_mm_s": speed,
        "duration_s": duration,
        "dt_s": dt,
        "noise": noise,
    }
    _report(args, "simulate-tracking", scene, noise.seed, results, references=("tracking_rms",))
    print(f"rms {result.rms_mm:.4f} mm ({result.rms_percent:.4f} %) over {len(result.window_indices)} samples -> {path}")
    return 0


def cmd_validate_scene(args) -> int:
    scene = _load(args)
    for note in scene.notes():
        print(f"warning: {note}")
    print("scene ok")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed the diagnostic (or the help text)
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kinar: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"kinar: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"kinar: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"kinar: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"kinar: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
