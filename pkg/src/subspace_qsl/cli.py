"""Command line front end: ``subspace-qsl <bounds|evolve|t-theta|example|verify>``.

Machine-readable output (JSON, CSV) goes to stdout or ``--out``; logs and tables
meant for people go to stderr. Exit codes: 0 success, 1 property violation,
2 invalid input, 3 numerical failure.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from subspace_qsl.bounds import bounds_report, off_diagonal_speed, state_bounds_report, subspace_dispersion
from subspace_qsl.config import InstanceConfig, Tolerances, dump_config, load_config
from subspace_qsl.dynamics import angle_trajectory, first_crossing_time
from subspace_qsl.errors import DegenerateLevels, PropertyViolation, QslError
from subspace_qsl.operators import Frame, HermitianOperator
from subspace_qsl.verification import InstanceHook, verify

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = "t,norm_diff,theta,v_bound,dispersion_bound"


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative integer, got {value}")
    return value


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(document) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def cmd_example_two_level(e1: float, e2: float) -> InstanceConfig:
    """H = diag(e1, e2) with the subspace spanned by (e_1 + e_2)/sqrt(2)."""
    if e1 == e2:
        raise DegenerateLevels(f"The two levels must differ, got e1 = e2 = {e1!r}.")
    h = HermitianOperator(np.diag([e1, e2]).astype(complex))
    frame = Frame(np.array([[1.0], [1.0]]) / math.sqrt(2.0))
    return InstanceConfig(h, frame, None, Tolerances(), f"two-level example e1={e1!r} e2={e2!r}")


def _format_angle(theta: float, degrees: bool) -> str:
    return f"{math.degrees(theta):.6g} deg" if degrees else f"{theta:.6g}"


def _format_time(value) -> str:
    return value if isinstance(value, str) else f"{value:.10g}"


def _bounds_table(report: dict, degrees: bool) -> str:
    lines = [
        f"V        = {report['v_speed']:.10g}",
        f"dE_P0    = {report['subspace_dispersion']:.10g}",
        f"(Emax-Emin)/2 = {report['spectral_halfwidth']:.10g}",
        f"{'theta':>14} {'theta/V':>18} {'theta/dE_P0':>18} {'2 theta/Omega':>18}",
    ]
    for entry in report["per_theta"]:
        lines.append(
            f"{_format_angle(entry['theta'], degrees):>14} {_format_time(entry['t_bound_v']):>18} "
            f"{_format_time(entry['t_bound_dispersion']):>18} {_format_time(entry['t_brachistochrone']):>18}"
        )
    return "\n".join(lines) + "\n"


def cmd_bounds(args) -> int:
    config = load_config(args.config)
    thetas = args.theta or [math.pi / 2]
    report = bounds_report(
        config.hamiltonian, config.subspace, thetas, config.tolerances.dispersion_options()
    ).to_dict()
    report["label"] = config.label
    if config.state is not None:
        report["state"] = state_bounds_report(config.hamiltonian, config.state, thetas).to_dict()
    _emit(_json(report), args.out)
    sys.stderr.write(_bounds_table(report, args.degrees))
    return 0


def cmd_evolve(args) -> int:
    config = load_config(args.config)
    h = config.hamiltonian
    v = off_diagonal_speed(h, config.subspace)
    dispersion = subspace_dispersion(h, config.subspace, config.tolerances.dispersion_options()).value
    trajectory = angle_trajectory(h, config.subspace, args.t_max, args.points, v, max(dispersion, v))
    columns = np.column_stack(
        [
            trajectory.times,
            trajectory.norm_diff,
            trajectory.theta,
            trajectory.v_bound,
            trajectory.dispersion_bound,
        ]
    )
    logger.info(f"Writing {len(trajectory)} trajectory rows")
    if args.out:
        np.savetxt(args.out, columns, fmt="%.17g", delimiter=",", header=TRAJECTORY_HEADER, comments="")
    else:
        np.savetxt(sys.stdout, columns, fmt="%.17g", delimiter=",", header=TRAJECTORY_HEADER, comments="")
    return 0


def cmd_t_theta(args) -> int:
    config = load_config(args.config)
    thetas = args.theta or [math.pi / 2]
    tol = args.tol if args.tol is not None else config.tolerances.crossing_tol
    v = off_diagonal_speed(config.hamiltonian, config.subspace)
    crossings = [
        first_crossing_time(
            config.hamiltonian, config.subspace, theta, horizon=args.horizon, crossing_tol=tol, v_speed=v
        ).to_dict()
        for theta in thetas
    ]
    _emit(_json({"label": config.label, "v_speed": v, "crossings": crossings}), args.out)
    for crossing in crossings:
        reached = f"t = {crossing['t_theta']:.12g}" if crossing["attained"] else "not reached"
        sys.stderr.write(f"theta {_format_angle(crossing['theta_target'], args.degrees)}: {reached}\n")
    return 0


def cmd_example(args) -> int:
    config = cmd_example_two_level(args.e1, args.e2)
    if args.out:
        dump_config(config, args.out)
    else:
        sys.stdout.write(_json(config.to_document()))
    return 0


def cmd_verify(args, instance_hook: InstanceHook | None = None) -> int:
    summary = verify(args.n_max, args.k_max, args.trials, args.seed, instance_hook=instance_hook)
    sys.stdout.write(_json(summary.to_dict()))
    if args.out:
        Path(args.out).write_text(_json(summary.report()))
    if not summary.passed:
        raise PropertyViolation(
            f"{len(summary.violations)} property violations"
            + (f", instances written to {args.out}" if args.out else "")
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspace-qsl", description="Speed limits for the Schrodinger evolution of subspaces."
    )
    parser.add_argument("--verbose", action="store_true", help="Log progress to stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub, config=True):
        if config:
            sub.add_argument("--config", required=True, help="Instance JSON document")
        sub.add_argument("--out", help="Output file (default stdout)")
        sub.add_argument("--degrees", action="store_true", help="Show angles in degrees in tables")

    bounds = subparsers.add_parser("bounds", help="Speed and time bounds as JSON")
    add_common(bounds)
    bounds.add_argument("--theta", type=float, action="append", help="Target angle in radians, repeatable")
    bounds.set_defaults(handler=cmd_bounds)

    evolve = subparsers.add_parser("evolve", help="Angle trajectory as CSV")
    add_common(evolve)
    evolve.add_argument("--t-max", type=float, required=True, help="End of the time grid")
    evolve.add_argument("--points", type=_positive_int, default=101, help="Grid points, at least 2")
    evolve.set_defaults(handler=cmd_evolve)

    t_theta = subparsers.add_parser("t-theta", help="First time the angle reaches theta")
    add_common(t_theta)
    t_theta.add_argument("--theta", type=float, action="append", help="Target angle in radians, repeatable")
    t_theta.add_argument("--horizon", type=float, help="Search window [0, horizon]")
    t_theta.add_argument("--tol", type=float, help="Crossing tolerance")
    t_theta.set_defaults(handler=cmd_t_theta)

    example = subparsers.add_parser("example", help="Two-level instance document")
    add_common(example, config=False)
    example.add_argument("--e1", type=float, default=0.0, help="First energy level")
    example.add_argument("--e2", type=float, default=1.0, help="Second energy level")
    example.set_defaults(handler=cmd_example)

    verify_parser = subparsers.add_parser("verify", help="Randomized property suite")
    add_common(verify_parser, config=False)
    verify_parser.add_argument("--n-max", type=_positive_int, default=6, help="Largest dimension")
    verify_parser.add_argument("--k-max", type=_positive_int, default=3, help="Largest subspace rank")
    verify_parser.add_argument("--trials", type=_positive_int, default=100, help="Number of random instances")
    verify_parser.add_argument("--seed", type=_nonnegative_int, default=0, help="Master seed")
    verify_parser.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None, instance_hook: InstanceHook | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.handler is cmd_verify:
            return cmd_verify(args, instance_hook)
        return args.handler(args)
    except QslError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
