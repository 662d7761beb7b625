"""Command-line front end.

Angles on the command line are given in units of pi (0.5 means pi/2), which
makes the preset extremal settings exact decimals; reports and CSV columns
use radians.  All randomness is seeded (seed 0 by default) so every command
is reproducible unless --entropy is requested explicitly.

Exit codes: 0 ok, 1 invariant violation, 2 parse/usage error,
3 normalization error, 4 insufficient shots.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
import time
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientShots, NotNormalized, ParseError, ZeroState
from .measurement import real_coefficient_pbar  # noqa: F401  (re-export convenience)
from .measurement import corrected_joint_probability, distribution_from_coefficients
from .protocol import (
    ProtocolAngles,
    apply_protocol,
    phase_identity_residual,
    single_particle_probability,
)
from .qstate import (
    SingleExcitationState,
    TwoQubitState,
    concurrence_exact,
    haar_state,
    normalize,
    parse_state,
    random_pure_state,
    serialize_state,
)
from .search import (
    SearchConfig,
    VisibilityReport,
    estimate_concurrence_shots,
    exact_pbar,
    find_extrema,
    visibility_exact,
)

_SWEEP_AXES = ("theta1", "theta2", "phi1", "phi2")


@dataclass(frozen=True)
class RunRecord:
    """One command invocation and its result, in serializable form."""

    command: str
    state: TwoQubitState | None
    config: SearchConfig | None
    seed: int | None
    report: VisibilityReport | float
    wall_time: float
    shots: dict | None = None

    def to_dict(self, include_wall_time: bool = True) -> dict:
        doc: dict = {"command": self.command}
        if self.state is not None:
            doc["state"] = {"amplitudes": [[a.real, a.imag] for a in self.state.amps]}
        if self.config is not None:
            # The thread count changes execution, never the result, so it is
            # left out to keep reports byte-identical across --threads values.
            doc["config"] = {
                "grid_points_theta": self.config.grid_points_theta,
                "grid_points_phi": self.config.grid_points_phi,
                "refine_tolerance": self.config.refine_tolerance,
                "max_refine_iters": self.config.max_refine_iters,
            }
        if self.seed is not None:
            doc["seed"] = self.seed
        if self.shots is not None:
            doc["shots"] = dict(self.shots)
        if isinstance(self.report, VisibilityReport):
            doc["report"] = self.report.to_dict()
        else:
            doc["report"] = self.report
        if include_wall_time:
            doc["wall_time"] = self.wall_time
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        state = None
        if "state" in doc:
            state = TwoQubitState(*(complex(re, im) for re, im in doc["state"]["amplitudes"]))
        config = None
        if "config" in doc:
            config = SearchConfig(**doc["config"])
        report = doc["report"]
        if isinstance(report, dict):
            report = VisibilityReport(
                pbar_max=report["pbar_max"],
                pbar_min=report["pbar_min"],
                angles_max=ProtocolAngles(**report["angles_max"]),
                angles_min=ProtocolAngles(**report["angles_min"]),
                visibility=report["visibility"],
                evaluations=report["evaluations"],
                std_error=report.get("std_error"),
            )
        return cls(
            command=doc["command"],
            state=state,
            config=config,
            seed=doc.get("seed"),
            report=report,
            wall_time=doc.get("wall_time", 0.0),
            shots=doc.get("shots"),
        )


def _uint64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _read_state(args) -> TwoQubitState:
    if args.state == "-":
        text = sys.stdin.read()
    else:
        with open(args.state, "r", encoding="utf-8") as handle:
            text = handle.read()
    return parse_state(text, auto_normalize=args.normalize)


def _resolve_seed(args) -> int:
    if getattr(args, "entropy", False):
        seed = secrets.randbits(64)
        print(f"entropy seed: {seed}", file=sys.stderr)
        return seed
    return args.seed


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        grid_points_theta=args.grid_theta,
        grid_points_phi=args.grid_phi,
        refine_tolerance=args.refine_tol,
        threads=args.threads,
    )


def _emit_record(record: RunRecord) -> None:
    print(json.dumps(record.to_dict(include_wall_time=False)))
    print(f"wall time: {record.wall_time:.3f} s", file=sys.stderr)


def _parse_axis_spec(spec: str, allowed: tuple[str, ...]) -> tuple[str, list[float]]:
    """Decode NAME=START:STOP:STEPS with START/STOP in units of pi."""
    name, sep, rest = spec.partition("=")
    if not sep or name not in allowed:
        raise ParseError(f"axis must be one of {allowed}, got {spec!r}")
    parts = rest.split(":")
    if len(parts) != 3:
        raise ParseError(f"axis range must be START:STOP:STEPS, got {rest!r}")
    try:
        start, stop = float(parts[0]) * math.pi, float(parts[1]) * math.pi
        steps = int(parts[2])
    except ValueError:
        raise ParseError(f"axis range must be numeric, got {rest!r}") from None
    if steps < 1:
        raise ParseError("axis step count must be positive")
    width = (stop - start) / steps
    return name, [start + k * width for k in range(steps)]


def _single_excitation(state: TwoQubitState) -> SingleExcitationState:
    if abs(state.amp00) > 1e-9 or abs(state.amp11) > 1e-9:
        raise ParseError(
            "--single requires a single-excitation state (amp00 and amp11 zero)"
        )
    return SingleExcitationState(state.amp01, state.amp10)


def _random_angles(rng: np.random.Generator) -> ProtocolAngles:
    t1, t2 = rng.uniform(0.0, math.pi, 2)
    f1, f2 = rng.uniform(0.0, 2.0 * math.pi, 2)
    return ProtocolAngles(t1, t2, f1, f2)


def _cmd_exact(args) -> int:
    state = _read_state(args)
    print(f"{concurrence_exact(state):.15f}")
    return 0


def _cmd_visibility(args) -> int:
    state = _read_state(args)
    config = _search_config(args)
    started = time.perf_counter()
    report = find_extrema(state, config)
    record = RunRecord(
        command="visibility",
        state=state,
        config=config,
        seed=None,
        report=report,
        wall_time=time.perf_counter() - started,
    )
    _emit_record(record)
    return 0


def _cmd_shots(args) -> int:
    state = _read_state(args)
    config = _search_config(args)
    seed = _resolve_seed(args)
    started = time.perf_counter()
    report = estimate_concurrence_shots(
        state,
        config,
        shots_stage1=args.shots1,
        shots_stage2=args.shots2,
        seed=seed,
    )
    n_points = config.grid_points_theta**2 * config.grid_points_phi**2
    record = RunRecord(
        command="shots",
        state=state,
        config=config,
        seed=seed,
        report=report,
        wall_time=time.perf_counter() - started,
        shots={
            "stage1_per_point": args.shots1,
            "stage1_total": args.shots1 * n_points,
            "stage2_per_candidate": args.shots2,
            "stage2_total": args.shots2 * 6,
        },
    )
    _emit_record(record)
    return 0


def _cmd_sweep(args) -> int:
    state = _read_state(args)
    if not args.axis:
        raise ParseError("sweep requires at least one --axis NAME=START:STOP:STEPS")
    if args.single:
        if len(args.axis) != 1:
            raise ParseError("--single sweeps exactly one axis (phi)")
        _, values = _parse_axis_spec(args.axis[0], ("phi",))
        probe = _single_excitation(state)
        print("phi,p_e")
        for phi in values:
            print(f"{phi!r},{single_particle_probability(probe, phi)!r}")
        return 0

    axes = [_parse_axis_spec(spec, _SWEEP_AXES) for spec in args.axis]
    names = [name for name, _ in axes]
    if len(names) != len(set(names)):
        raise ParseError("sweep axes must be distinct")
    if len(axes) > 2:
        raise ParseError("sweep supports at most two axes")
    fixed = {
        "theta1": args.theta1 * math.pi,
        "theta2": args.theta2 * math.pi,
        "phi1": args.phi1 * math.pi,
        "phi2": args.phi2 * math.pi,
    }
    print(",".join(names + ["pbar"]))
    if len(axes) == 1:
        grids = [(v,) for v in axes[0][1]]
    else:
        grids = [(v1, v2) for v1 in axes[0][1] for v2 in axes[1][1]]
    for point in grids:
        settings = dict(fixed)
        for name, value in zip(names, point):
            settings[name] = value
        pbar = exact_pbar(state, ProtocolAngles(**settings))
        print(",".join([repr(v) for v in point] + [repr(pbar)]))
    return 0


def _cmd_random(args) -> int:
    seed = _resolve_seed(args)
    print(serialize_state(random_pure_state(seed)))
    return 0


def _cmd_verify(args) -> int:
    trials = args.trials
    rng = np.random.default_rng(args.seed)
    fault = 1e-6 if args.inject_fault else 0.0
    failures: list[str] = []

    def run_check(name, tol, residual_iter):
        worst, offender = 0.0, None
        for residual, detail in residual_iter:
            if residual > worst:
                worst, offender = residual, detail
        status = "PASS" if worst <= tol else "FAIL"
        print(f"{name:<30} max residual {worst:.3e}  tol {tol:.0e}  {status}")
        if status == "FAIL":
            failures.append(f"{name}: residual {worst!r} at {offender}")

    def phase_cases():
        for _ in range(trials):
            state, angles = haar_state(rng), _random_angles(rng)
            yield phase_identity_residual(state, angles) + fault, (state, angles)

    def joint_probability_cases():
        for _ in range(trials):
            state, angles = haar_state(rng), _random_angles(rng)
            dist = distribution_from_coefficients(apply_protocol(state, angles))
            direct = dist.p_gg * dist.p_ee - dist.p_ge * dist.p_eg + 0.25
            yield abs(corrected_joint_probability(dist) - direct), (state, angles)

    def closed_form_cases():
        for _ in range(trials):
            vec = rng.standard_normal(4)
            vec /= np.linalg.norm(vec)
            a, b, c, d = (float(v) for v in vec)
            angles = _random_angles(rng)
            state = TwoQubitState(a, b, c, d)
            gap = abs(real_coefficient_pbar(a, b, c, d, angles) - exact_pbar(state, angles))
            yield gap, (state, angles)

    def bound_cases():
        for _ in range(trials):
            state, angles = haar_state(rng), _random_angles(rng)
            c = concurrence_exact(state)
            pbar = exact_pbar(state, angles)
            excess = max(pbar - (1.0 + c) / 4.0, (1.0 - c) / 4.0 - pbar, 0.0)
            yield excess, (state, angles)

    def visibility_cases():
        for _ in range(min(trials, 25)):
            state = haar_state(rng)
            gap = abs(visibility_exact(state) - concurrence_exact(state))
            yield gap, (state, None)

    run_check("phase-identity", 1e-12, phase_cases())
    run_check("joint-probability-identity", 1e-12, joint_probability_cases())
    run_check("closed-form-real", 1e-12, closed_form_cases())
    run_check("bound-containment", 1e-12, bound_cases())
    run_check("visibility-vs-concurrence", 1e-6, visibility_cases())

    if failures:
        print("overall: FAIL")
        for line in failures:
            print(line, file=sys.stderr)
        return 1
    print("overall: PASS")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entvis",
        description=(
            "Measure the concurrence of a two-qubit cavity state through the "
            "two-particle visibility of a simulated atom interferometer."
        ),
        epilog="All command-line angles are in units of pi (0.5 means pi/2).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_state(sp):
        sp.add_argument("state", help="state JSON file, or '-' for stdin")
        sp.add_argument(
            "--normalize",
            action="store_true",
            help="renormalize the input state instead of rejecting it",
        )

    def add_search(sp):
        sp.add_argument("--grid-theta", type=_positive_int, default=16, metavar="N",
                        help="grid points per theta axis (default 16)")
        sp.add_argument("--grid-phi", type=_positive_int, default=16, metavar="N",
                        help="grid points per phi axis (default 16)")
        sp.add_argument("--refine-tol", type=float, default=1e-9, metavar="X",
                        help="angle convergence tolerance in radians (default 1e-9)")
        sp.add_argument("--threads", type=_positive_int,
                        default=os.cpu_count() or 1, metavar="T",
                        help="grid evaluation threads; results do not depend on T")

    def add_seed(sp):
        sp.add_argument("--seed", type=_uint64, default=0,
                        help="unsigned 64-bit seed (default 0)")
        sp.add_argument("--entropy", action="store_true",
                        help="draw the seed from OS entropy instead (reported on stderr)")

    sp = sub.add_parser("exact", help="print the exact concurrence of a state")
    add_state(sp)
    sp.set_defaults(func=_cmd_exact)

    sp = sub.add_parser("visibility", help="search the angle space and report the visibility")
    add_state(sp)
    add_search(sp)
    sp.set_defaults(func=_cmd_visibility)

    sp = sub.add_parser("shots", help="estimate the concurrence from simulated measurement shots")
    add_state(sp)
    add_search(sp)
    add_seed(sp)
    sp.add_argument("--shots1", type=_positive_int, default=200, metavar="N",
                    help="stage-1 shots per grid point (default 200)")
    sp.add_argument("--shots2", type=_positive_int, default=1_000_000, metavar="N",
                    help="stage-2 shots per candidate (default 1000000)")
    sp.set_defaults(func=_cmd_shots)

    sp = sub.add_parser("sweep", help="tabulate the joint probability over one or two angle axes (CSV)")
    add_state(sp)
    sp.add_argument("--axis", action="append", default=[], metavar="NAME=START:STOP:STEPS",
                    help="axis to sweep, range in units of pi, endpoint excluded; repeatable")
    for name, default in (("theta1", 0.25), ("theta2", 0.25), ("phi1", 0.0), ("phi2", 0.0)):
        sp.add_argument(f"--{name}", type=float, default=default, metavar="V",
                        help=f"fixed {name} in units of pi (default {default})")
    sp.add_argument("--single", action="store_true",
                    help="single-atom mode: sweep 'phi' and emit the excitation probability")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("verify", help="run the randomized identity and bound checks")
    sp.add_argument("--trials", type=_positive_int, default=1000)
    sp.add_argument("--seed", type=_uint64, default=0)
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("random", help="emit a Haar-random state file")
    add_seed(sp)
    sp.set_defaults(func=_cmd_random)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotNormalized, ZeroState) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InsufficientShots as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())
