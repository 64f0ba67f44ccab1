"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 internal-consistency violation,
4 inconclusive shooting, 5 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .bounds import sigma_bounds, theorem3_speed_cap
from .core import (FrontlabError, ModelParams, ValidationError, fmt_float, grid_for_spacing,
                   serialize, validate_params)
from .nonlocal_bvp import (DEEP_THETAS, SHALLOW_THETAS, alpha_for_theta, continue_theta_alpha,
                           lambda_continuation)
from .shooting import InconclusiveRegion, profile_from_shot, sigma_star

EXIT_OK, EXIT_INVALID, EXIT_INCONSISTENT, EXIT_INCONCLUSIVE, EXIT_SOLVER = 0, 2, 3, 4, 5

DEFAULT_TOL = 1e-4
DEFAULT_H = 0.01
DEFAULT_ALPHA = 30.0


class CliExit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code
        self.message = message


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _params(args, mode: str) -> ModelParams:
    lam = getattr(args, "lam", None)
    p = ModelParams(args.a, args.b, 0.0 if lam is None else lam)
    return validate_params(p, mode)


def _threads() -> int:
    raw = os.environ.get("FRONTLAB_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"FRONTLAB_THREADS={raw!r} is not an integer") from None
    if n < 1:
        raise ValidationError("FRONTLAB_THREADS must be >= 1")
    return n


def _nonlocal_schedule(args, lam: float) -> tuple[tuple, tuple, str]:
    """Resolve theta/alpha schedules from the flags; explicit lists win."""
    if args.theta:
        thetas = tuple(args.theta)
        name = "custom"
    elif args.schedule == "shallow":
        thetas, name = SHALLOW_THETAS, "shallow"
    else:
        thetas, name = DEEP_THETAS, "deep"
    if args.alpha:
        alphas = tuple(args.alpha)
    elif name == "shallow":
        alphas = (DEFAULT_ALPHA,)
    else:
        alphas = (alpha_for_theta(min(thetas), lam),)
    return thetas, alphas, name


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    p = _params(args, "local")
    sb = sigma_bounds(p)
    if args.format == "text":
        _emit(f"lower={fmt_float(sb.lower)} upper={fmt_float(sb.upper)} "
              f"lower_branch={sb.lower_branch} upper_branch={sb.upper_branch}\n", args.out)
    else:
        _emit(serialize(sb, args.format).decode(), args.out)
    return EXIT_OK


def cmd_sigma_star(args) -> int:
    p = _params(args, "local")
    res = sigma_star(p, tol=args.tol)
    verdict = "ok" if res.bounds_ok else "violated"
    if args.format == "json":
        _emit(_json({
            "a": p.a, "b": p.b, "sigma_star": res.sigma_star,
            "bracket": list(res.bracket), "evaluations": res.evaluations,
            "sigma_lower": res.bounds.lower, "sigma_upper": res.bounds.upper,
            "lower_branch": res.bounds.lower_branch, "upper_branch": res.bounds.upper_branch,
            "sandwich": verdict, "settings": {"tol": args.tol},
        }), args.out)
    else:
        lo, hi = res.bracket
        _emit(f"sigma_star={fmt_float(res.sigma_star)} tol={fmt_float(args.tol)} "
              f"bracket=[{fmt_float(lo)}, {fmt_float(hi)}] "
              f"bounds=[{fmt_float(res.bounds.lower)}, {fmt_float(res.bounds.upper)}] "
              f"sandwich={verdict}\n", args.out)
    if not res.bounds_ok:
        raise CliExit(EXIT_INCONSISTENT,
                      f"sigma*={res.sigma_star!r} outside [{res.bounds.lower!r}, {res.bounds.upper!r}]")
    return EXIT_OK


def cmd_profile(args) -> int:
    if args.lam:
        p = _params(args, "nonlocal")
        thetas, alphas, _ = _nonlocal_schedule(args, p.lam)
        res = _stage("continuation", continue_theta_alpha, p, thetas, alphas, args.h)
        prof = res.profile
    else:
        p = _params(args, "local")
        if args.sigma is None:
            sigma = sigma_star(p, tol=args.tol).bracket[1]
        else:
            sigma = args.sigma
        alpha = args.alpha[0] if args.alpha else DEFAULT_ALPHA
        prof = profile_from_shot(p, sigma, grid_for_spacing(alpha, args.h))
    _emit(serialize(prof, args.format).decode(), args.out)
    return EXIT_OK


@dataclass(frozen=True)
class SweepSpec:
    a_range: tuple
    b_values: tuple
    mode: str = "local"
    lam: float | None = None
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        start, stop, step = self.a_range
        if not step > 0:
            raise ValidationError("sweep step must be > 0")
        if stop < start:
            raise ValidationError("sweep stop must be >= start")
        if self.mode not in ("local", "nonlocal"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.mode == "nonlocal" and not self.lam:
            raise ValidationError("nonlocal sweeps need --lambda")
        if not self.b_values:
            raise ValidationError("at least one b value is required")

    def a_values(self) -> list[float]:
        start, stop, step = self.a_range
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]

    def points(self) -> list[tuple[float, float]]:
        return [(a, b) for b in self.b_values for a in self.a_values()]


def sweep_point(a: float, b: float, mode: str = "local", lam: float | None = None,
                tol: float = DEFAULT_TOL, h: float = DEFAULT_H) -> dict:
    """One sweep row; failures end up in ``status`` instead of raising."""
    row = {"a": a, "b": b, "sigma_lower": None, "sigma_upper": None, "sigma_star": None,
           "lower_branch": "", "upper_branch": "", "status": "ok"}
    try:
        if mode == "local":
            p = validate_params(ModelParams(a, b), "local")
            sb = sigma_bounds(p)
            row.update(sigma_lower=sb.lower, sigma_upper=sb.upper,
                       lower_branch=sb.lower_branch, upper_branch=sb.upper_branch)
            res = sigma_star(p, tol=tol)
            row["sigma_star"] = res.sigma_star
            if not res.bounds_ok:
                row["status"] = "sandwich_violated"
        else:
            p = validate_params(ModelParams(a, b, lam), "nonlocal")
            row.update(sigma_lower=2.0, sigma_upper=theorem3_speed_cap(p),
                       lower_branch="nonlocal-floor", upper_branch="T3-cap")
            thetas = DEEP_THETAS
            res = continue_theta_alpha(p, thetas, (alpha_for_theta(thetas[-1], lam),), h)
            row["sigma_star"] = res.sigma
            if not (2.0 - 5e-3 <= res.sigma <= row["sigma_upper"] + 5e-3):
                row["status"] = "sandwich_violated"
    except InconclusiveRegion:
        row["status"] = "inconclusive"
    except ValidationError as exc:
        row["status"] = f"invalid: {exc}"
    except FrontlabError as exc:
        row["status"] = f"failed: {type(exc).__name__}"
    return row


def _sweep_star(args):
    return sweep_point(*args)


def run_sweep(spec: SweepSpec, tol: float = DEFAULT_TOL, h: float = DEFAULT_H,
              workers: int = 1) -> list[dict]:
    """Evaluate all sweep points, rows ordered as in :meth:`SweepSpec.points`."""
    jobs = [(a, b, spec.mode, spec.lam, tol, h) for a, b in spec.points()]
    if workers <= 1 or len(jobs) == 1:
        return [_sweep_star(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_star, jobs))


def cmd_sweep(args) -> int:
    spec = SweepSpec((args.a_start, args.a_stop, args.a_step), tuple(args.b), args.mode,
                     args.lam, args.out, args.format)
    sys.stderr.write(f"# settings: tol={args.tol} h={args.h} mode={spec.mode} "
                     f"lambda={spec.lam} points={len(spec.points())}\n")
    rows = run_sweep(spec, args.tol, args.h, _threads())
    _emit(serialize(rows, spec.format).decode(), spec.output)
    if any(r["status"] == "sandwich_violated" for r in rows):
        raise CliExit(EXIT_INCONSISTENT, "at least one sweep point violates its bounds")
    return EXIT_OK


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except ValidationError:
        raise
    except FrontlabError as exc:
        raise CliExit(EXIT_SOLVER, f"stage {name} failed: {type(exc).__name__}: {exc}") from exc


def cmd_nonlocal(args) -> int:
    p = _params(args, "nonlocal")
    thetas, alphas, name = _nonlocal_schedule(args, p.lam)
    res = _stage("continuation", continue_theta_alpha, p, thetas, alphas, args.h)
    report = res.to_dict()
    report["speed_cap"] = theorem3_speed_cap(p)
    report["settings"] = {"h": args.h, "schedule": name, "thetas": list(thetas),
                          "alphas": list(alphas)}
    _emit(_json(report), args.out)
    if args.profile_out:
        _emit(serialize(res.profile, "csv").decode(), args.profile_out)
    if not res.final.ok:
        bad = [d.name for d in res.final.diagnostics if not d.ok]
        raise CliExit(EXIT_INCONSISTENT, f"diagnostics failed: {', '.join(bad)}")
    return EXIT_OK


def cmd_lambda_continuation(args) -> int:
    if args.a < 0 or args.b < 0:
        raise ValidationError("a and b must be nonnegative")
    lambdas = sorted(args.lam, reverse=True)
    thetas = tuple(args.theta) if args.theta else None
    alphas = tuple(args.alpha) if args.alpha else None
    lc = _stage("lambda-continuation", lambda_continuation, args.a, args.b, lambdas,
                thetas, alphas, args.h)
    out = {"a": args.a, "b": args.b, "sigma_local": lc.sigma_local,
           "approach_monotone": lc.approach_monotone, "rows": lc.rows(),
           "settings": {"h": args.h, "thetas": list(thetas or DEEP_THETAS),
                        "alphas": None if alphas is None else list(alphas)}}
    _emit(_json(out), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frontlab",
                                 description="Traveling-wave speeds and profiles.")
    sub = ap.add_subparsers(dest="command", required=True)

    def ab(sp, lam=False, lam_list=False):
        sp.add_argument("--a", type=float, required=True)
        sp.add_argument("--b", type=float, required=True)
        if lam_list:
            sp.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True)
        elif lam:
            sp.add_argument("--lambda", dest="lam", type=float, default=None)

    def sched(sp):
        sp.add_argument("--theta", type=float, nargs="+",
                        help="decreasing theta schedule (overrides --schedule)")
        sp.add_argument("--alpha", type=float, nargs="+", help="increasing alpha schedule")
        sp.add_argument("--schedule", choices=("deep", "shallow"), default="deep",
                        help="deep: theta down to 1e-30 (default); shallow: 0.2 .. 0.01 at alpha=30")
        sp.add_argument("--h", type=float, default=DEFAULT_H)

    sp = sub.add_parser("bounds", help="closed-form bounds on sigma*")
    ab(sp)
    sp.add_argument("--format", choices=("text", "csv", "json"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("sigma-star", help="critical speed by shooting")
    ab(sp)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sigma_star)

    sp = sub.add_parser("profile", help="front profile (local, or nonlocal with --lambda)")
    ab(sp, lam=True)
    sp.add_argument("--sigma", type=float, help="speed for a local profile (default: sigma*)")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sched(sp)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("sweep", help="bounds and sigma* over a parameter grid")
    sp.add_argument("--a-start", type=float, default=0.0)
    sp.add_argument("--a-stop", type=float, default=40.0)
    sp.add_argument("--a-step", type=float, default=1.0)
    sp.add_argument("--b", type=float, nargs="+", default=[0.0, 5.0, 40.0])
    sp.add_argument("--mode", choices=("local", "nonlocal"), default="local")
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--h", type=float, default=DEFAULT_H)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("nonlocal", help="nonlocal front by theta/alpha continuation")
    ab(sp, lam=True)
    sched(sp)
    sp.add_argument("--out", help="JSON report path (default: stdout)")
    sp.add_argument("--profile-out", help="CSV path for the centred profile")
    sp.set_defaults(func=cmd_nonlocal)

    sp = sub.add_parser("lambda-continuation", help="nonlocal speed along decreasing lambda")
    ab(sp, lam_list=True)
    sp.add_argument("--theta", type=float, nargs="+")
    sp.add_argument("--alpha", type=float, nargs="+")
    sp.add_argument("--h", type=float, default=DEFAULT_H)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lambda_continuation)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for bad usage
        return int(exc.code or 0)
    try:
        if args.command == "nonlocal" and args.lam is None:
            raise ValidationError("nonlocal needs --lambda > 0")
        return args.func(args)
    except CliExit as exc:
        if exc.message:
            print(f"error: {exc.message}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InconclusiveRegion as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except FrontlabError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
