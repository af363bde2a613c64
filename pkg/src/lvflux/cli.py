"""Command-line front end: one subcommand per capability.

Artifacts are CSV (header line, comma separator, LF terminators, floats at
17 significant digits), JSON on stdout with stable key order, and binary
P6 pixmaps.  Every file artifact gets a sidecar <path>.manifest.json with
the fully resolved parameter set, so any artifact can be regenerated
byte-for-byte from its manifest alone.

Exit codes: 0 success, 2 usage, 3 non-physical trajectory, 4 no stationary
point, 5 not a stable regime.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .basin import BasinOutcome, NotStableRegime, map_basin
from .ensemble import fit_alpha, noise_displacement_correlation, run_msd  # noqa: F401
from .integrate import NonPhysicalState, SimConfig, simulate
from .model import FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget
from .moments import closed_form_zero_flux, solve_moments
from .stability import NoStationaryPoint, Regime, regime_diagram, steady_state

SEED_ENV_VAR = "LVFLUX_SEED"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NON_PHYSICAL = 3
EXIT_NO_STATIONARY = 4
EXIT_NOT_STABLE = 5


class _UsageError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _csv_text(header: list[str], rows, trailers: list[str] | None = None) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    if trailers:
        lines.extend(trailers)
    return "\n".join(lines) + "\n"


def _ppm_bytes(pixels: np.ndarray) -> bytes:
    h, w, _ = pixels.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + pixels.astype(np.uint8).tobytes()


def _write_manifest(
    artifact_path: str, command: str, parameters: dict, seed: int | None
) -> None:
    manifest = {
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "artifacts": [artifact_path],
        "version": __version__,
    }
    with open(artifact_path + ".manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _UsageError(f"{SEED_ENV_VAR} must be an integer, got {env!r}")
    return 0


def _noise_spec(args) -> NoiseSpec | None:
    target_name = getattr(args, "noise_target", None)
    amplitude = getattr(args, "amplitude", 0.0)
    if target_name is None:
        if amplitude:
            raise _UsageError("--amplitude needs --noise-target")
        return None
    return NoiseSpec(
        target=NoiseTarget(target_name),
        amplitude=amplitude,
        distribution=NoiseDistribution(args.dist),
    )


# ---------------------------------------------------------------------------
# subcommands


def _cmd_steady_state(args) -> int:
    analysis = steady_state(FluxParams(args.bx, args.by))

    def lam(value):
        return None if value is None else {"re": value.real, "im": value.imag}

    doc = {
        "bx": args.bx,
        "by": args.by,
        "exists": analysis.exists,
        "discriminant": analysis.discriminant,
        "x_st": analysis.x_st,
        "y_st": analysis.y_st,
        "lambda1": lam(analysis.lambda1),
        "lambda2": lam(analysis.lambda2),
        "regime": analysis.regime.label,
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_regime_diagram(args) -> int:
    grid = regime_diagram(
        (args.bx_min, args.bx_max), (args.by_min, args.by_max), args.step
    )
    params = {
        "bx_min": args.bx_min,
        "bx_max": args.bx_max,
        "by_min": args.by_min,
        "by_max": args.by_max,
        "step": args.step,
        "threads": args.threads,
    }
    rows = (
        (grid.bx_values[j], grid.by_values[i], int(grid.codes[i, j]))
        for i in range(len(grid.by_values))
        for j in range(len(grid.bx_values))
    )
    csv_text = _csv_text(["bx", "by", "regime_code"], rows)
    if args.csv is None and args.ppm is None:
        sys.stdout.write(csv_text)
        return EXIT_OK
    if args.csv is not None:
        _write_text(args.csv, csv_text)
        _write_manifest(args.csv, "regime-diagram", params, None)
    if args.ppm is not None:
        palette = np.array([Regime(c).rgb for c in range(5)], dtype=np.uint8)
        pixels = palette[grid.codes[::-1]]  # top pixel row = largest by
        with open(args.ppm, "wb") as fh:
            fh.write(_ppm_bytes(pixels))
        _write_manifest(args.ppm, "regime-diagram", params, None)
    return EXIT_OK


def _sim_config(args, seed: int) -> SimConfig:
    return SimConfig(
        flux=FluxParams(args.bx, args.by),
        x0=args.x0,
        y0=args.y0,
        dt=args.dt,
        t_end=args.t_end,
        noise=_noise_spec(args),
        seed=seed,
        linearized=args.linearized,
    )


def _sim_params(args, seed: int) -> dict:
    return {
        "bx": args.bx,
        "by": args.by,
        "x0": args.x0,
        "y0": args.y0,
        "dt": args.dt,
        "t_end": args.t_end,
        "noise_target": args.noise_target,
        "amplitude": args.amplitude,
        "dist": args.dist,
        "linearized": args.linearized,
        "seed": seed,
    }


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    cfg = _sim_config(args, seed)
    header = ["t", "x", "y"]
    try:
        trajectory = simulate(cfg)
    except NonPhysicalState as err:
        rows = zip(err.partial.times, err.partial.x, err.partial.y)
        text = _csv_text(header, rows, [f"# nonphysical at t={_fmt(err.time)}"])
        _write_text(args.csv, text)
        if args.csv is not None:
            _write_manifest(args.csv, "simulate", _sim_params(args, seed), seed)
        sys.stderr.write(f"{err}\n")
        return EXIT_NON_PHYSICAL
    text = _csv_text(header, zip(trajectory.times, trajectory.x, trajectory.y))
    _write_text(args.csv, text)
    if args.csv is not None:
        _write_manifest(args.csv, "simulate", _sim_params(args, seed), seed)
    return EXIT_OK


def _default_start(args) -> None:
    """Ensemble runs start at the stationary point unless told otherwise."""
    if args.x0 is not None and args.y0 is not None:
        return
    analysis = steady_state(FluxParams(args.bx, args.by))
    if analysis.regime in (Regime.NO_STATIONARY, Regime.NON_PHYSICAL):
        raise NoStationaryPoint(
            f"flux ({args.bx}, {args.by}) has no physical stationary point "
            f"to start from (regime: {analysis.regime.label})"
        )
    if args.x0 is None:
        args.x0 = analysis.x_st
    if args.y0 is None:
        args.y0 = analysis.y_st


def _cmd_ensemble(args) -> int:
    seed = _resolve_seed(args)
    _default_start(args)
    cfg = _sim_config(args, seed)
    series = run_msd(cfg, args.m, threads=args.threads)
    params = _sim_params(args, seed)
    params.update(
        {"m": args.m, "fit_from": args.fit_from, "fit_to": args.fit_to,
         "threads": args.threads}
    )
    rows = zip(series.times, series.msd, series.valid_count)
    text = _csv_text(["t", "msd", "valid_count"], rows)
    _write_text(args.csv, text)
    if args.csv is not None:
        _write_manifest(args.csv, "ensemble", params, seed)
    if args.amplitude > 0.0:
        alpha = fit_alpha(series, args.amplitude, args.fit_from, args.fit_to)
        sys.stdout.write(f"alpha={_fmt(alpha)}\n")
    else:
        sys.stdout.write("alpha=undefined\n")
    return EXIT_OK


def _cmd_moments(args) -> int:
    if args.closed_form and (args.bx != 0.0 or args.by != 0.0):
        raise _UsageError("--closed-form is only defined at bx=0, by=0")
    series = solve_moments(
        FluxParams(args.bx, args.by), args.amplitude, args.dt, args.t_end
    )
    params = {
        "bx": args.bx,
        "by": args.by,
        "amplitude": args.amplitude,
        "dt": args.dt,
        "t_end": args.t_end,
        "closed_form": args.closed_form,
    }
    if args.closed_form:
        reference = closed_form_zero_flux(args.amplitude, series.times)
        rows = zip(
            series.times,
            series.var_x,
            series.var_y,
            series.cov_xy,
            reference.var_x,
            reference.var_y,
            reference.cov_xy,
        )
        header = ["t", "var_x", "var_y", "cov_xy", "cf_var_x", "cf_var_y", "cf_cov_xy"]
        deviation = max(
            np.max(np.abs(series.var_x - reference.var_x)),
            np.max(np.abs(series.var_y - reference.var_y)),
            np.max(np.abs(series.cov_xy - reference.cov_xy)),
        )
    else:
        rows = zip(series.times, series.var_x, series.var_y, series.cov_xy)
        header = ["t", "var_x", "var_y", "cov_xy"]
        deviation = None
    _write_text(args.csv, _csv_text(header, rows))
    if args.csv is not None:
        _write_manifest(args.csv, "moments", params, None)
    if deviation is not None:
        sys.stdout.write(f"max_deviation={_fmt(deviation)}\n")
    return EXIT_OK


def _cmd_basin(args) -> int:
    grid = map_basin(
        FluxParams(args.bx, args.by),
        (args.x_min, args.x_max),
        (args.y_min, args.y_max),
        args.step,
        t_max=args.t_max,
        eps_in=args.eps_in,
        r_out=args.r_out,
        dt=args.dt,
        threads=args.threads,
    )
    params = {
        "bx": args.bx,
        "by": args.by,
        "x_min": args.x_min,
        "x_max": args.x_max,
        "y_min": args.y_min,
        "y_max": args.y_max,
        "step": args.step,
        "t_max": args.t_max,
        "eps_in": args.eps_in,
        "r_out": args.r_out,
        "dt": args.dt,
        "threads": args.threads,
    }
    rows = (
        (
            grid.x_values[j],
            grid.y_values[i],
            BasinOutcome(int(grid.outcomes[i, j])).label,
        )
        for i in range(len(grid.y_values))
        for j in range(len(grid.x_values))
    )
    csv_text = _csv_text(["x", "y", "outcome"], rows)
    if args.csv is not None or args.ppm is None:
        _write_text(args.csv, csv_text)
        if args.csv is not None:
            _write_manifest(args.csv, "basin", params, None)
    if args.ppm is not None:
        palette = np.array([BasinOutcome(c).rgb for c in range(4)], dtype=np.uint8)
        pixels = palette[grid.outcomes[::-1]]  # top pixel row = largest y
        with open(args.ppm, "wb") as fh:
            fh.write(_ppm_bytes(pixels))
        _write_manifest(args.ppm, "basin", params, None)
    sys.stdout.write(f"converged_fraction={_fmt(grid.converged_fraction())}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_flux_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bx", type=float, required=True, help="prey flux rate")
    p.add_argument("--by", type=float, required=True, help="predator flux rate")


def _add_sim_flags(p: argparse.ArgumentParser, start_required: bool) -> None:
    _add_flux_flags(p)
    p.add_argument("--x0", type=float, required=start_required, default=None,
                   help="initial prey count")
    p.add_argument("--y0", type=float, required=start_required, default=None,
                   help="initial predator count")
    p.add_argument("--dt", type=float, required=True, help="time step")
    p.add_argument("--t-end", type=float, required=True, help="horizon")
    p.add_argument(
        "--noise-target",
        choices=[t.value for t in NoiseTarget],
        default=None,
        help="coefficient that fluctuates (omit for a deterministic run)",
    )
    p.add_argument("--amplitude", type=float, default=0.0, help="noise amplitude")
    p.add_argument(
        "--dist",
        choices=[d.value for d in NoiseDistribution],
        default=NoiseDistribution.UNIFORM.value,
        help="per-step sampling law",
    )
    p.add_argument("--seed", type=int, default=None,
                   help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
    p.add_argument("--linearized", action="store_true",
                   help="advance deviations from the stationary point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lvflux",
        description="Open predator-prey system with external fluxes and "
        "coefficient noise: stability regimes, trajectories, ensembles, "
        "moment dynamics, convergence basins.",
    )
    parser.add_argument("--version", action="version", version=f"lvflux {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady-state", help="stationary point, eigenvalues, regime")
    _add_flux_flags(p)
    p.set_defaults(func=_cmd_steady_state)

    p = sub.add_parser("regime-diagram", help="classify a grid of flux pairs")
    p.add_argument("--bx-min", type=float, default=-2.0)
    p.add_argument("--bx-max", type=float, default=2.0)
    p.add_argument("--by-min", type=float, default=-2.0)
    p.add_argument("--by-max", type=float, default=2.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--csv", default=None, help="CSV path (default: stdout)")
    p.add_argument("--ppm", default=None, help="P6 pixmap path")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_regime_diagram)

    p = sub.add_parser("simulate", help="one trajectory (full or linearized)")
    _add_sim_flags(p, start_required=True)
    p.add_argument("--csv", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ensemble", help="mean squared displacement over m runs")
    _add_sim_flags(p, start_required=False)
    p.add_argument("--m", type=int, required=True, help="ensemble size")
    p.add_argument("--fit-from", type=float, default=None,
                   help="fit window start (default: t_end/10)")
    p.add_argument("--fit-to", type=float, default=None,
                   help="fit window end (default: t_end)")
    p.add_argument("--csv", default=None, help="CSV path (default: stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("moments", help="second-moment dynamics of deviations")
    _add_flux_flags(p)
    p.add_argument("--amplitude", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--closed-form", action="store_true",
                   help="also emit the exact zero-flux columns (bx=by=0 only)")
    p.add_argument("--csv", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("basin", help="convergence region around a stable point")
    _add_flux_flags(p)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=4.0)
    p.add_argument("--y-min", type=float, default=0.0)
    p.add_argument("--y-max", type=float, default=4.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--t-max", type=float, default=500.0)
    p.add_argument("--eps-in", type=float, default=1e-3)
    p.add_argument("--r-out", type=float, default=1e3)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--csv", default=None, help="CSV path (default: stdout)")
    p.add_argument("--ppm", default=None, help="P6 pixmap path")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_basin)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE
    except ValueError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE
    except NoStationaryPoint as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_NO_STATIONARY
    except NotStableRegime as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_NOT_STABLE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
