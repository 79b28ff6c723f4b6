"""Command-line front end.

Subcommands: ``gain`` (synthesize and print the attitude gain), ``linearize``
(design vs numeric model comparison), ``simulate`` (one run -> CSV telemetry,
metrics summary, report figure), ``sweep`` (cartesian batch -> per-run CSVs
plus an aggregate table and figure), ``validate`` (acceptance suite).

Config precedence: built-in defaults < ``--preset`` < ``--config`` file <
flags.  Exit codes: 0 success, 1 any error or failed validation, 2 bad
command line.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys

import numpy as np

from . import config as cfgmod
from . import figures
from .errors import PipebotError
from .linmodel import design_model, linearize, reconcile
from .riccati import lqr_gain, solve_care
from .sim import run_scenario
from .telemetry import write_telemetry


def _add_common(p: argparse.ArgumentParser, run_flags: bool) -> None:
    p.add_argument("--config", metavar="PATH",
                   help="TOML run configuration file")
    p.add_argument("--preset", choices=cfgmod.PRESET_NAMES,
                   help="built-in benchmark configuration to start from")
    if run_flags:
        p.add_argument("--out", metavar="PATH",
                       help="output CSV path (simulate) or directory (sweep)")
        p.add_argument("--dt", type=float, help="integration step [s]")
        p.add_argument("--duration", type=float, help="simulated time [s]")
        p.add_argument("--seed", type=int, help="measurement-noise RNG seed")
        p.add_argument("--figures", dest="figures", action="store_true",
                       default=None, help="force report figures on")
        p.add_argument("--no-figures", dest="figures", action="store_false",
                       help="skip report figures")


def _overrides(args: argparse.Namespace, out_key: str) -> dict:
    over: dict = {}

    def put(section, key, value):
        if value is not None:
            over.setdefault(section, {})[key] = value

    put("scenario", "dt", getattr(args, "dt", None))
    put("scenario", "duration", getattr(args, "duration", None))
    put("controller", "seed", getattr(args, "seed", None))
    put("output", out_key, getattr(args, "out", None))
    put("output", "figures", getattr(args, "figures", None))
    return over


def _fmt_matrix(m: np.ndarray, fmt: str = "10.4f") -> str:
    # entries below the synthesis noise floor print as a clean zero
    return "\n".join(
        "  " + "  ".join(format(v if abs(v) >= 1e-9 else 0.0, fmt)
                         for v in row)
        for row in m
    )


def _fmt_settle(value: float | None) -> str:
    return "not settled" if value is None else f"{value:.4f} s"


def cmd_gain(args: argparse.Namespace) -> int:
    cfg = cfgmod.resolve(args.config, args.preset)
    params = cfgmod.build_params(cfg)
    weights = cfgmod.build_weights(cfg)
    variant = cfg["controller"]["model_variant"]
    model = design_model(params, variant)
    sol = solve_care(model.a, model.b, weights)
    gain = lqr_gain(sol, model.b, weights.r)

    print(f"model variant: {variant}; pipe diameter: {params.pipe_diameter:g} m")
    print("gain matrix K (rows: wheels 1-3; columns: phi, phi_rate, psi, psi_rate):")
    print(_fmt_matrix(gain.k))
    bound = 1e-8 * (1.0 + float(np.linalg.norm(sol.p, "fro")))
    print(f"CARE residual: {sol.residual_norm:.3e} (contract <= {bound:.3e})")
    eigs = ", ".join(f"{e.real:.4f}{e.imag:+.4f}j"
                     for e in np.sort_complex(sol.closed_loop_eigs))
    print(f"closed-loop eigenvalues: {eigs}")
    return 0


def cmd_linearize(args: argparse.Namespace) -> int:
    cfg = cfgmod.resolve(args.config, args.preset)
    params = cfgmod.build_params(cfg)
    variant = cfg["controller"]["model_variant"]
    design = design_model(params, variant)
    numeric = linearize(params)

    for label, model in ((f"design model ({design.provenance})", design),
                         ("numeric model (plant Jacobian at the coasting "
                          "equilibrium)", numeric)):
        print(f"{label}:")
        print("A =")
        print(_fmt_matrix(model.a, "10.4g"))
        print("B =")
        print(_fmt_matrix(model.b, "10.4g"))
        print(f"controllable: {'yes' if model.is_controllable() else 'NO'}")
        print()
    print(reconcile(design, numeric).summary())
    return 0


def _print_metrics(traj, sc, metrics) -> None:
    print(f"samples: {traj.t.size} (dt {sc.dt:g} s, duration {sc.duration:g} s)")
    print(f"velocity settling time: {_fmt_settle(metrics.velocity_settling_time)}"
          f" (band +/-2% of {sc.controller.desired_velocity:g} m/s)")
    print(f"phi settling time: {_fmt_settle(metrics.phi_settling_time)}; "
          f"psi settling time: {_fmt_settle(metrics.psi_settling_time)}"
          " (band +/-1 deg)")
    print(f"peak |torque|: {metrics.peak_torque * 1e3:.1f} N·mm")
    print(f"final-25% bands: total {metrics.steady_state_torque_band * 1e3:.2f}"
          f" N·mm, LQR component {metrics.steady_state_lqr_band * 1e3:.2f} N·mm")


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = cfgmod.resolve(args.config, args.preset, _overrides(args, "csv"))
    sc = cfgmod.build_scenario(cfg)
    out = cfgmod.output_options(cfg)
    traj, metrics = run_scenario(sc)
    path = write_telemetry(out.csv, traj)
    print(f"telemetry: {path}")
    _print_metrics(traj, sc, metrics)
    if out.figures:
        fig_path = figures.run_report(traj, sc, metrics,
                                      os.path.splitext(path)[0] + ".png")
        print(f"figure: {fig_path}")
    if traj.diverged_at is not None:
        print(f"error: run diverged at sample {traj.diverged_at} "
              f"(t = {traj.diverged_at * sc.dt:.6g} s); prefix retained",
              file=sys.stderr)
        return 1
    return 0


_AXIS_TARGETS = {
    "phi0_deg": ("scenario", "phi0_deg"),
    "psi0_deg": ("scenario", "psi0_deg"),
    "desired_velocity": ("controller", "desired_velocity"),
    "pipe_diameter": ("robot", "pipe_diameter"),
    "flow_velocity": ("robot", "flow_velocity"),
}

_AGG_HEADER = ("index,phi0_deg,psi0_deg,desired_velocity,pipe_diameter,"
               "flow_velocity,settled,v_settle_s,phi_settle_s,psi_settle_s,"
               "peak_torque_nm,steady_band_nmm,lqr_band_nmm,csv")


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = cfgmod.resolve(args.config, args.preset, _overrides(args, "directory"))
    axes = cfgmod.sweep_axes(cfg)
    out = cfgmod.output_options(cfg)
    os.makedirs(out.directory, exist_ok=True)

    names = [n for n in _AXIS_TARGETS if n in axes]
    rows = []
    for idx, combo in enumerate(itertools.product(*(axes[n] for n in names))):
        over: dict = {}
        for name, value in zip(names, combo):
            section, key = _AXIS_TARGETS[name]
            over.setdefault(section, {})[key] = value
        run_cfg = cfgmod.merge(cfg, over)
        sc = cfgmod.build_scenario(run_cfg)
        traj, m = run_scenario(sc)
        csv_name = f"run_{idx:03d}.csv"
        write_telemetry(os.path.join(out.directory, csv_name), traj)
        rows.append({
            "index": idx,
            "phi0_deg": sc.phi0_deg,
            "psi0_deg": sc.psi0_deg,
            "desired_velocity": sc.controller.desired_velocity,
            "pipe_diameter": sc.params.pipe_diameter,
            "flow_velocity": sc.params.flow_velocity,
            "settled": m.settled(),
            "v_settle_s": m.velocity_settling_time,
            "phi_settle_s": m.phi_settling_time,
            "psi_settle_s": m.psi_settling_time,
            "peak_torque_nm": m.peak_torque,
            "steady_band_nmm": m.steady_state_torque_band * 1e3,
            "lqr_band_nmm": m.steady_state_lqr_band * 1e3,
            "csv": csv_name,
        })

    agg_path = os.path.join(out.directory, "aggregate.csv")
    lines = [_AGG_HEADER]
    for r in rows:
        def num(v):
            return "nan" if v is None else format(v, ".10g")

        lines.append(",".join([
            str(r["index"]), num(r["phi0_deg"]), num(r["psi0_deg"]),
            num(r["desired_velocity"]), num(r["pipe_diameter"]),
            num(r["flow_velocity"]), str(int(r["settled"])),
            num(r["v_settle_s"]), num(r["phi_settle_s"]),
            num(r["psi_settle_s"]), num(r["peak_torque_nm"]),
            num(r["steady_band_nmm"]), num(r["lqr_band_nmm"]), r["csv"],
        ]))
    lines.append("")
    with open(agg_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))

    settled = sum(r["settled"] for r in rows)
    print(f"{len(rows)} runs ({' x '.join(f'{len(axes[n])} {n}' for n in names)})"
          f", {settled} settled")
    print(f"aggregate: {agg_path}")
    if out.figures:
        print(f"figure: {figures.sweep_report(rows, os.path.join(out.directory, 'aggregate.png'))}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    from .validate import run_acceptance

    criteria = None
    if args.criteria:
        criteria = [int(tok) for tok in args.criteria.split(",") if tok.strip()]
    results = run_acceptance(criteria)
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    ok = n_pass == len(results)
    print(f"overall: {'PASS' if ok else 'FAIL'} ({n_pass}/{len(results)})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipebot",
        description="Attitude stabilization and velocity tracking for a "
                    "three-wheel in-pipe robot: gain synthesis, closed-loop "
                    "simulation, batch sweeps, acceptance checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gain", help="synthesize and print the gain matrix")
    _add_common(p, run_flags=False)
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("linearize",
                       help="compare design and numeric linear models")
    _add_common(p, run_flags=False)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("simulate", help="run one scenario, write telemetry")
    _add_common(p, run_flags=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a cartesian grid of scenarios")
    _add_common(p, run_flags=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--criteria", metavar="IDS",
                   help="comma-separated criterion ids (default: all)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipebotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
