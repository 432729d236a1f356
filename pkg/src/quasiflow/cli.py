"""Command-line surface: simulate, analyze onset, render, verify.

Exit codes: 0 success, 1 failure (bad config, failed verification), 2 usage
errors from the argument parser.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import brusselator as br
from . import config as cfgmod
from . import sh, snapshots
from .hull import ActiveModeSet
from .symmetry import build_holohedry, generate_frequency_module


def _build_active(cfg: cfgmod.RunConfig) -> ActiveModeSet:
    k0 = None if cfg.k0 is None else np.asarray(cfg.k0, dtype=float)
    module = generate_frequency_module(build_holohedry(cfg.symmetry), k0)
    return ActiveModeSet(module, cfg.N, cfg.K_max)


def _sh_initial_field(cfg: cfgmod.RunConfig, active: ActiveModeSet):
    if cfg.ic == "quasicrystal":
        return sh.quasicrystal_ic(
            active, cfg.lam, cfg.ic_amplitude, cfg.perturbation, cfg.seed
        )
    if cfg.ic == "random":
        return sh.random_ic(active, cfg.ic_amplitude, cfg.seed)
    if cfg.ic == "file":
        state, _ = snapshots.read_snapshot(cfg.ic_file)
        if not hasattr(state, "field"):
            raise cfgmod.BadValue("snapshot is not a one-component state")
        return state.field
    raise cfgmod.BadValue(f"ic {cfg.ic!r} not available for sh runs")


def _bruss_initial_fields(cfg: cfgmod.RunConfig, active: ActiveModeSet, params):
    if cfg.ic == "steady-plus-critical":
        onset = br.turing_analysis(cfg.A, cfg.d1, cfg.d2)
        return br.steady_plus_critical_ic(
            active, params, onset.critical_eigenvector, cfg.perturbation or 1e-6
        )
    if cfg.ic == "file":
        state, _ = snapshots.read_snapshot(cfg.ic_file)
        if not hasattr(state, "u_field"):
            raise cfgmod.BadValue("snapshot is not a two-component state")
        return state.u_field, state.v_field
    raise cfgmod.BadValue(f"ic {cfg.ic!r} not available for brusselator runs")


def _snapshot_hook(outdir: Path, cfg: cfgmod.RunConfig):
    every = cfg.snapshot_every

    def hook(state, rec):
        if every > 0 and rec.step % every == 0:
            snapshots.write_snapshot(
                state, outdir / f"snapshot_{rec.step:08d}.qcs", cfg
            )

    return hook


def _run_simulation(cfg: cfgmod.RunConfig, outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(cfgmod.to_text(cfg), encoding="ascii")
    active = _build_active(cfg)
    hook = _snapshot_hook(outdir, cfg)
    if cfg.equation == "sh":
        field = _sh_initial_field(cfg, active)
        state = sh.make_state(
            field, cfg.lam, scheme=cfg.scheme, dt=cfg.dt, dealias=cfg.dealias
        )
        final, traj = sh.integrate(
            state, cfg.T, hooks=(hook,), diag_every=cfg.diag_every, s=cfg.s
        )
    else:
        params = br.BrusselatorParams(A=cfg.A, B=cfg.B, d1=cfg.d1, d2=cfg.d2)
        u, v = _bruss_initial_fields(cfg, active, params)
        state = br.make_bruss_state(u, v, params, dt=cfg.dt, dealias=cfg.dealias)
        final, traj = br.bruss_integrate(
            state, cfg.T, hooks=(hook,), diag_every=cfg.diag_every, s=cfg.s
        )
    snapshots.write_diagnostics_csv(traj, outdir / "diagnostics.csv")
    snapshots.write_snapshot(final, outdir / "final.qcs", cfg)
    print(f"wrote {outdir}/diagnostics.csv ({len(traj)} records) and final.qcs")
    return 0


def _cmd_simulate(args, equation: str) -> int:
    text = Path(args.config).read_text(encoding="ascii")
    cfg = cfgmod.parse_config(text)
    if cfg.equation != equation:
        raise cfgmod.BadValue(
            f"config says equation = {cfg.equation}, this subcommand runs {equation}"
        )
    outdir = Path(args.output) if args.output else Path(cfg.output_dir)
    return _run_simulation(cfg, outdir)


def _cmd_turing(args) -> int:
    rep = br.turing_analysis(args.A, args.d1, args.d2)
    for line in rep.lines():
        print(line)
    return 0


def _cmd_render(args) -> int:
    state, _ = snapshots.read_snapshot(args.snapshot)
    field = state.u_field if hasattr(state, "u_field") else state.field
    snapshots.export_raster(
        field, (args.window[0], args.window[1]), args.resolution, args.out
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_verify(args) -> int:
    from . import verification

    reports = verification.run_all(progress=print)
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiflow",
        description="pseudospectral pattern dynamics on quasiperiodic hulls",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for name in ("simulate-sh", "simulate-bruss"):
        p = sub.add_parser(name, help=f"run a {name.split('-')[1]} config")
        p.add_argument("--config", required=True, help="path to key = value config")
        p.add_argument("--output", default=None, help="override output directory")

    p = sub.add_parser("turing", help="onset analysis for a parameter triple")
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--d1", type=float, required=True)
    p.add_argument("--d2", type=float, required=True)

    p = sub.add_parser("render", help="rasterize a snapshot to PGM")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=float, nargs=2, default=(-20.0, 20.0))
    p.add_argument("--resolution", type=int, default=512)

    sub.add_parser("verify", help="run the full verification suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.subcommand == "simulate-sh":
            return _cmd_simulate(args, "sh")
        if args.subcommand == "simulate-bruss":
            return _cmd_simulate(args, "brusselator")
        if args.subcommand == "turing":
            return _cmd_turing(args)
        if args.subcommand == "render":
            return _cmd_render(args)
        if args.subcommand == "verify":
            return _cmd_verify(args)
    except (cfgmod.BadValue, cfgmod.UnknownKey, OSError,
            snapshots.FormatVersionMismatch, snapshots.CorruptPayload,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
