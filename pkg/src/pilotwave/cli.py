"""
Command-line entry point.

    pilotwave gaussian     free Gaussian packet: ledger along a path, energy report
    pilotwave box-release  particle released from a box: ensemble ledger, report
    pilotwave propagate    evolve a packet or box state and save the field
    pilotwave validate     run the numerical checks; exit 0 only if all pass

Every run writes into ``--out`` (default ``$PILOTWAVE_OUT`` or ``./out``) and
leaves a ``manifest.json`` with the configuration, seed, library versions
and digests of the files it wrote.  Parameters can come from a
``key = value`` file given with ``--config``; flags on the command line win.

Exit codes: 0 success, 2 bad configuration, 3 numerical failure, 4 a
validation check failed.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio, gaussian
from .grid import Grid, PhysicalParams, norm
from .propagate import PropagationError, box_eigenstate, make_propagator
from .core import gradient_energy as energy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_CHECK_FAILED = 4
OUT_ENV = "PILOTWAVE_OUT"


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    parse.__name__ = kind.__name__
    return parse


def _formats(text: str) -> tuple[str, ...]:
    fmts = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [f for f in fmts if f not in ("csv", "json")]
    if bad or not fmts:
        raise argparse.ArgumentTypeError(f"formats must be csv and/or json, got {text!r}")
    return fmts


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None,
                        help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--config", type=Path, default=None,
                        help="key = value file with defaults for any flag of the subcommand")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for Born sampling of particle positions")
    common.add_argument("--formats", type=_formats, default=("csv", "json"),
                        help="ledger formats, comma separated: csv,json")
    common.add_argument("--quiet", action="store_true", help="print nothing but errors")

    parser = _Parser(prog="pilotwave", description=__doc__.split("\n\n")[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter,
                     epilog="exit codes: 0 ok, 2 configuration error, 3 numerical failure, "
                            "4 validation failure")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gaussian", parents=[common],
                       help="free Gaussian packet: energy partition along a path")
    g.add_argument("--sigma0", type=_positive(float), default=1.0,
                   help="initial width; sets Q = (hbar^2/4m sigma^2)(3 - r^2/2sigma^2) and "
                        "H = m u^2/2 + 3 hbar^2/8m sigma0^2")
    g.add_argument("--u", type=_floats, default=(0.0, 0.0, 0.0),
                   help="group velocity, comma separated; wave vector k = m u / hbar")
    g.add_argument("--mass", type=_positive(float), default=1.0, help="particle mass m")
    g.add_argument("--hbar", type=_positive(float), default=1.0, help="reduced Planck constant")
    g.add_argument("--t-end", type=_positive(float), default=2.0, help="final time")
    g.add_argument("--dt", type=_positive(float), default=1e-2,
                   help="step for the path integration and the ledger time differences")
    g.add_argument("--x0", type=_floats, default=None,
                   help="starting point of the tracked path (default sigma0 along x)")
    g.add_argument("--n", type=_positive(int), default=256,
                   help="points per axis of the spectral field track")
    g.add_argument("--ensemble", type=int, default=0,
                   help="size of a Born ensemble for the equivariance check (0: none)")

    b = sub.add_parser("box-release", parents=[common],
                       help="particle released from a box: transfer of field energy to T")
    b.add_argument("--L", type=_positive(float), default=1.0,
                   help="box side; stationary Q = 3 pi^2 hbar^2 / 2 m L^2")
    b.add_argument("--mass", type=_positive(float), default=1.0, help="particle mass m")
    b.add_argument("--hbar", type=_positive(float), default=1.0, help="reduced Planck constant")
    b.add_argument("--enlargement", type=_positive(float), default=32.0,
                   help="length of the released axis in units of L (at least 2)")
    b.add_argument("--n", type=_positive(int), default=64, help="interior points per box axis")
    b.add_argument("--nx", type=_positive(int), default=None,
                   help="points on the released axis (overrides the enlargement-based count)")
    b.add_argument("--dim", type=int, default=3, choices=(1, 2, 3), help="box dimension")
    b.add_argument("--dt", type=_positive(float), default=2e-3,
                   help="ledger and trajectory step (the field moves in half steps)")
    b.add_argument("--t-end", type=_positive(float), default=1.0, help="final time")
    b.add_argument("--ensemble", type=_positive(int), default=256,
                   help="number of Born-sampled particles")
    b.add_argument("--particle", type=_floats, default=None,
                   help="fixed initial particle position instead of an ensemble")
    b.add_argument("--mode", choices=("separable", "full"), default="separable",
                   help="evolve the released axis alone (exact for the product state) or the "
                        "full grid")

    pr = sub.add_parser("propagate", parents=[common],
                        help="evolve a state and save the final field")
    pr.add_argument("--state", choices=("gaussian", "box"), default="gaussian",
                    help="initial state: Gaussian packet or box ground state")
    pr.add_argument("--input", type=Path, default=None,
                    help="start from a saved field (.npz or .json) instead of --state")
    pr.add_argument("--dim", type=int, default=1, choices=(1, 2, 3), help="dimension")
    pr.add_argument("--n", type=_positive(int), default=256, help="points per axis")
    pr.add_argument("--extent", type=_positive(float), default=12.0,
                    help="half-width of the periodic Gaussian domain")
    pr.add_argument("--sigma0", type=_positive(float), default=1.0, help="Gaussian width")
    pr.add_argument("--u", type=_floats, default=None, help="Gaussian group velocity")
    pr.add_argument("--L", type=_positive(float), default=1.0, help="box side")
    pr.add_argument("--mass", type=_positive(float), default=1.0, help="particle mass m")
    pr.add_argument("--hbar", type=_positive(float), default=1.0, help="reduced Planck constant")
    pr.add_argument("--t-end", type=_positive(float), default=1.0, help="final time")
    pr.add_argument("--dt", type=_positive(float), default=None,
                    help="time step (default 0.1 m dx^2 / hbar)")
    pr.add_argument("--field-format", choices=("npz", "json"), default="npz",
                    help="file format of the saved field")

    sub.add_parser("validate", parents=[common],
                   help="run every numerical check; exit 4 if any fails")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        values = fileio.read_config(args.config)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key not in known or key in ("config", "help"):
            raise ConfigError(f"unknown key {key!r} in {args.config}")
        action = known[key]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        if action.type is not None and value is not None and not isinstance(value, bool):
            try:
                value = action.type(str(value))
            except argparse.ArgumentTypeError as exc:
                raise ConfigError(f"{key}: {exc}")
        if action.choices is not None and value not in action.choices:
            raise ConfigError(f"{key}: {value!r} is not one of {list(action.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _out_dir(args) -> Path:
    out = args.out or Path(os.environ.get(OUT_ENV) or "out")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}")
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _echo(args) -> dict:
    skip = {"out", "config", "quiet"}
    return {k: (list(v) if isinstance(v, tuple) else str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _say(args, text: str):
    if not args.quiet:
        print(text)


def _write_report(report, out: Path, stem: str, formats) -> list[Path]:
    files = list(fileio.write_ledger(report.ledger, out / f"{stem}_ledger", formats))
    for name, led in sorted(report.extra_ledgers.items()):
        files += fileio.write_ledger(led, out / f"{stem}_{name}_ledger", formats)
    files.append(fileio.write_report_json(report, out / f"{stem}_report.json"))
    txt = out / f"{stem}_summary.txt"
    txt.write_text(fileio.summary_text(report))
    files.append(txt)
    return files


def cmd_gaussian(args) -> int:
    from .scenarios import run_free_gaussian
    u = args.u
    try:
        prm = gaussian.GaussianParams(sigma0=args.sigma0, u=u, mass=args.mass, hbar=args.hbar)
        if args.x0 is not None and len(args.x0) != prm.dim:
            raise ValueError("--x0 must have as many components as --u")
        if args.ensemble < 0:
            raise ValueError("--ensemble must be non-negative")
        steps = args.t_end / args.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError("--t-end must be a multiple of --dt")
    except ValueError as exc:
        raise ConfigError(str(exc))
    out = _out_dir(args)
    report = run_free_gaussian(prm, args.t_end, args.dt, args.x0, n=args.n,
                               ensemble=args.ensemble, seed=args.seed)
    files = _write_report(report, out, "gaussian", args.formats)
    fileio.write_manifest(out, "gaussian", _echo(args), args.seed, files)
    _say(args, fileio.summary_text(report))
    return EXIT_OK


def cmd_box_release(args) -> int:
    from .scenarios import BoxReleaseConfig, run_box_release
    try:
        cfg = BoxReleaseConfig(L=args.L, mass=args.mass, hbar=args.hbar,
                               enlargement=args.enlargement, n=args.n, dim=args.dim, dt=args.dt,
                               t_end=args.t_end, ensemble=args.ensemble, seed=args.seed,
                               particle=args.particle, mode=args.mode, nx=args.nx)
    except ValueError as exc:
        raise ConfigError(str(exc))
    out = _out_dir(args)
    report = run_box_release(cfg)
    files = _write_report(report, out, "box_release", args.formats)
    fileio.write_manifest(out, "box-release", _echo(args), args.seed, files)
    _say(args, fileio.summary_text(report))
    return EXIT_OK


def _rms_widths(f) -> list[float]:
    from .scenarios import rms_width
    return [rms_width(f, i) for i in range(f.grid.dim)]


def cmd_propagate(args) -> int:
    p = PhysicalParams(args.hbar, args.mass)
    try:
        if args.input is not None:
            psi = fileio.load_field(args.input)
        elif args.state == "gaussian":
            u = args.u if args.u is not None else (0.0,) * args.dim
            prm = gaussian.GaussianParams(sigma0=args.sigma0, u=u, mass=args.mass, hbar=args.hbar)
            if prm.dim != args.dim:
                raise ValueError("--u must have --dim components")
            grid = Grid.cube(-args.extent, args.extent, args.n, args.dim)
            psi = gaussian.sample(grid, 0.0, prm)
        else:
            grid = Grid.cube(0.0, args.L, args.n, args.dim, "dirichlet")
            psi = box_eigenstate(grid, p, (1,) * args.dim)
        prop = make_propagator(psi, p, args.dt)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc))
    steps = int(round(args.t_end / prop.dt))
    if steps < 1:
        raise ConfigError("--t-end is shorter than one time step")
    out = _out_dir(args)
    e0 = energy(psi, p)
    final = prop.advance(steps)
    path = fileio.save_field(final, out / f"field_final.{args.field_format}")
    summary = {"schema_version": fileio.SCHEMA_VERSION, "kind": "propagation",
               "grid": final.grid.to_dict(), "steps": steps, "dt": prop.dt, "t": prop.t,
               "norm": norm(final), "energy_initial": e0, "energy_final": energy(final, p),
               "rms_width": _rms_widths(final)}
    rep = fileio.write_json(summary, out / "propagate_report.json")
    fileio.write_manifest(out, "propagate", _echo(args), args.seed, [path, rep])
    _say(args, fileio.dumps(summary))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_all
    out = _out_dir(args)
    checks, art = run_all(seed=args.seed, progress=lambda line: _say(args, line))
    files = fileio.write_ledger(art["gaussian_ledger"], out / "gaussian_path_ledger", args.formats)
    files += fileio.write_ledger(art["release_smoke"].ledger, out / "release_1d_ledger",
                                 args.formats)
    files += fileio.write_ledger(art["release_3d"].ledger, out / "release_3d_ledger",
                                 args.formats)
    doc = {"schema_version": fileio.SCHEMA_VERSION, "kind": "validation",
           "passed": all(c.passed for c in checks),
           "checks": [{"key": c.key, "description": c.description, "value": c.value,
                       "threshold": c.threshold, "passed": c.passed, "details": c.details}
                      for c in checks],
           "informational": art["informational"]}
    files.append(fileio.write_json(doc, out / "validation.json"))
    fileio.write_manifest(out, "validate", _echo(args), args.seed, files)
    failed = [c.key for c in checks if not c.passed]
    _say(args, "all checks passed" if not failed else f"failed: {', '.join(failed)}")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


COMMANDS = {"gaussian": cmd_gaussian, "box-release": cmd_box_release,
            "propagate": cmd_propagate, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"pilotwave: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropagationError as exc:
        print(f"pilotwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except FloatingPointError as exc:
        print(f"pilotwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
