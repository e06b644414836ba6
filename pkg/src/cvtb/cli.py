"""
Command-line entry point: ``cvtb {ec,fidelity,epr,validate}``.

Scan settings come from an optional preset or ``key=value`` config file and
are overridden by flags.  Output goes to ``--out``; without it the file is
written to ``$CVTB_DATA_DIR`` (or the working directory) under a name
derived from the preset or the command and channel.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ConfigError, CvtbError, OutputPathError
from .scan import (
    config_from_mapping,
    default_jobs,
    list_presets,
    load_config_file,
    load_preset,
    run_scan,
    write_csv,
)

FLAG_KEYS = {
    "channel": "channel",
    "alpha": "alpha",
    "beta": "beta",
    "nbar": "nbar",
    "lam": "lambda",
    "rprime": "rprime",
    "s": "s",
    "s2": "s2",
    "mode": "mode",
    "quad_points": "quad_points",
    "quad_halfwidth": "quad_halfwidth",
}


def _add_scan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="named figure preset (see --list-presets)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--channel", help="coh1, thm1, sqz1, coh2, thm2 or sqz2")
    grid = "value, start:stop:steps, or a comma list of these"
    p.add_argument("--alpha", help=f"coherent amplitude of mode a ({grid})")
    p.add_argument("--beta", help="coherent amplitude of mode b for coh2 (default: follows alpha)")
    p.add_argument("--nbar", help=f"thermal mean photon number ({grid})")
    p.add_argument("--lambda", dest="lam", help=f"squeezing tanh z or tanh r ({grid})")
    p.add_argument("--rprime", help="squeezing of the teleported state (fidelity only)")
    p.add_argument("--s", help=f"GSP weight s, or 'unop' ({grid})")
    p.add_argument("--s2", help="GSP weight of mode b (default: follows s)")
    p.add_argument("--mode", choices=("paper", "converged"))
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: available cores)")
    p.add_argument("--quad-points", dest="quad_points", help="Gauss-Legendre nodes per axis")
    p.add_argument("--quad-halfwidth", dest="quad_halfwidth", help="half width L of the square domain")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvtb", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    sub = parser.add_subparsers(dest="command")
    for name, helptext in (
        ("ec", "entanglement capacity scan"),
        ("fidelity", "teleportation fidelity scan"),
        ("epr", "EPR variance scan"),
    ):
        _add_scan_flags(sub.add_parser(name, help=helptext))
    v = sub.add_parser("validate", help="run the acceptance checks")
    v.add_argument("--only", help="comma-separated check numbers")
    v.add_argument("--report", action="store_true", help="also print the two-mode squeezed reference comparison")
    return parser


def _output_path(args, values: dict) -> Path:
    if args.out:
        return Path(args.out)
    if values.get("out"):
        name = values["out"]
    elif args.preset:
        name = f"{args.preset}.csv"
    else:
        name = f"{args.command}_{values['channel']}.csv"
    base = Path(os.environ.get("CVTB_DATA_DIR", "."))
    return base / name


def _scan(args) -> int:
    values: dict = {}
    if args.preset:
        values.update(load_preset(args.preset))
    if args.config:
        values.update(load_config_file(args.config))
    if values.get("command", args.command) != args.command:
        raise ConfigError(
            f"config is for the {values['command']!r} command, not {args.command!r}"
        )
    values["command"] = args.command
    for attr, key in FLAG_KEYS.items():
        v = getattr(args, attr)
        if v is not None:
            values[key] = v
    cfg = config_from_mapping(values)
    out = _output_path(args, values)
    if not (out.parent if str(out.parent) else Path(".")).is_dir():
        raise OutputPathError(f"output directory does not exist: {out.parent}")
    jobs = args.jobs if args.jobs is not None else default_jobs()
    result = run_scan(cfg, jobs)
    write_csv(result, out)
    failed = sum(1 for r in result.rows if r["error_kind"])
    print(f"wrote {len(result.rows)} rows to {out} ({failed} error rows)", file=sys.stderr)
    return 0


def _validate(args) -> int:
    from .acceptance import run_all

    numbers = None
    if args.only:
        try:
            numbers = {int(x) for x in args.only.split(",") if x.strip()}
        except ValueError:
            raise ConfigError(f"--only expects comma-separated integers, got {args.only!r}") from None
    results = run_all(numbers)
    if args.report:
        from .teleport import tmsv_reference_report

        print("reference formulas vs quadrature (two-mode squeezed channel, coherent input):")
        for row in tmsv_reference_report([0.0, 0.2, 0.4, 0.6, 0.8, 0.95]):
            print(
                f"  lambda {row['lambda']:.2f} s {row['s']}: quadrature {row['quadrature']:.6f} "
                f"reference {row['reference']:.6f} {row['error']}"
            )
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        print("\n".join(list_presets()))
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "validate":
            return _validate(args)
        return _scan(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CvtbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
