"""Command-line interface.

Subcommands:

    run <config>            one propagation, outputs under --out
    scan <config>           ellipticity or intensity scan per the [scan] section
    relax <config>          ground state only, saved as ground_state.npz
    spectrum <series.csv>   recompute a spectrum from a written time series
    snapshot-info <file>    print the metadata of a binary density snapshot

Exit codes: 0 success, 2 configuration error, 3 numerical blowup,
4 partial scan failure.
"""

import argparse
import os
import sys

from .config import load_config
from .errors import ConfigError, NumericalBlowupError, PartialScanError
from .observables import SPECTRUM_SOURCES, SPECTRUM_WINDOWS, hhg_spectrum
from .outputs import read_timeseries, snapshot_info_text, write_spectrum
from .runner import convergence_check, relax_to_file, run_scan, run_single

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_PARTIAL = 4


def _add_common(p):
    p.add_argument("--out", default="runs", help="output directory (default: ./runs)")
    p.add_argument("--seed-state", default=None, metavar="FILE",
                   help="saved wavefunction (.npz) used to seed the relaxation")


def build_parser():
    parser = argparse.ArgumentParser(prog="tdse2d", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single propagation from a config file")
    p_run.add_argument("config")
    _add_common(p_run)
    p_run.add_argument("--convergence-check", action="store_true",
                       help="also run at doubled grid resolution and halved dt; report deltas")

    p_scan = sub.add_parser("scan", help="parameter scan from a config file")
    p_scan.add_argument("config")
    _add_common(p_scan)
    p_scan.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="scan points run in up to N worker processes")

    p_relax = sub.add_parser("relax", help="imaginary-time ground state only")
    p_relax.add_argument("config")
    _add_common(p_relax)

    p_spec = sub.add_parser("spectrum", help="spectrum from a written time-series CSV")
    p_spec.add_argument("series_file")
    p_spec.add_argument("--out", default=None, help="output CSV (default: spectrum.csv beside the input)")
    p_spec.add_argument("--source", choices=SPECTRUM_SOURCES, default="acceleration")
    p_spec.add_argument("--window", choices=SPECTRUM_WINDOWS, default="hann")
    p_spec.add_argument("--rescale", action="store_true",
                        help="rescale so the fundamental peak equals one")

    p_info = sub.add_parser("snapshot-info", help="print snapshot metadata")
    p_info.add_argument("snapshot_file")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.convergence_check:
                report = convergence_check(cfg, args.out, seed_state=args.seed_state)
                for k, v in report.items():
                    print(f"{k} = {v:.6g}")
            else:
                res = run_single(cfg, args.out, seed_state=args.seed_state)
                print(f"ground state energy = {res.ground_energy:.6f} au")
                print(f"final norm^2 = {res.final_norm2:.9g}")
                print(f"ionization yield = {res.ionization_yield:.9g}")
                print(f"outputs in {res.out_dir}")
        elif args.command == "scan":
            cfg = load_config(args.config)
            result = run_scan(cfg, args.out, jobs=args.jobs, seed_state=args.seed_state)
            print(f"scan table: {result.table_path}")
            if result.failures:
                for label, message in result.failures:
                    print(f"failed point {label}: {message}", file=sys.stderr)
                raise PartialScanError(
                    f"{len(result.failures)} scan point(s) failed", result.failures
                )
        elif args.command == "relax":
            cfg = load_config(args.config)
            gs, path = relax_to_file(cfg, args.out, seed_state=args.seed_state)
            print(f"ground state energy = {gs.energy:.6f} au ({gs.iterations} iterations)")
            print(f"saved to {path}")
        elif args.command == "spectrum":
            series, _meta = read_timeseries(args.series_file)
            spec = hhg_spectrum(series, source=args.source, window=args.window,
                                rescale=args.rescale)
            out = args.out or os.path.join(
                os.path.dirname(os.path.abspath(args.series_file)), "spectrum.csv"
            )
            write_spectrum(out, spec)
            print(f"spectrum written to {out}")
        elif args.command == "snapshot-info":
            print(snapshot_info_text(args.snapshot_file))
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowupError as err:
        print(f"numerical blowup: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except PartialScanError as err:
        print(f"partial scan failure: {err}", file=sys.stderr)
        return EXIT_PARTIAL
    except ValueError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
