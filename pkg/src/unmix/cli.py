"""Command-line interface.

Subcommands: synth (generate a scene), extract (run one extractor), bench
(Monte Carlo comparison with CSV/JSON reports and figures), plot-data
(matched-signature and convergence data plus figures). Exit codes: 0 ok,
1 validation error, 2 I/O or format error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .core import match_endmembers
from .extractors import ALGORITHM_NAMES, ExtractorSpec, extract_detailed, label_for
from .harness import BenchSpec, run_bench, write_report_csvs, write_report_json
from .io import FormatError, load_cube, load_spectra_csv, save_cube, save_spectra_csv
from .synth import SceneSpec, parse_snr, synthesize


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this CLI reserves 2 for I/O errors."""

    def error(self, message):
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _add_ga_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--npop", type=int, default=100, help="GA population size")
    sub.add_argument("--ngen", type=int, default=200, help="GA generations")
    sub.add_argument(
        "--pm", type=float, default=None, help="GA mutation probability (per-variant default)"
    )
    sub.add_argument(
        "--pc", type=float, default=None, help="GA crossover probability (per-variant default)"
    )
    sub.add_argument("--skewers", type=int, default=10000, help="PPI skewer count")
    sub.add_argument("--max-sweeps", type=int, default=20, help="N-FINDR sweep cap")


def _spec_from_args(args, name: str, p: int, seed: int) -> ExtractorSpec:
    return ExtractorSpec.from_name(
        name,
        p,
        seed=seed,
        npop=args.npop,
        ngen=args.ngen,
        pm=args.pm,
        pc=args.pc,
        skewers=args.skewers,
        max_sweeps=args.max_sweeps,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="unmix",
        description="Hyperspectral endmember extraction toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser(
        "synth",
        help="generate a synthetic scene",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    s.add_argument("--p", type=int, required=True, help="number of endmembers")
    s.add_argument("--bands", type=int, required=True, help="spectral bands")
    s.add_argument("--side", type=int, required=True, help="scene is side x side pixels")
    s.add_argument(
        "--snr", type=parse_snr, default="noiseless", help="SNR in dB, or 'noiseless'"
    )
    s.add_argument("--seed", type=int, default=0, help="scene seed")
    s.add_argument(
        "--no-pure-pixels",
        action="store_true",
        help="do not force one pure pixel per endmember",
    )
    s.add_argument("--out", required=True, help="output cube path")
    s.add_argument("--truth", default=None, help="output CSV for the true library")
    s.set_defaults(func=_cmd_synth)

    e = sub.add_parser(
        "extract",
        help="run one extractor on a cube",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    e.add_argument("--algo", required=True, choices=ALGORITHM_NAMES)
    e.add_argument("--cube", required=True, help="input cube path")
    e.add_argument("--p", type=int, required=True, help="number of endmembers")
    e.add_argument("--seed", type=int, default=0, help="extractor seed")
    _add_ga_flags(e)
    e.add_argument("--out", required=True, help="output endmember CSV")
    e.set_defaults(func=_cmd_extract)

    b = sub.add_parser(
        "bench",
        help="Monte Carlo comparison of extractors",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    b.add_argument("--cube", required=True, help="input cube path")
    b.add_argument("--truth", required=True, help="reference library CSV")
    b.add_argument(
        "--algos",
        default=",".join(ALGORITHM_NAMES),
        help="comma-separated algorithm names",
    )
    b.add_argument("--runs", type=int, default=50, help="Monte Carlo runs per algorithm")
    b.add_argument("--metrics", default="sam", help="comma-separated subset of sam,sid")
    b.add_argument("--baseline", default="vca", help="algorithm the t-test/gain compare against")
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_ga_flags(b)
    b.add_argument("--json", default=None, help="path for the JSON report")
    b.add_argument("--csv", default=None, help="prefix for the CSV tables")
    b.add_argument("--no-figs", action="store_true", help="skip PNG rendering")
    b.set_defaults(func=_cmd_bench)

    d = sub.add_parser(
        "plot-data",
        help="emit matched-signature and convergence data for one extraction",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    d.add_argument("--cube", required=True, help="input cube path")
    d.add_argument("--algo", default="gaee-ivfm", choices=ALGORITHM_NAMES)
    d.add_argument("--p", type=int, required=True, help="number of endmembers")
    d.add_argument("--truth", default=None, help="reference library CSV for matching")
    d.add_argument("--metric", default="sam", choices=("sam", "sid"))
    d.add_argument("--seed", type=int, default=0, help="extractor seed")
    _add_ga_flags(d)
    d.add_argument("--out-prefix", required=True, help="prefix for emitted files")
    d.add_argument("--no-figs", action="store_true", help="skip PNG rendering")
    d.set_defaults(func=_cmd_plot_data)
    return parser


def _cmd_synth(args) -> int:
    spec = SceneSpec(
        endmember_count=args.p,
        bands=args.bands,
        side=args.side,
        snr_db=args.snr,
        pure_pixel_guarantee=not args.no_pure_pixels,
        seed=args.seed,
    )
    cube, truth, _ = synthesize(spec)
    save_cube(cube, args.out)
    if args.truth:
        save_spectra_csv(truth, args.truth)
    return 0


def _cmd_extract(args) -> int:
    cube = load_cube(args.cube)
    spec = _spec_from_args(args, args.algo, args.p, args.seed)
    result = extract_detailed(cube, spec)
    save_spectra_csv(result.endmembers, args.out)
    return 0


def _cmd_bench(args) -> int:
    if args.json is None and args.csv is None:
        raise ValueError("no output requested: pass --json and/or --csv")
    cube = load_cube(args.cube)
    reference = load_spectra_csv(args.truth)
    names = [n.strip() for n in args.algos.split(",") if n.strip()]
    if not names:
        raise ValueError("empty --algos list")
    algorithms = tuple(
        _spec_from_args(args, name, reference.count, seed=0) for name in names
    )
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    spec = BenchSpec(
        cube=cube,
        reference=reference,
        algorithms=algorithms,
        runs=args.runs,
        metrics=metrics,
        baseline=label_for(args.baseline),
        master_seed=args.seed,
    )
    report = run_bench(spec, jobs=args.jobs)
    if args.json:
        write_report_json(report, args.json)
    if args.csv:
        write_report_csvs(report, args.csv)
        if not args.no_figs:
            _render_bench_figures(report, args.csv)
    return 0


def _render_bench_figures(report, prefix: str) -> None:
    from .figures import plot_convergence, plot_rms_box

    for metric in report.metrics:
        plot_rms_box(report.per_run, report.labels, metric, "%s_rms_%s.png" % (prefix, metric))
    for label, conv in report.convergence.items():
        plot_convergence(
            conv["best"],
            "%s_convergence_%s.png" % (prefix, label.lower()),
            conv["mean"],
            title="%s convergence (run %d)" % (label, conv["run"]),
        )


def _cmd_plot_data(args) -> int:
    cube = load_cube(args.cube)
    reference = load_spectra_csv(args.truth) if args.truth else None
    spec = _spec_from_args(args, args.algo, args.p, args.seed)
    result = extract_detailed(cube, spec)
    extracted = result.endmembers
    prefix = args.out_prefix

    sig_path = prefix + "_signatures.csv"
    with open(sig_path, "w", encoding="utf-8", newline="\n") as fh:
        if reference is not None:
            pairs = match_endmembers(extracted, reference, metric=args.metric)
            fh.write(
                "band,"
                + ",".join("ref_e%d,est_e%d" % (i + 1, i + 1) for i in range(extracted.count))
                + "\n"
            )
            for band in range(cube.bands):
                cells = []
                for ref_i, ext_j, _ in pairs:
                    cells.append("%.17g" % reference.spectra[band, ref_i])
                    cells.append("%.17g" % extracted.spectra[band, ext_j])
                fh.write("%d,%s\n" % (band, ",".join(cells)))
        else:
            fh.write(
                "band," + ",".join("est_e%d" % (i + 1) for i in range(extracted.count)) + "\n"
            )
            for band in range(cube.bands):
                cells = ["%.17g" % v for v in extracted.spectra[band]]
                fh.write("%d,%s\n" % (band, ",".join(cells)))

    if result.fitness_history is not None:
        with open(prefix + "_convergence.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("generation,best_fitness,mean_fitness\n")
            for gen, (best, mean) in enumerate(
                zip(result.fitness_history, result.mean_history)
            ):
                fh.write("%d,%.17g,%.17g\n" % (gen, best, mean))

    if not args.no_figs:
        from .figures import plot_convergence, plot_signatures

        plot_signatures(extracted, prefix + "_signatures.png", reference, args.metric)
        if result.fitness_history is not None:
            plot_convergence(
                result.fitness_history,
                prefix + "_convergence.png",
                result.mean_history,
                title="%s convergence" % result.label,
            )
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print("unmix: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("unmix: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print("unmix: %s" % exc, file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
