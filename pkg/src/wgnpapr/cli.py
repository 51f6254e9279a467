"""wgnpapr command line: stats, sim, spectro, verify.

Each subcommand prints a short summary to stdout and, with ``--out``,
writes machine-readable ResultDocuments.  ``verify`` exits 0 when the band
looks like thermal noise, 2 when it does not and 1 on error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import papr_math as pm
from .estimator import THREADS_ENV, MonteCarloConfig, run_monte_carlo
from .iq_io import IqIoError, read_capture, write_result
from .reports import (
    band_report_document,
    kde_document,
    monte_carlo_document,
    spectrogram_document,
    stats_table_document,
)
from .signal_gen import format_impairment, parse_impairment
from .spectro import SpectrogramConfig, compute_spectrogram, per_bin_papr, verify_band

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONSISTENT = 2

log = logging.getLogger("wgnpapr")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(not v.is_integer() or v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return [int(v) for v in values]


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _n_range(text: str) -> list[int]:
    """``lo:hi:steps`` -> integers log-spaced from lo to hi (duplicates dropped)."""
    try:
        lo, hi, steps = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:steps, got {text!r}")
    if lo < 1 or hi < lo or steps < 1 or not steps.is_integer():
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    grid = np.unique(np.rint(np.geomspace(lo, hi, int(steps))).astype(np.int64))
    return [int(v) for v in grid]


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected f_low:f_high in Hz, got {text!r}")
    return lo, hi


def _impairment(text: str):
    try:
        return parse_impairment(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="output file (a directory for multi-document runs)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="output format; csv only for tabular documents (default json)")


def _add_spectro_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="capture", type=Path, required=True,
                   help="capture body (float32 I/Q pairs) with a <path>.json sidecar")
    p.add_argument("--window", default="hann", help="taper name, e.g. hann, hamming, blackman")
    p.add_argument("--length", type=int, default=512, help="window length in samples")
    p.add_argument("--overlap", type=float, default=0.5, help="overlap fraction in [0, 0.95]")
    p.add_argument("--detrend", choices=("none", "constant"), default="constant",
                   help="per-frame mean removal (default constant)")
    p.add_argument("--nfft", type=int, default=None, help="FFT length (default: window length)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgnpapr",
        description="PAPR statistics of sampled I/Q white Gaussian noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="closed-form PAPR/CF statistics table")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=_int_list, help="comma-separated sample counts")
    group.add_argument("--n-range", type=_n_range, help="lo:hi:steps, log-spaced")
    p.add_argument("--quantiles", type=_float_list, default=[],
                   help="comma-separated probabilities in [0, 1) for PAPR/CF quantiles")
    p.add_argument("--rel-err", action="store_true",
                   help="add relative-error columns of the approximations (percent and dB)")
    _add_output(p)

    p = sub.add_parser("sim", help="Monte Carlo mean PAPR vs sample size")
    p.add_argument("--sizes", type=_int_list, required=True, help="comma-separated n values (>= 2)")
    p.add_argument("--trials", type=int, default=10_000, help="trials per sample size")
    p.add_argument("--impairment", type=_impairment, default=None,
                   help="none | imbalance:dg,dphi_deg | quantize:bits,ref_sigma | lowpass:fc,order")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--confidence", type=float, default=0.95, help="confidence level")
    p.add_argument("--kde", action="store_true", help="also write a KDE document per size")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default ${THREADS_ENV} or CPU count)")
    _add_output(p)

    p = sub.add_parser("spectro", help="spectrogram per-bin PAPR of a capture")
    _add_spectro_flags(p)
    _add_output(p)

    p = sub.add_parser("verify", help="check whether a band holds only WGN")
    _add_spectro_flags(p)
    p.add_argument("--band", type=_band, required=True, help="f_low:f_high in Hz")
    _add_output(p)
    return parser


def _write(doc, out: Path | None, fmt: str) -> None:
    if out is None:
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    write_result(doc, out, fmt)
    log.info("wrote %s", out)


def cmd_stats(args) -> int:
    ns = args.n if args.n is not None else args.n_range
    for p in args.quantiles:
        if not 0 <= p < 1:
            raise UsageError(f"quantile probability {p} outside [0, 1)")
    doc = stats_table_document(ns, args.quantiles, args.rel_err)
    cols = doc.payload["columns"]
    print(f"{'n':>10} {'H_n':>12} {'theory dB':>10} {'mean CF':>10} {'sqrt(H_n)':>10}")
    for row in doc.payload["rows"]:
        r = dict(zip(cols, row))
        print(f"{r['n']:>10d} {r['harmonic']:>12.6f} {r['theory_papr_db']:>10.4f} "
              f"{r['mean_cf_exact']:>10.6f} {r['mean_cf_bound']:>10.6f}")
    _write(doc, args.out, args.format)
    return EXIT_OK


def cmd_sim(args) -> int:
    if args.trials < 2:
        raise UsageError("--trials must be >= 2")
    if min(args.sizes) < 2:
        raise UsageError("--sizes must all be >= 2")
    cfg = MonteCarloConfig(tuple(args.sizes), args.trials, args.impairment, args.seed,
                           args.confidence)
    result = run_monte_carlo(cfg, threads=args.threads)
    series = format_impairment(args.impairment)
    print(f"impairment {series}, {args.trials} trials, seed {args.seed}")
    print(f"{'n':>10} {'mean dB':>9} {'CI low':>9} {'CI high':>9} {'theory':>9}")
    for r in result.sizes:
        print(f"{r.n:>10d} {r.mean_papr_db:>9.4f} {r.ci_low_db:>9.4f} "
              f"{r.ci_high_db:>9.4f} {r.theory_papr_db:>9.4f}")
    doc = monte_carlo_document(result)
    if args.out is None:
        return EXIT_OK
    if args.kde:
        # several documents: --out names a directory
        args.out.mkdir(parents=True, exist_ok=True)
        _write(doc, args.out / f"monte_carlo.{args.format}", args.format)
        for r in result.sizes:
            kdoc = kde_document(r, series, {"seed": args.seed, "config": cfg.to_dict()})
            _write(kdoc, args.out / f"kde_n{r.n}.{args.format}", args.format)
    else:
        _write(doc, args.out, args.format)
    return EXIT_OK


def _spectro_config(args) -> SpectrogramConfig:
    return SpectrogramConfig(window=args.window, window_length=args.length,
                             overlap_fraction=args.overlap, detrend=args.detrend,
                             fft_length=args.nfft)


def cmd_spectro(args) -> int:
    cfg = _spectro_config(args)
    capture = read_capture(args.capture)
    s = compute_spectrogram(capture, cfg)
    papr = per_bin_papr(s)
    theory = pm.to_db(pm.mean_papr(s.time_bins))
    print(f"{s.freq_bins} frequency bins x {s.time_bins} time bins")
    print(f"per-bin PAPR mean {papr.mean():.3f} dB (dB average), theory {theory:.3f} dB")
    doc = spectrogram_document(s, {"capture": str(args.capture), "label": capture.label})
    _write(doc, args.out, args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.format == "csv":
        raise UsageError("band reports are written as JSON only")
    cfg = _spectro_config(args)
    lo, hi = sorted(args.band)
    capture = read_capture(args.capture)
    span_lo, span_hi = capture.span_hz
    if lo < span_lo or hi > span_hi:
        raise UsageError(
            f"band [{lo:g}, {hi:g}] Hz lies outside the capture span [{span_lo:g}, {span_hi:g}] Hz")
    s = compute_spectrogram(capture, cfg)
    report = verify_band(s, lo, hi)
    print(f"band [{lo:g}, {hi:g}] Hz: {report.bins} bins, {report.time_bins} time bins")
    print(f"mean PAPR {report.band_mean_papr_db:.3f} dB, 95% CI "
          f"[{report.band_ci_db[0]:.3f}, {report.band_ci_db[1]:.3f}] dB, "
          f"theory {report.theory_db:.3f} dB, excess {report.excess_db:+.3f} dB")
    print(report.verdict)
    doc = band_report_document(report, {"capture": str(args.capture), "config": cfg.to_dict()})
    _write(doc, args.out, "json")
    return EXIT_OK if report.consistent else EXIT_INCONSISTENT


COMMANDS = {"stats": cmd_stats, "sim": cmd_sim, "spectro": cmd_spectro, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for "inconsistent"
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, IqIoError, OSError) as exc:
        print(f"wgnpapr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
