"""Command-line interface.

Commands
--------
``test``      run independence tests on a CSV data matrix, JSON report;
``simulate``  size/power rejection-rate tables, CSV;
``esd``       pooled eigenvalue histogram against the limiting law, CSV;
``clt``       replicated trace-power draws and variances, CSV;
``verify``    exact rational verification suite, report lines.

Conventions: every CSV output begins with a comment line recording the
tool version, the command line, and the seed; JSON outputs carry the same
fields in a ``meta`` object.  Floating-point values are written with
round-trip precision.  The seed defaults to the ``XISPECTRA_SEED``
environment variable (else 0) and is always echoed in outputs.  Figure
rendering (``--figure``) is opt-in; delimited output stays the default.

Exit codes: 0 success; 2 usage, input parsing, or missing file; 3 ties in
the data under the ``error`` tie policy; 4 invalid simulation
configuration; 5 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import sys

import numpy as np

from . import __version__
from ._parallel import default_threads
from .errors import (
    CalibrationTooSmall,
    DegenerateColumn,
    EnumerationTooLarge,
    InvalidSample,
    NotDistributionFree,
    NotPSD,
    OddDimension,
    TiesPresent,
)
from .hightest import STATISTIC_FUNCTIONS, STATISTIC_IDS, TestConfig
from .models import MODEL_IDS, STREAM_TIES, replication_rng
from .montecarlo import (
    POWER_MODELS,
    SIZE_MODELS,
    run_clt,
    run_esd,
    run_power,
    run_size,
)
from .oracle import (
    verification_suite,
    verify_arrow_probabilities,
    verify_counterexample,
    verify_jxi_third_moment,
    verify_mean_tr_psi,
    verify_moment_displays,
    verify_tree_independence,
)
from .rankcorr import DataMatrix

FULL_GRID = ((50, 50), (70, 70), (100, 100), (200, 200), (300, 300))


def _fmt(x) -> str:
    """Round-trip decimal form: shortest string parsing back bit-identically."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _env_seed() -> int:
    raw = os.environ.get("XISPECTRA_SEED")
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise SystemExit(f"error: XISPECTRA_SEED={raw!r} is not an integer") from None
    if seed < 0:
        raise SystemExit("error: XISPECTRA_SEED must be nonnegative")
    return seed


def _comment(cmdline: str, seed: int) -> str:
    return f"# xispectra {__version__} | {cmdline} | seed={seed}"


def _write_lines(path, lines) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {path}", file=sys.stderr)


def _split_csv_list(value):
    return [part.strip() for part in value.split(",") if part.strip()]


def _parse_stats(value, default):
    if value is None:
        names = list(default)
    else:
        names = _split_csv_list(value)
        if names == ["all"]:
            names = list(STATISTIC_IDS)
    for name in names:
        if name not in STATISTIC_IDS:
            raise ValueError(
                f"unknown statistic {name!r}; choose from {', '.join(STATISTIC_IDS)} or 'all'"
            )
    return tuple(names)


def _read_matrix(path):
    """CSV to float matrix; auto-detects a header row; raises ValueError."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ValueError(f"cannot open {path}: {exc.strerror or exc}") from None
    with fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: empty input")

    def numeric(row):
        try:
            return [float(cell) for cell in row]
        except ValueError:
            return None

    header_detected = False
    first = numeric(rows[0])
    if first is None:
        header_detected = True
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: header only, no data rows")
    parsed = []
    for k, row in enumerate(rows):
        values = numeric(row)
        if values is None:
            raise ValueError(f"{path}: non-numeric value in data row {k + 1}")
        parsed.append(values)
    widths = {len(r) for r in parsed}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows (widths {sorted(widths)})")
    values = np.asarray(parsed, dtype=float)
    if values.shape[0] < 3 or values.shape[1] < 2:
        raise ValueError(
            f"{path}: need at least 3 rows and 2 columns, got {values.shape[0]}x{values.shape[1]}"
        )
    return values, header_detected


def cmd_test(args, cmdline: str) -> int:
    try:
        stats = _parse_stats(args.stats, STATISTIC_IDS)
        values, header_detected = _read_matrix(args.input)
        data = DataMatrix(values)
    except (ValueError, InvalidSample) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    config = TestConfig(
        alpha=args.alpha,
        mc_reps=args.mc_reps,
        mc_seed=args.seed,
        mc_threads=args.threads,
    )
    rng = replication_rng(args.seed, STREAM_TIES)
    reports = []
    try:
        for stat in stats:
            fn = STATISTIC_FUNCTIONS[stat]
            if stat == "q_r2":
                reports.append(fn(data, config))
            elif stat == "q_xi4":
                reports.append(
                    fn(
                        data,
                        config,
                        centering_reps=args.centering_reps,
                        centering_seed=args.seed,
                        tie_policy=args.ties,
                        rng=rng,
                    )
                )
            else:
                reports.append(fn(data, config, tie_policy=args.ties, rng=rng))
    except TiesPresent as exc:
        print(f"error: {exc} (rerun with --ties random)", file=sys.stderr)
        return 3
    except (DegenerateColumn, InvalidSample) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CalibrationTooSmall, NotDistributionFree, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    payload = {
        "meta": {
            "tool": "xispectra",
            "version": __version__,
            "command": cmdline,
            "seed": args.seed,
        },
        "input": {
            "path": args.input,
            "n": data.n,
            "p": data.p,
            "tie_policy": args.ties,
            "header_detected": header_detected,
        },
        "alpha": args.alpha,
        "reports": [r.to_dict() for r in reports],
    }
    _write_lines(args.output, [json.dumps(payload, indent=2)])
    return 0


def cmd_simulate(args, cmdline: str) -> int:
    try:
        stats = _parse_stats(args.stats, ("q_xi2", "q_xi4"))
        default_models = SIZE_MODELS if args.kind == "size" else POWER_MODELS
        if args.model:
            models = tuple(m for chunk in args.model for m in _split_csv_list(chunk))
            for m in models:
                if m not in MODEL_IDS:
                    raise ValueError(f"unknown model {m!r}")
        else:
            models = default_models
        if args.full and (args.n or args.p):
            raise ValueError("--full fixes the grid; drop --n/--p or drop --full")
        if args.full:
            grid = FULL_GRID
            reps = args.reps if args.reps is not None else 1000
        else:
            ns = [int(x) for x in _split_csv_list(args.n)] if args.n else [50, 100]
            ps = [int(x) for x in _split_csv_list(args.p)] if args.p else list(ns)
            if len(ns) != len(ps):
                raise ValueError(f"--n gives {len(ns)} sizes but --p gives {len(ps)}")
            grid = tuple(zip(ns, ps))
            reps = args.reps if args.reps is not None else 500
        runner = run_size if args.kind == "size" else run_power
        table = runner(
            models=models,
            stats=stats,
            grid=grid,
            reps=reps,
            seed=args.seed,
            alpha=args.alpha,
            mc_reps=args.mc_reps,
            centering_reps=args.centering_reps,
            threads=args.threads,
        )
    except (ValueError, OddDimension, NotPSD, CalibrationTooSmall, NotDistributionFree) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    lines = [_comment(cmdline, args.seed), "model,n,p,stat,reps,rejection_rate"]
    for model, n, p, stat, reps_, rate in table.iter_records():
        lines.append(f"{model},{n},{p},{stat},{reps_},{_fmt(rate)}")
    _write_lines(args.output, lines)
    return 0


def cmd_esd(args, cmdline: str) -> int:
    try:
        result = run_esd(
            args.kind,
            n=args.n,
            p=args.p,
            reps=args.reps,
            bins=args.bins,
            seed=args.seed,
            threads=args.threads,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    law = result.law
    if args.kind == "phi":
        law_desc = f"semicircle(u={_fmt(law.u)},r={_fmt(law.r)})"
    else:
        law_desc = f"marchenko_pastur(y={_fmt(law.y)},sigma2={_fmt(law.sigma2)})"
    hist = result.histogram
    lines = [
        _comment(cmdline, args.seed),
        f"# matrix={args.kind} n={args.n} p={args.p} reps={args.reps} "
        f"gamma={_fmt(result.gamma)} law={law_desc} ks={_fmt(result.ks)} "
        f"clipped_low={hist.clipped_low} clipped_high={hist.clipped_high}",
        "bin_lo,bin_hi,density",
    ]
    for lo, hi, dens in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.densities):
        lines.append(f"{_fmt(lo)},{_fmt(hi)},{_fmt(dens)}")
    _write_lines(args.output, lines)
    print(f"ks={_fmt(result.ks)} law={law_desc}")
    if args.figure:
        from .plotting import save_esd_figure

        save_esd_figure(result, args.figure)
        print(f"wrote {args.figure}", file=sys.stderr)
    return 0


def _clt_figure_path(base: str, k: int, single: bool) -> str:
    if single:
        return base
    stem, ext = os.path.splitext(base)
    return f"{stem}_k{k}{ext or '.png'}"


def cmd_clt(args, cmdline: str) -> int:
    try:
        k_list = [int(x) for x in _split_csv_list(args.k)]
        result = run_clt(
            k_list,
            n=args.n,
            p=args.p,
            reps=args.reps,
            seed=args.seed,
            threads=args.threads,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    lines = [_comment(cmdline, args.seed), "k,replication,value"]
    for k in k_list:
        centered = result.samples[k].centered
        for i, value in enumerate(centered):
            lines.append(f"{k},{i},{_fmt(value)}")
    _write_lines(args.output, lines)
    for k in k_list:
        s = result.samples[k]
        print(
            f"k={k} sample_mean={_fmt(s.sample_mean)} "
            f"sample_variance={_fmt(s.sample_variance)} "
            f"reference_variance={_fmt(s.reference_variance)}"
        )
    if args.figure:
        from .plotting import save_clt_figure

        single = len(k_list) == 1
        for k in k_list:
            path = _clt_figure_path(args.figure, k, single)
            save_clt_figure(result, k, path)
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _suite_reports(suite: str):
    if suite == "all":
        return verification_suite()
    if suite == "counterexample":
        return verify_counterexample()
    if suite == "third-moment":
        return [verify_jxi_third_moment()]
    if suite == "arrows":
        out = []
        for n in (4, 5, 6):
            out.extend(verify_arrow_probabilities(n))
        return out
    if suite == "mean-tr-psi":
        return [verify_mean_tr_psi(n, p) for n, p in ((3, 2), (4, 2), (3, 3), (5, 2))]
    if suite == "moments":
        out = []
        for n in (3, 4, 5):
            out.extend(verify_moment_displays(n))
        return out
    if suite == "trees":
        return verify_tree_independence(3)
    raise ValueError(f"unknown suite {suite!r}")


def cmd_verify(args, cmdline: str) -> int:
    try:
        reports = _suite_reports(args.suite)
    except (ValueError, EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    lines = []
    mismatches = 0
    for r in reports:
        verdict = "MATCH" if r.match else "MISMATCH"
        lines.append(f"{r.quantity}, {r.exact}, {r.reference}, {verdict}")
        if not r.match:
            mismatches += 1
            if r.details:
                detail = "; ".join(f"{k}={v}" for k, v in r.details.items())
                print(f"note [{r.quantity}]: {detail}", file=sys.stderr)
    summary = f"# {len(reports) - mismatches}/{len(reports)} quantities match"
    if args.output is not None:
        _write_lines(args.output, [_comment(cmdline, args.seed)] + lines + [summary])
    else:
        _write_lines(None, lines + [summary])
    return 5 if mismatches else 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed (default: XISPECTRA_SEED env var, else 0); echoed in outputs",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: available cores); results do not depend on it",
    )
    parser.add_argument("--output", metavar="PATH", help="write to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xispectra",
        description="Rank-correlation spectra and high-dimensional independence tests.",
    )
    parser.add_argument("--version", action="version", version=f"xispectra {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run independence tests on a CSV data matrix")
    t.add_argument("--input", required=True, metavar="CSV", help="n x p numeric matrix")
    t.add_argument(
        "--stats",
        metavar="LIST",
        help=f"comma-separated ids from {{{','.join(STATISTIC_IDS)}}} or 'all' (default: all)",
    )
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--ties", choices=("error", "random"), default="error")
    t.add_argument("--mc-reps", type=int, default=2000, help="Monte-Carlo calibration size")
    t.add_argument("--centering-reps", type=int, default=1000, help="tr(Psi^2) centering size")
    _add_common(t)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="size/power rejection-rate tables")
    s.add_argument("kind", choices=("size", "power"))
    s.add_argument(
        "--model",
        action="append",
        metavar="M[,M...]",
        help="models to simulate (default: a,b for size; c,d,e,f for power)",
    )
    s.add_argument("--stats", metavar="LIST", help="statistic ids or 'all' (default: q_xi2,q_xi4)")
    s.add_argument("--n", metavar="LIST", help="comma-separated sample sizes (default: 50,100)")
    s.add_argument("--p", metavar="LIST", help="comma-separated dimensions (default: same as --n)")
    s.add_argument("--reps", type=int, default=None, help="replications (default: 500; 1000 with --full)")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--mc-reps", type=int, default=2000)
    s.add_argument("--centering-reps", type=int, default=1000)
    s.add_argument(
        "--full",
        action="store_true",
        help="full grid n=p in {50,70,100,200,300}, reps 1000 (multi-minute runtime)",
    )
    _add_common(s)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("esd", help="pooled eigenvalue histogram vs the limiting law")
    e.add_argument("--kind", choices=("phi", "psi"), required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--reps", type=int, default=5)
    e.add_argument("--bins", type=int, default=50)
    e.add_argument("--figure", metavar="PATH", help="also render the histogram to an image file")
    _add_common(e)
    e.set_defaults(func=cmd_esd)

    c = sub.add_parser("clt", help="replicated trace-power draws and variances")
    c.add_argument("--k", default="1,2", metavar="LIST", help="trace powers (default: 1,2)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--reps", type=int, default=1000)
    c.add_argument("--figure", metavar="PATH", help="render per-k histograms to image files")
    _add_common(c)
    c.set_defaults(func=cmd_clt)

    v = sub.add_parser("verify", help="exact rational verification suite")
    v.add_argument(
        "--suite",
        default="all",
        choices=("all", "counterexample", "third-moment", "arrows", "mean-tr-psi", "moments", "trees"),
    )
    _add_common(v)
    v.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _env_seed()
    if args.seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return 2
    if args.threads is None:
        args.threads = default_threads()
    args.threads = max(1, args.threads)
    cmdline = "xispectra " + " ".join(shlex.quote(a) for a in argv)
    return args.func(args, cmdline)


if __name__ == "__main__":
    raise SystemExit(main())
