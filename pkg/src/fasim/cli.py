"""Command-line interface.

Subcommands: ``rate``, ``layout``, ``codebook``, ``ber``, ``abep``,
``compare``, ``validate``.  Exit codes: 0 success, 1 configuration error,
2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import __version__
from .analysis import abep_bound
from .channel import build_correlation_matrix
from .config import is_compare_config, load_compare_config, load_run_config, parse_snr_spec
from .errors import ConfigError
from .modulation import build_codebook, int_to_bits
from .reporting import (
    emit_outputs,
    format_float,
    write_correlation_csv,
    write_layout_csv,
)
from .simulate import run_ber, run_comparison
from .validate import run_checks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_common(parser: argparse.ArgumentParser, *, runs: bool) -> None:
    parser.add_argument("--config", required=True, help="path to the YAML config")
    if runs:
        parser.add_argument("--seed", type=int, default=None, help="master seed override")
        parser.add_argument(
            "--snr", default=None, metavar="START:STEP:STOP", help="SNR grid override (dB)"
        )
        parser.add_argument("--min-errors", type=int, default=None)
        parser.add_argument("--max-tx", type=int, default=None)
        parser.add_argument("--threads", type=int, default=None)
        parser.add_argument("--out", default="out", help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fasim",
        description="Fluid-antenna index-modulation link simulator and bound evaluator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="print bits per transmission for each configured scheme")
    _add_common(p, runs=False)

    p = sub.add_parser("layout", help="dump the port table (or correlation matrix) as CSV")
    _add_common(p, runs=False)
    p.add_argument("--corr", action="store_true", help="dump the correlation matrix instead")
    p.add_argument("--out", default=None, help="write to a directory instead of stdout")

    p = sub.add_parser("codebook", help="dump the full codebook as CSV")
    _add_common(p, runs=False)
    p.add_argument("--out", default=None, help="write to a directory instead of stdout")

    p = sub.add_parser("ber", help="run a Monte Carlo BER sweep")
    _add_common(p, runs=True)

    p = sub.add_parser("abep", help="evaluate the analytical BER upper bound")
    _add_common(p, runs=True)

    p = sub.add_parser("compare", help="run several schemes and tabulate SNR gains")
    _add_common(p, runs=True)
    p.add_argument(
        "--long",
        action="store_true",
        help="also measure gains at BER 1e-5 (needs a deep SNR grid and large caps)",
    )

    sub.add_parser("validate", help="run the built-in invariant suite")
    return parser


def _run_overrides(args) -> dict:
    overrides = {
        "seed": args.seed,
        "min_errors": args.min_errors,
        "max_transmissions": args.max_tx,
        "threads": args.threads,
    }
    if args.snr is not None:
        overrides["snr_db"] = parse_snr_spec(args.snr)
    return overrides


def _cmd_rate(args) -> int:
    if is_compare_config(args.config):
        curves = load_compare_config(args.config).curves
    else:
        curves = (load_run_config(args.config).curve,)
    for c in curves:
        sc = c.to_scheme_config()
        print(
            f"{c.name}: scheme={c.scheme} ports={sc.n_ports} active={sc.n_active} "
            f"M={c.modulation} bits_per_tx={sc.bits_per_tx} "
            f"(index={sc.index_bits}, symbol={sc.n_active * sc.symbol_bits})"
        )
    return EXIT_OK


def _cmd_layout(args) -> int:
    run = load_run_config(args.config)
    layout = run.curve.to_scheme_config().layout
    if args.corr:
        jt = build_correlation_matrix(layout)
        if args.out:
            path = write_correlation_csv(jt.entries, f"{args.out}/correlation.csv")
            print(f"wrote {path}")
        else:
            w = csv.writer(sys.stdout)
            for row in jt.entries:
                w.writerow([format_float(v) for v in row])
    elif args.out:
        path = f"{args.out}/layout.csv"
        write_layout_csv(layout, path)
        print(f"wrote {path}")
    else:
        write_layout_csv(layout, sys.stdout)
    return EXIT_OK


def _cmd_codebook(args) -> int:
    run = load_run_config(args.config)
    sc = run.curve.to_scheme_config()
    selected = tuple(range(1, sc.n_active + 1)) if sc.scheme == "faps" else None
    book = build_codebook(sc, selected)

    def dump(fh) -> None:
        w = csv.writer(fh)
        w.writerow(("label_bits", "indices", "symbols"))
        width = book.bits_per_tx
        for label in range(len(book)):
            bits = "".join(str(b) for b in int_to_bits(label, width))
            idx = ";".join(str(int(i)) for i in book.indices[label])
            sym = ";".join(
                f"{s.real:.17g}{s.imag:+.17g}j" for s in book.symbols[label]
            )
            w.writerow((bits, idx, sym))

    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        path = f"{args.out}/codebook.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            dump(fh)
        print(f"wrote {path}")
    else:
        dump(sys.stdout)
    return EXIT_OK


def _cmd_ber(args) -> int:
    run = load_run_config(args.config, **_run_overrides(args))
    curve = run_ber(run)
    paths = emit_outputs([curve], args.out, stem=curve.name)
    for p in curve.points:
        print(
            f"{curve.name} snr={p.snr_db:g} dB  tx={p.transmissions}  "
            f"errors={p.bit_errors}  ber={p.ber:.3e}"
        )
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_abep(args) -> int:
    run = load_run_config(args.config, **_run_overrides(args))
    settings = run.abep
    if settings is None:
        from .config import AbepSettings

        settings = AbepSettings()
    sc = run.curve.to_scheme_config()
    if sc.scheme == "faps":
        raise ConfigError("the analytical bound applies to index-modulated schemes")
    book = build_codebook(sc)
    jt = build_correlation_matrix(sc.layout)
    n0 = np.array([10.0 ** (-s / 10.0) for s in run.snr_db])
    rng = np.random.Generator(np.random.Philox(key=run.seed))
    result = abep_bound(
        book, jt, sc.n_rx, n0, mode=settings.mode, sample_count=settings.samples, rng=rng
    )
    from .reporting import ber_figure, write_abep_csv

    import os

    os.makedirs(args.out, exist_ok=True)
    csv_path = write_abep_csv(result, os.path.join(args.out, f"{run.curve.name}_abep.csv"))
    fig = ber_figure([], [(run.curve.name, result)])
    fig_path = os.path.join(args.out, f"{run.curve.name}_abep.svg")
    fig.savefig(fig_path)
    for snr, bound in zip(result.snr_db, result.bound):
        print(f"{run.curve.name} snr={snr:g} dB  abep<={bound:.6e}")
    print(f"wrote {csv_path}")
    print(f"wrote {fig_path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = load_compare_config(args.config, long_targets=args.long, **_run_overrides(args))
    curves, gains = run_comparison(cfg.run_configs(), cfg.targets)
    paths = emit_outputs(curves, args.out, gains=gains, stem="compare")
    for g in gains:
        if g.status == "ok":
            print(
                f"target {g.target_ber:g}: {g.reference} vs {g.name}: "
                f"gain {g.gain_db:+.3f} dB"
            )
        else:
            print(f"target {g.target_ber:g}: {g.name}: not reached")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_validate(_args) -> int:
    checks = run_checks()
    failed = [c for c in checks if not c.passed]
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_RUNTIME


_COMMANDS = {
    "rate": _cmd_rate,
    "layout": _cmd_layout,
    "codebook": _cmd_codebook,
    "ber": _cmd_ber,
    "abep": _cmd_abep,
    "compare": _cmd_compare,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; that is a configuration problem
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001  - surface runtime failures as exit 2
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
