"""CSV persistence and figure rendering for BER curves and bounds.

All floating-point values are written with 17 significant digits so that a
re-read reproduces the in-memory values exactly.
"""

from __future__ import annotations

import csv
import os
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .analysis import AbepResult
from .simulate import BerCurve, BerPoint, GainRow

__all__ = [
    "format_float",
    "write_curve_csv",
    "read_curve_csv",
    "write_comparison_csv",
    "write_gain_csv",
    "write_abep_csv",
    "write_correlation_csv",
    "write_layout_csv",
    "ber_figure",
    "emit_outputs",
]

CURVE_FIELDS = ("snr_db", "transmissions", "bits", "bit_errors", "ber", "seed", "config_digest")
GAIN_FIELDS = (
    "target_ber",
    "name",
    "snr_db",
    "reference",
    "reference_snr_db",
    "gain_db",
    "status",
)
ABEP_FIELDS = ("snr_db", "abep", "mode", "pairs", "stderr")


def format_float(value: float) -> str:
    return f"{value:.17g}"


def _open_writer(path: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


def _curve_rows(curve: BerCurve) -> Iterable[list[str]]:
    for p in curve.points:
        yield [
            format_float(p.snr_db),
            str(p.transmissions),
            str(p.bits),
            str(p.bit_errors),
            format_float(p.ber),
            str(curve.seed),
            curve.config_digest,
        ]


def write_curve_csv(curve: BerCurve, path: str) -> str:
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_FIELDS)
        w.writerows(_curve_rows(curve))
    return path


def read_curve_csv(path: str, name: str | None = None) -> BerCurve:
    """Parse a curve CSV back into a :class:`BerCurve` (exact round trip)."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} has no data rows")
    points = tuple(
        BerPoint(
            snr_db=float(r["snr_db"]),
            transmissions=int(r["transmissions"]),
            bits=int(r["bits"]),
            bit_errors=int(r["bit_errors"]),
        )
        for r in rows
    )
    bits_per_tx = points[0].bits // points[0].transmissions
    return BerCurve(
        name=name or os.path.splitext(os.path.basename(path))[0],
        points=points,
        seed=int(rows[0]["seed"]),
        config_digest=rows[0]["config_digest"],
        bits_per_tx=bits_per_tx,
    )


def write_comparison_csv(curves: Sequence[BerCurve], path: str) -> str:
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(("name",) + CURVE_FIELDS)
        for curve in curves:
            for row in _curve_rows(curve):
                w.writerow([curve.name] + row)
    return path


def write_gain_csv(gains: Sequence[GainRow], path: str) -> str:
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(GAIN_FIELDS)
        for g in gains:
            w.writerow(
                [
                    format_float(g.target_ber),
                    g.name,
                    "" if g.snr_db is None else format_float(g.snr_db),
                    g.reference,
                    "" if g.reference_snr_db is None else format_float(g.reference_snr_db),
                    "" if g.gain_db is None else format_float(g.gain_db),
                    g.status,
                ]
            )
    return path


def write_abep_csv(result: AbepResult, path: str) -> str:
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(ABEP_FIELDS)
        for snr, bound, err in zip(result.snr_db, result.bound, result.stderr):
            w.writerow(
                [
                    format_float(snr),
                    format_float(bound),
                    result.mode,
                    str(result.pairs_used),
                    format_float(err),
                ]
            )
    return path


def write_correlation_csv(entries, path: str) -> str:
    """Dump a correlation matrix as N rows x N columns, full precision."""
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        for row in entries:
            w.writerow([format_float(v) for v in row])
    return path


def write_layout_csv(layout, path_or_handle) -> None:
    """Port table: label, group, within-group label, position (wavelengths)."""
    own = isinstance(path_or_handle, str)
    fh = _open_writer(path_or_handle) if own else path_or_handle
    try:
        w = csv.writer(fh)
        w.writerow(("n", "g", "k", "x_wl", "y_wl"))
        for n in range(1, layout.n_ports + 1):
            g, k = layout.group_of(n)
            x, y = layout.positions[n - 1]
            w.writerow([n, g, k, format_float(x), format_float(y)])
    finally:
        if own:
            fh.close()


def ber_figure(
    curves: Sequence[BerCurve],
    abeps: Sequence[tuple[str, AbepResult]] = (),
    title: str | None = None,
):
    """Semilog-y BER vs SNR figure: markers for simulated curves, lines for
    analytical bounds."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for curve in curves:
        mask = curve.ber > 0
        ax.semilogy(curve.snr_db[mask], curve.ber[mask], marker="o", ls="--", label=curve.name)
    for name, result in abeps:
        ax.semilogy(result.snr_db, result.bound, ls="-", label=name)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    return fig


def emit_outputs(
    curves: Sequence[BerCurve],
    out_dir: str,
    abeps: Sequence[tuple[str, AbepResult]] = (),
    gains: Sequence[GainRow] = (),
    stem: str = "ber",
) -> list[str]:
    """Write one CSV per curve, a combined CSV, optional gain/bound CSVs,
    and an SVG figure; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for curve in curves:
        paths.append(write_curve_csv(curve, os.path.join(out_dir, f"{curve.name}.csv")))
    if len(curves) > 1:
        paths.append(write_comparison_csv(curves, os.path.join(out_dir, f"{stem}_combined.csv")))
    if gains:
        paths.append(write_gain_csv(gains, os.path.join(out_dir, f"{stem}_gains.csv")))
    for name, result in abeps:
        paths.append(write_abep_csv(result, os.path.join(out_dir, f"{name}_abep.csv")))
    fig = ber_figure(curves, abeps)
    fig_path = os.path.join(out_dir, f"{stem}.svg")
    fig.savefig(fig_path)
    plt.close(fig)
    paths.append(fig_path)
    return paths
