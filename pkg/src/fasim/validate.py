"""Self-contained invariant suite behind the ``validate`` CLI subcommand.

Each check is fast (the whole suite runs in well under a minute) and returns
a pass/fail line; the CLI exits nonzero if any check fails.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .channel import build_correlation_matrix, spectral_decompose, synthesize_channel
from .config import CurveSpec, RunConfig
from .geometry import (
    GroupingSpec,
    PortLayout,
    SurfaceSpec,
    global_label,
    split_global_label,
)
from .modulation import build_codebook
from .simulate import run_ber

__all__ = ["Check", "run_checks", "CHECKS"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _fig_small_curve() -> CurveSpec:
    return CurveSpec("fagim-small", "fagim", 2.0, 4.0, 2, 4, None, None, 2, 2, 2)


def _check_label_roundtrip() -> Check:
    surface = SurfaceSpec(2.4, 2.4, 4, 4)
    grouping = GroupingSpec.for_surface(surface, 2, 2)
    ok = all(
        global_label(*split_global_label(n, grouping), grouping) == n
        for n in range(1, surface.n_ports + 1)
    )
    return Check("geometry label round-trip", ok, "n -> (g,k) -> n over the 4x4 grid")


def _check_position_multiset() -> Check:
    surface = SurfaceSpec(2.0, 4.0, 2, 4)
    grouped = PortLayout.grouped(surface, GroupingSpec.for_surface(surface, 1, 2))
    raster = PortLayout.raster(surface)
    a = np.array(sorted(map(tuple, grouped.positions)))
    b = np.array(sorted(map(tuple, raster.positions)))
    ok = np.array_equal(a, b)
    return Check("grouped/raster cover the same grid", ok, "position multisets match")


def _check_correlation_structure() -> Check:
    issues = []
    for surface, groups in (
        (SurfaceSpec(2.0, 4.0, 2, 4), (1, 2)),
        (SurfaceSpec(2.4, 2.4, 4, 4), (2, 2)),
    ):
        layout = PortLayout.grouped(surface, GroupingSpec.for_surface(surface, *groups))
        jt = build_correlation_matrix(layout)
        factor = spectral_decompose(jt)
        n = layout.n_ports
        if abs(factor.eigenvalues.sum() - n) > 1e-6:
            issues.append(f"eigenvalue sum != {n}")
        if not np.array_equal(jt.entries, jt.entries.T):
            issues.append("asymmetric matrix")
    return Check(
        "correlation matrix structure",
        not issues,
        "; ".join(issues) or "symmetric, PSD, trace = port count",
    )


def _check_codebook() -> Check:
    config = _fig_small_curve().to_scheme_config()
    book = build_codebook(config)
    mean_energy = float(np.mean(np.sum(np.abs(book.dense) ** 2, axis=1)))
    npp = config.layout.grouping.ports_per_group
    groups_ok = all(
        sorted((i - 1) // npp for i in book.indices[k]) == list(range(config.n_active))
        for k in range(0, len(book), 7)
    )
    ok = abs(mean_energy - 1.0) <= 1e-12 and groups_ok
    return Check(
        "codebook normalization and grouping",
        ok,
        f"mean codeword energy {mean_energy:.15f}, one active port per group",
    )


def _check_channel_determinism() -> Check:
    config = _fig_small_curve().to_scheme_config()
    factor = spectral_decompose(build_correlation_matrix(config.layout))
    h1 = synthesize_channel(factor, 4, np.random.Generator(np.random.Philox(key=7)))
    h2 = synthesize_channel(factor, 4, np.random.Generator(np.random.Philox(key=7)))
    ok = np.array_equal(h1.matrix, h2.matrix)
    return Check("channel synthesis determinism", ok, "same seed, identical realization")


def _check_noiseless_ber() -> Check:
    config = RunConfig(
        curve=_fig_small_curve(),
        snr_db=(0.0,),
        seed=11,
        min_errors=1,
        max_transmissions=2048,
        noiseless=True,
    )
    curve = run_ber(config)
    ok = curve.points[0].bit_errors == 0
    return Check(
        "noiseless detection is error-free",
        ok,
        f"{curve.points[0].transmissions} transmissions, {curve.points[0].bit_errors} errors",
    )


def _check_run_determinism() -> Check:
    base = RunConfig(
        curve=_fig_small_curve(),
        snr_db=(0.0, 4.0),
        seed=23,
        min_errors=100,
        max_transmissions=4096,
    )
    a = run_ber(base)
    b = run_ber(replace(base, threads=4))
    ok = a == b
    return Check("run determinism across thread counts", ok, "threads 1 vs 4 identical")


CHECKS: tuple[Callable[[], Check], ...] = (
    _check_label_roundtrip,
    _check_position_multiset,
    _check_correlation_structure,
    _check_codebook,
    _check_channel_determinism,
    _check_noiseless_ber,
    _check_run_determinism,
)


def run_checks() -> list[Check]:
    return [check() for check in CHECKS]
