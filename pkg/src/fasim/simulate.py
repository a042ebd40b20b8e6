"""Seeded Monte Carlo BER engine with a deterministic stopping rule.

Transmissions are processed in fixed-size chunks.  The random stream of a
chunk is a Philox counter-based generator keyed by ``(master seed, SNR
index, chunk index)``, so any chunk can be computed independently and the
result of a run is bit-identical for every parallelism degree.  Inside a
chunk the draw order is: bit labels, channel real parts, channel imaginary
parts, noise real parts, noise imaginary parts.

Each SNR point accumulates chunks in waves; after every wave the cumulative
error count is scanned in chunk order and the point stops at the first chunk
that reaches the minimum error count (or at the transmission cap), so the
stopping decision never depends on completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import build_correlation_matrix, spectral_decompose
from .config import RunConfig
from .errors import ConfigError
from .modulation import Codebook, SchemeConfig, build_codebook

__all__ = [
    "BerPoint",
    "BerCurve",
    "GainRow",
    "run_ber",
    "run_comparison",
    "snr_at_ber",
]

CHUNK_TRIALS = 512
WAVE_CHUNKS = 8

# per-trial metric tensors are evaluated in sub-batches of about this many
# bytes so they stay cache-resident
_METRIC_BATCH_BYTES = 4 << 20


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    transmissions: int
    bits: int
    bit_errors: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits


@dataclass(frozen=True)
class BerCurve:
    name: str
    points: tuple[BerPoint, ...]
    seed: int
    config_digest: str
    bits_per_tx: int

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])


@dataclass(frozen=True)
class GainRow:
    target_ber: float
    name: str
    snr_db: float | None
    reference: str
    reference_snr_db: float | None
    gain_db: float | None
    status: str  # "ok" | "not_reached"


def _philox(seed: int, snr_index: int, chunk_index: int) -> np.random.Generator:
    if snr_index >= 1 << 31 or chunk_index >= 1 << 32:
        raise ConfigError("snr grid or transmission cap too large for stream keying")
    return np.random.Generator(
        np.random.Philox(key=[seed, (snr_index << 32) | chunk_index])
    )


def _popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values.astype(np.uint64))


class _SlotMetric:
    """Exhaustive ML argmin for codebooks that factor into independent slots.

    Slot ``j`` contributes one activated port and one symbol chosen among
    ``nc`` alternatives; the bit label is the mixed-radix number of the slot
    choices.  The squared-distance metric splits into per-slot and
    slot-pair terms, which are summed by broadcasting; the argmin over the
    full choice tensor is exactly the flat codebook scan.
    """

    def __init__(self, slot_syms: np.ndarray, slot_ports: np.ndarray | None):
        self.syms = np.asarray(slot_syms, dtype=complex)  # (J, nc), includes 1/sqrt(Na)
        self.static_ports = None if slot_ports is None else np.asarray(slot_ports)
        self.n_slots, self.n_choices = self.syms.shape
        self.pair_w = [
            [
                2.0 * (self.syms[a].conj()[:, None] * self.syms[b][None, :])
                for b in range(self.n_slots)
            ]
            for a in range(self.n_slots)
        ]

    def detect(self, z: np.ndarray, gram: np.ndarray, ports: np.ndarray | None = None):
        """``z = y^H H`` (T, N); ``gram = H^H H`` (T, N, N); optional
        per-trial ports (T, J) for selection schemes."""
        t_total = z.shape[0]
        j, nc = self.n_slots, self.n_choices
        if ports is None:
            port_tab = np.broadcast_to(self.static_ports, (t_total, j, nc))
        else:
            port_tab = np.broadcast_to(ports[:, :, None], (t_total, j, nc))
        size = nc**j
        batch = max(1, _METRIC_BATCH_BYTES // (size * 8))
        out = np.empty(t_total, dtype=np.int64)
        for t0 in range(0, t_total, batch):
            sl = slice(t0, min(t0 + batch, t_total))
            out[sl] = self._detect_batch(z[sl], gram[sl], port_tab[sl])
        return out

    def _detect_batch(self, z, gram, port_tab):
        t = z.shape[0]
        j, nc = self.n_slots, self.n_choices
        ti = np.arange(t)[:, None, None]
        diag = gram[ti, port_tab, port_tab].real
        zg = z[np.arange(t)[:, None, None], port_tab]
        lin = (np.abs(self.syms) ** 2)[None] * diag - 2.0 * (self.syms[None] * zg).real
        metric = np.zeros((t,) + (nc,) * j)
        for a in range(j):
            shape = [t] + [1] * j
            shape[1 + a] = nc
            metric += lin[:, a].reshape(shape)
        ti2 = np.arange(t)[:, None, None]
        for a in range(j):
            for b in range(a + 1, j):
                cross = gram[ti2, port_tab[:, a][:, :, None], port_tab[:, b][:, None, :]]
                term = (self.pair_w[a][b][None] * cross).real
                shape = [t] + [1] * j
                shape[1 + a] = nc
                shape[1 + b] = nc
                metric += term.reshape(shape)
        return metric.reshape(t, -1).argmin(axis=1)


class _SubsetMetric:
    """Exhaustive ML argmin for subset-indexed codebooks.

    The label is ``rank * M**n_active + symbol bits``; the metric is
    evaluated over a ``(subsets, M, ..., M)`` tensor whose flat index equals
    the bit label.
    """

    def __init__(self, subsets: np.ndarray, points: np.ndarray):
        self.subsets = np.asarray(subsets)  # (S, Na), 0-based ports
        self.points = np.asarray(points, dtype=complex)  # (M,), includes 1/sqrt(Na)
        self.n_subsets, self.n_active = self.subsets.shape
        self.order = self.points.shape[0]
        m = self.points
        self.pair_w = 2.0 * (m.conj()[:, None] * m[None, :])
        self.abs2 = np.abs(m) ** 2

    def detect(self, z: np.ndarray, gram: np.ndarray):
        t_total = z.shape[0]
        size = self.n_subsets * self.order**self.n_active
        batch = max(1, _METRIC_BATCH_BYTES // (size * 8))
        out = np.empty(t_total, dtype=np.int64)
        for t0 in range(0, t_total, batch):
            sl = slice(t0, min(t0 + batch, t_total))
            out[sl] = self._detect_batch(z[sl], gram[sl])
        return out

    def _detect_batch(self, z, gram):
        t = z.shape[0]
        na, m = self.n_active, self.order
        metric = np.zeros((t, self.n_subsets) + (m,) * na)
        ti = np.arange(t)[:, None]
        for a in range(na):
            pa = self.subsets[:, a]
            diag = gram[ti, pa[None, :], pa[None, :]].real  # (T, S)
            za = z[:, pa]
            lin = self.abs2[None, None, :] * diag[:, :, None] - 2.0 * (
                self.points[None, None, :] * za[:, :, None]
            ).real
            shape = [t, self.n_subsets] + [1] * na
            shape[2 + a] = m
            metric += lin.reshape(shape)
        for a in range(na):
            for b in range(a + 1, na):
                cross = gram[ti, self.subsets[None, :, a], self.subsets[None, :, b]]
                term = (self.pair_w[None, None] * cross[:, :, None, None]).real
                shape = [t, self.n_subsets] + [1] * na
                shape[2 + a] = m
                shape[2 + b] = m
                metric += term.reshape(shape)
        return metric.reshape(t, -1).argmin(axis=1)


class MonteCarloKernel:
    """Per-scheme state for chunked trials: codebook tables, the spectral
    factor of the port correlation, and the metric evaluator."""

    def __init__(self, config: SchemeConfig):
        self.config = config
        self.factor = spectral_decompose(build_correlation_matrix(config.layout))
        self.n = config.n_ports
        self.nr = config.n_rx
        self.bits = config.bits_per_tx
        self.n_labels = 1 << self.bits
        na = config.n_active
        scale = 1.0 / math.sqrt(na)
        if config.scheme == "faps":
            self.codebook: Codebook | None = None
            pts = config.constellation.points * scale
            self.sym_rows = self._faps_symbol_rows()
            self.metric = _SlotMetric(np.tile(pts, (na, 1)), None)
        elif config.scheme == "fagim":
            self.codebook = build_codebook(config)
            grouping = config.layout.grouping
            npp = grouping.ports_per_group
            m = config.constellation.order
            ports = np.repeat(
                np.arange(self.n).reshape(na, npp), m, axis=1
            )  # (Na, Np*M), 0-based
            syms = np.tile(config.constellation.points, (na, npp)) * scale
            self.metric = _SlotMetric(syms, ports)
        else:
            self.codebook = build_codebook(config)
            subsets = self.codebook.indices[:: config.constellation.order**na, :] - 1
            self.metric = _SubsetMetric(subsets, config.constellation.points * scale)

    def _faps_symbol_rows(self) -> np.ndarray:
        b2 = self.config.symbol_bits
        na = self.config.n_active
        labels = np.arange(self.n_labels, dtype=np.int64)
        shifts = (b2 * (na - 1 - np.arange(na)))[None, :]
        m = (labels[:, None] >> shifts) & ((1 << b2) - 1)
        return self.config.constellation.points[m] / math.sqrt(na)

    def chunk_decisions(
        self, rng: np.random.Generator, n_trials: int, n0: float | None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Simulate ``n_trials`` transmissions; return (sent, detected) labels.

        ``n0=None`` runs the noiseless validation path (no noise draws).
        """
        labels = rng.integers(0, self.n_labels, size=n_trials).astype(np.int64)
        g_re = rng.standard_normal((n_trials, self.nr, self.n))
        g_im = rng.standard_normal((n_trials, self.nr, self.n))
        h = (math.sqrt(0.5) * (g_re + 1j * g_im)) @ self.factor.sqrt_factor

        ports = None
        if self.config.scheme == "faps":
            norms = np.einsum("trn,trn->tn", h.conj(), h).real
            ranked = np.argsort(-norms, axis=1, kind="stable")[:, : self.config.n_active]
            ports = np.sort(ranked, axis=1)
            x = np.zeros((n_trials, self.n), dtype=complex)
            np.put_along_axis(x, ports, self.sym_rows[labels], axis=1)
        else:
            x = self.codebook.dense[labels]

        y = np.einsum("trn,tn->tr", h, x)
        if n0 is not None:
            w_re = rng.standard_normal((n_trials, self.nr))
            w_im = rng.standard_normal((n_trials, self.nr))
            y = y + math.sqrt(n0 / 2.0) * (w_re + 1j * w_im)

        z = np.einsum("tr,trn->tn", y.conj(), h)
        gram = np.einsum("tri,trj->tij", h.conj(), h)
        if isinstance(self.metric, _SlotMetric):
            detected = self.metric.detect(z, gram, ports)
        else:
            detected = self.metric.detect(z, gram)
        return labels, detected

    def chunk_errors(self, rng: np.random.Generator, n_trials: int, n0: float | None) -> int:
        """Bit error total over one chunk of transmissions."""
        labels, detected = self.chunk_decisions(rng, n_trials, n0)
        return int(_popcount(labels ^ detected).sum())


def _run_point(
    kernel: MonteCarloKernel,
    seed: int,
    snr_index: int,
    snr_db: float,
    min_errors: int,
    max_tx: int,
    noiseless: bool,
    executor: ThreadPoolExecutor | None,
) -> BerPoint:
    n0 = None if noiseless else 10.0 ** (-snr_db / 10.0)
    n_chunks = (max_tx + CHUNK_TRIALS - 1) // CHUNK_TRIALS

    def evaluate(chunk: int) -> int:
        trials = min(CHUNK_TRIALS, max_tx - chunk * CHUNK_TRIALS)
        return kernel.chunk_errors(_philox(seed, snr_index, chunk), trials, n0)

    errors_by_chunk: list[int] = []
    done = False
    wave_start = 0
    while not done and wave_start < n_chunks:
        wave = list(range(wave_start, min(wave_start + WAVE_CHUNKS, n_chunks)))
        if executor is None:
            results = [evaluate(c) for c in wave]
        else:
            results = list(executor.map(evaluate, wave))
        errors_by_chunk.extend(results)
        cumulative = 0
        for i, e in enumerate(errors_by_chunk):
            cumulative += e
            if cumulative >= min_errors:
                errors_by_chunk = errors_by_chunk[: i + 1]
                done = True
                break
        wave_start += len(wave)

    transmissions = min(len(errors_by_chunk) * CHUNK_TRIALS, max_tx)
    return BerPoint(
        snr_db=snr_db,
        transmissions=transmissions,
        bits=transmissions * kernel.bits,
        bit_errors=int(sum(errors_by_chunk)),
    )


def run_ber(config: RunConfig, kernel: MonteCarloKernel | None = None) -> BerCurve:
    """Run one BER-vs-SNR curve under the config's stopping rule.

    The result is bit-identical for any ``threads`` value.
    """
    if kernel is None:
        kernel = MonteCarloKernel(config.curve.to_scheme_config())
    executor = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        points = tuple(
            _run_point(
                kernel,
                config.seed,
                s,
                snr_db,
                config.min_errors,
                config.max_transmissions,
                config.threads,
                config.noiseless,
                executor,
            )
            for s, snr_db in enumerate(config.snr_db)
        )
    finally:
        if executor is not None:
            executor.shutdown()
    return BerCurve(
        name=config.curve.name,
        points=points,
        seed=config.seed,
        config_digest=config.digest(),
        bits_per_tx=kernel.bits,
    )


def snr_at_ber(curve: BerCurve, target: float) -> float | None:
    """SNR (dB) where the curve crosses ``target``, by log-linear
    interpolation between the first bracketing grid points; ``None`` when the
    target is not bracketed by positive-BER points."""
    if target <= 0:
        raise ValueError(f"target BER must be positive, got {target}")
    pts = curve.points
    for a, b in zip(pts, pts[1:]):
        if a.ber == target:
            return a.snr_db
        if a.ber > target and 0 < b.ber <= target:
            la, lb, lt = math.log10(a.ber), math.log10(b.ber), math.log10(target)
            frac = (la - lt) / (la - lb)
            return a.snr_db + frac * (b.snr_db - a.snr_db)
    if pts and pts[-1].ber == target:
        return pts[-1].snr_db
    return None


def run_comparison(
    configs: Sequence[RunConfig], targets: Sequence[float] = (1e-3, 1e-4)
) -> tuple[list[BerCurve], list[GainRow]]:
    """Run several curves sharing grid and seed; tabulate SNR gains of the
    first (reference) curve over the others at each target BER."""
    if len(configs) < 2:
        raise ConfigError("comparison needs at least two run configs")
    first = configs[0]
    for c in configs[1:]:
        if c.snr_db != first.snr_db or c.seed != first.seed:
            raise ConfigError("comparison configs must share the snr grid and seed")
    curves = [run_ber(c) for c in configs]
    gains: list[GainRow] = []
    ref = curves[0]
    for target in targets:
        ref_snr = snr_at_ber(ref, target)
        for curve in curves:
            snr = snr_at_ber(curve, target)
            ok = snr is not None and ref_snr is not None
            gains.append(
                GainRow(
                    target_ber=target,
                    name=curve.name,
                    snr_db=snr,
                    reference=ref.name,
                    reference_snr_db=ref_snr,
                    gain_db=(snr - ref_snr) if ok else None,
                    status="ok" if ok else "not_reached",
                )
            )
    return curves, gains
