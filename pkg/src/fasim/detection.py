"""AWGN transmission and exhaustive maximum-likelihood detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .modulation import Codebook, TransmitVector, int_to_bits

__all__ = [
    "NoiseSpec",
    "ReceivedSignal",
    "DetectionResult",
    "transmit",
    "ml_detect",
    "faps_select_ports",
]

_ML_BLOCK = 65536  # codewords per distance batch, bounds scratch memory


@dataclass(frozen=True)
class NoiseSpec:
    """Complex AWGN level: spectral density ``n0`` (linear, per receive antenna)."""

    n0: float

    def __post_init__(self) -> None:
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise ValueError(f"noise density must be positive, got {self.n0}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseSpec":
        """SNR in dB relative to the unit codebook-average symbol energy."""
        return cls(10.0 ** (-snr_db / 10.0))

    @property
    def snr_db(self) -> float:
        return -10.0 * math.log10(self.n0)


@dataclass(frozen=True)
class ReceivedSignal:
    """Length-``n_rx`` complex receive vector."""

    vector: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        y = np.asarray(self.vector, dtype=complex)
        if y.ndim != 1 or not np.all(np.isfinite(y)):
            raise ValueError("received signal must be a finite 1D complex vector")
        y.setflags(write=False)
        object.__setattr__(self, "vector", y)


@dataclass(frozen=True)
class DetectionResult:
    """ML decision: recovered label, its codeword parts, and the metric."""

    label: int
    bits: tuple[int, ...]
    indices: tuple[int, ...]
    symbols: np.ndarray
    metric: float


def transmit(
    x: TransmitVector,
    h: ChannelRealization,
    noise: NoiseSpec | None,
    rng: np.random.Generator | None = None,
) -> ReceivedSignal:
    """``y = H x + w`` with i.i.d. complex Gaussian noise of variance ``n0``.

    ``noise=None`` gives the noiseless output and draws nothing.  Otherwise
    consumes exactly ``2 * n_rx`` standard normals (real parts, then
    imaginary parts).
    """
    if x.dense.shape[0] != h.n_ports:
        raise ValueError(
            f"codeword length {x.dense.shape[0]} does not match channel ports {h.n_ports}"
        )
    y = h.matrix @ x.dense
    if noise is not None:
        if rng is None:
            raise ValueError("a random generator is required when noise is enabled")
        scale = math.sqrt(noise.n0 / 2.0)
        y = y + scale * (rng.standard_normal(h.n_rx) + 1j * rng.standard_normal(h.n_rx))
    return ReceivedSignal(y)


def ml_detect(y: ReceivedSignal, h: ChannelRealization, codebook: Codebook) -> DetectionResult:
    """Flat scan over the whole codebook for the minimum ``||y - Hx||^2``.

    Exact ties are broken toward the smallest bit label.
    """
    if len(codebook) == 0:
        raise ValueError("codebook is empty")
    if codebook.dense.shape[1] != h.n_ports:
        raise ValueError("codebook and channel dimensions do not match")
    yv = y.vector
    best_metric = np.inf
    best_label = -1
    for start in range(0, len(codebook), _ML_BLOCK):
        block = codebook.dense[start : start + _ML_BLOCK]
        d = yv[:, None] - h.matrix @ block.T
        metrics = np.einsum("rk,rk->k", d.conj(), d).real
        k = int(np.argmin(metrics))
        m = float(metrics[k])
        if m < best_metric:
            best_metric = m
            best_label = start + k
    label = best_label
    return DetectionResult(
        label,
        int_to_bits(label, codebook.bits_per_tx),
        tuple(int(i) for i in codebook.indices[label]),
        codebook.symbols[label].copy(),
        best_metric,
    )


def faps_select_ports(h: ChannelRealization, na: int) -> tuple[int, ...]:
    """The ``na`` ports with the largest channel column energies ``||h_n||^2``.

    Ties go to the smaller label; the winners are returned in ascending
    label order.
    """
    if not 1 <= na <= h.n_ports:
        raise ValueError(f"active count must satisfy 1 <= {na} <= {h.n_ports}")
    norms = np.einsum("rn,rn->n", h.matrix.conj(), h.matrix).real
    ranked = np.argsort(-norms, kind="stable")  # stable: equal norms keep label order
    return tuple(sorted(int(i) + 1 for i in ranked[:na]))
