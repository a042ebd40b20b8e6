"""Spatially correlated Rayleigh channel for a fluid-antenna transmitter.

The transmit-side correlation between two ports at distance ``d`` wavelengths
is ``sinc(2*pi*d)`` with ``sinc(z) = sin(z)/z`` (the rich-scattering 3D
model).  The receiver side is uncorrelated, so a realization is
``H = G @ sqrt(Lambda) @ U^H`` where ``U Lambda U^H`` eigendecomposes the
transmit correlation matrix and ``G`` has i.i.d. CN(0, 1) entries.  Path loss
is unity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PsdViolationError
from .geometry import PortLayout

__all__ = [
    "spatial_correlation",
    "CorrelationMatrix",
    "build_correlation_matrix",
    "SpectralFactor",
    "spectral_decompose",
    "ChannelRealization",
    "synthesize_channel",
]

# Eigenvalues in [-EIG_CLAMP, 0) are rounding noise and clamp to zero;
# anything below is a genuine PSD violation.
EIG_CLAMP = 1e-10

_SINC_MIN = -0.21723363  # global minimum of sin(z)/z, slightly padded


def _sinc_2pi(dist):
    """``sin(2*pi*d)/(2*pi*d)`` with exact zeros at half-integer ``d``.

    Separations within a few ulp of a half-integer number of wavelengths are
    snapped to an exact zero (the true value there is below 1e-15 anyway, and
    downstream checks rely on exact nulls at those spacings).
    """
    d = np.asarray(dist, dtype=float)
    two_d = 2.0 * d
    nearest = np.round(two_d)
    on_null = (np.abs(two_d - nearest) <= 8 * np.finfo(float).eps * np.maximum(1.0, two_d)) & (
        nearest != 0
    )
    out = np.sinc(np.where(on_null, 0.5, two_d))  # np.sinc(x) = sin(pi x)/(pi x)
    out = np.where(on_null, 0.0, out)
    out = np.where(d == 0.0, 1.0, out)
    return out


def spatial_correlation(ta, tb) -> float:
    """Correlation coefficient between two port positions (wavelength units)."""
    ta = np.asarray(ta, dtype=float)
    tb = np.asarray(tb, dtype=float)
    if not (np.all(np.isfinite(ta)) and np.all(np.isfinite(tb))):
        raise ValueError("port positions must be finite")
    return float(_sinc_2pi(np.linalg.norm(ta - tb)))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Transmit-side correlation matrix: real symmetric, unit diagonal."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        j = np.asarray(self.entries, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError(f"correlation matrix must be square, got {j.shape}")
        if not np.array_equal(j, j.T):
            raise ValueError("correlation matrix must be symmetric")
        if not np.all(np.diag(j) == 1.0):
            raise ValueError("correlation matrix must have a unit diagonal")
        if j.min() < _SINC_MIN - 1e-12 or j.max() > 1.0 + 1e-12:
            raise ValueError("correlation entries outside the sinc-kernel range")
        j.setflags(write=False)
        object.__setattr__(self, "entries", j)

    @property
    def n_ports(self) -> int:
        return self.entries.shape[0]


def build_correlation_matrix(layout: PortLayout) -> CorrelationMatrix:
    """Correlation matrix of all port pairs under the layout's labeling."""
    pos = layout.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    j = _sinc_2pi(dist)
    j = 0.5 * (j + j.T)  # exact symmetry despite any rounding asymmetry
    np.fill_diagonal(j, 1.0)
    return CorrelationMatrix(j)


@dataclass(frozen=True)
class SpectralFactor:
    """Eigendecomposition of a correlation matrix, ready for synthesis.

    ``sqrt_factor = diag(sqrt(eigenvalues)) @ eigenvectors.T`` is the matrix
    right-multiplied onto the i.i.d. block when drawing realizations.
    Eigenvalues are sorted descending and clamped to be nonnegative.
    """

    eigenvectors: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    sqrt_factor: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ("eigenvectors", "eigenvalues", "sqrt_factor"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_ports(self) -> int:
        return self.eigenvalues.shape[0]


def spectral_decompose(jt: CorrelationMatrix) -> SpectralFactor:
    """Eigendecompose ``jt``; raise :class:`PsdViolationError` if any
    eigenvalue falls below ``-1e-10``."""
    w, u = np.linalg.eigh(jt.entries)
    if w.min() < -EIG_CLAMP:
        raise PsdViolationError(
            f"correlation matrix is not PSD: min eigenvalue {w.min():.3e}"
        )
    w = np.clip(w, 0.0, None)
    order = np.argsort(w)[::-1]
    w = w[order]
    u = u[:, order]
    factor = np.sqrt(w)[:, None] * u.T
    recon = (u * w) @ u.T
    n = jt.n_ports
    if np.linalg.norm(recon - jt.entries) > 1e-8 * n:
        raise PsdViolationError("eigendecomposition failed to reconstruct the input")
    return SpectralFactor(u, w, factor)


@dataclass(frozen=True)
class ChannelRealization:
    """One fading realization: ``n_rx x n_ports`` complex matrix."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        h = np.asarray(self.matrix, dtype=complex)
        if h.ndim != 2:
            raise ValueError("channel matrix must be 2D")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel matrix entries must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "matrix", h)

    @property
    def n_rx(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_ports(self) -> int:
        return self.matrix.shape[1]


def synthesize_channel(
    factor: SpectralFactor, nr: int, rng: np.random.Generator
) -> ChannelRealization:
    """Draw one correlated realization with ``nr`` receive antennas.

    Consumes exactly ``2 * nr * n_ports`` standard normals from ``rng``: the
    real parts of the i.i.d. block first, then the imaginary parts.  Rows of
    the result are i.i.d. with covariance equal to the decomposed matrix.
    """
    if nr < 1:
        raise ValueError(f"receive antenna count must be >= 1, got {nr}")
    n = factor.n_ports
    re = rng.standard_normal((nr, n))
    im = rng.standard_normal((nr, n))
    g = np.sqrt(0.5) * (re + 1j * im)
    return ChannelRealization(g @ factor.sqrt_factor)
