"""Bit-to-transmit-vector mapping for the three schemes.

* ``fagim`` -- grouped index modulation: the bit block of each port group
  selects one port inside that group (natural binary) and one constellation
  symbol (Gray).
* ``faim``  -- ungrouped index modulation: a single index block selects one
  of the first ``2**b`` size-``n_active`` port subsets in lexicographic
  (combinadic) order; the rest of the bits carry symbols.
* ``faps``  -- port selection: no index bits; symbols ride on externally
  chosen ports.

Every codeword is scaled by ``1/sqrt(n_active)`` so that with unit-energy
constellations the codebook-average energy is exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, EnumerationCapError
from .geometry import PortLayout

__all__ = [
    "Constellation",
    "SchemeConfig",
    "TransmitVector",
    "Codebook",
    "rate_fagim",
    "rate_faim",
    "rate_faps",
    "fagim_encode",
    "faim_encode",
    "faps_encode",
    "build_codebook",
    "unrank_subset",
    "rank_subset",
    "bits_to_int",
    "int_to_bits",
]

ENUMERATION_CAP_BITS = 20  # build_codebook refuses above 2**20 entries

SCHEMES = ("fagim", "faim", "faps")


def _is_pow2(v: int) -> bool:
    return v >= 1 and v & (v - 1) == 0


def bits_to_int(bits: Sequence[int]) -> int:
    """MSB-first bit sequence -> integer."""
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    """Integer -> MSB-first bit tuple of the given width."""
    if value < 0 or value >> width:
        raise ValueError(f"value {value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _gray_to_index(g: int) -> int:
    i = 0
    while g:
        i ^= g
        g >>= 1
    return i


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy constellation, indexed by MSB-first bit label."""

    order: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=complex)
        if pts.shape != (self.order,):
            raise ValueError("point count must equal the constellation order")
        if abs(np.mean(np.abs(pts) ** 2) - 1.0) > 1e-12:
            raise ValueError("constellation must have unit average energy")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @classmethod
    def bpsk(cls) -> "Constellation":
        return cls(2, np.array([1.0 + 0j, -1.0 + 0j]))

    @classmethod
    def square_qam(cls, order: int) -> "Constellation":
        """Gray-labeled square QAM; first half of the bits picks the real
        rail, second half the imaginary rail."""
        if not _is_pow2(order) or order < 4:
            raise ConfigError(f"QAM order must be a power of 2 >= 4, got {order}")
        m = order.bit_length() - 1
        if m % 2:
            raise ConfigError(f"only square QAM is supported, got order {order}")
        side = 1 << (m // 2)
        # rail level for a Gray-coded half-label
        levels = np.empty(side)
        for g in range(side):
            levels[g] = 2 * _gray_to_index(g) - (side - 1)
        scale = math.sqrt(2.0 * (side * side - 1) / 3.0)
        labels = np.arange(order)
        re = levels[labels >> (m // 2)]
        im = levels[labels & (side - 1)]
        return cls(order, (re + 1j * im) / scale)

    @classmethod
    def from_order(cls, order: int) -> "Constellation":
        return cls.bpsk() if order == 2 else cls.square_qam(order)


def rate_fagim(n: int, na: int, m: int) -> int:
    """Bits per transmission for the grouped scheme: ``na*(log2(n/na)+log2 m)``."""
    if na < 1 or n % na:
        raise ConfigError(f"active count {na} must divide port count {n}")
    per_group = n // na
    if not _is_pow2(per_group):
        raise ConfigError(f"ports per group must be a power of 2, got {per_group}")
    if not _is_pow2(m) or m < 2:
        raise ConfigError(f"constellation order must be a power of 2 >= 2, got {m}")
    return na * ((per_group.bit_length() - 1) + (m.bit_length() - 1))


def rate_faim(n: int, na: int, m: int) -> int:
    """Bits per transmission for the ungrouped scheme:
    ``floor(log2 C(n, na)) + na*log2 m``."""
    if not 1 <= na <= n:
        raise ConfigError(f"active count must satisfy 1 <= {na} <= {n}")
    if not _is_pow2(m) or m < 2:
        raise ConfigError(f"constellation order must be a power of 2 >= 2, got {m}")
    return math.comb(n, na).bit_length() - 1 + na * (m.bit_length() - 1)


def rate_faps(na: int, m: int) -> int:
    """Bits per transmission for port selection: ``na*log2 m``."""
    if na < 1:
        raise ConfigError(f"active count must be >= 1, got {na}")
    if not _is_pow2(m) or m < 2:
        raise ConfigError(f"constellation order must be a power of 2 >= 2, got {m}")
    return na * (m.bit_length() - 1)


def rank_subset(subset: Sequence[int], n: int) -> int:
    """Lexicographic rank of an ascending k-subset of {1..n} (0-based rank)."""
    k = len(subset)
    rank = 0
    prev = 0
    for pos, v in enumerate(subset):
        if not prev < v <= n:
            raise ValueError(f"subset must be ascending within 1..{n}")
        for u in range(prev + 1, v):
            rank += math.comb(n - u, k - pos - 1)
        prev = v
    return rank


def unrank_subset(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The ``rank``-th (0-based) ascending k-subset of {1..n} in
    lexicographic order."""
    if not 0 <= rank < math.comb(n, k):
        raise ValueError(f"rank {rank} outside 0..C({n},{k})-1")
    out = []
    v = 1
    for pos in range(k):
        while True:
            block = math.comb(n - v, k - pos - 1)
            if rank < block:
                out.append(v)
                v += 1
                break
            rank -= block
            v += 1
    return tuple(out)


@dataclass(frozen=True)
class SchemeConfig:
    """A fully specified transmission scheme over one port layout."""

    scheme: str
    layout: PortLayout
    n_active: int
    constellation: Constellation
    n_rx: int

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.n_rx < 1:
            raise ConfigError(f"receive antenna count must be >= 1, got {self.n_rx}")
        n = self.layout.n_ports
        if self.scheme == "fagim":
            if self.layout.order != "grouped":
                raise ConfigError("fagim requires a grouped port layout")
            if self.n_active != self.layout.grouping.n_groups:
                raise ConfigError(
                    f"fagim active count {self.n_active} must equal the group count "
                    f"{self.layout.grouping.n_groups}"
                )
        else:
            if self.layout.order != "raster":
                raise ConfigError(f"{self.scheme} requires a raster port layout")
            if not 1 <= self.n_active <= n:
                raise ConfigError(f"active count must satisfy 1 <= {self.n_active} <= {n}")
            if self.scheme == "faim" and math.comb(n, self.n_active).bit_length() - 1 < 1:
                raise ConfigError("faim needs at least one index bit")

    @property
    def n_ports(self) -> int:
        return self.layout.n_ports

    @property
    def symbol_bits(self) -> int:
        return self.constellation.bits_per_symbol

    @property
    def index_bits(self) -> int:
        """Total index bits per transmission."""
        if self.scheme == "fagim":
            return self.n_active * self.layout.grouping.index_bits_per_group
        if self.scheme == "faim":
            return math.comb(self.n_ports, self.n_active).bit_length() - 1
        return 0

    @property
    def bits_per_tx(self) -> int:
        return self.index_bits + self.n_active * self.symbol_bits


@dataclass(frozen=True)
class TransmitVector:
    """Activated ports, their symbols, and the dense length-N codeword."""

    indices: tuple[int, ...]
    symbols: np.ndarray = field(repr=False)
    dense: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        sym = np.asarray(self.symbols, dtype=complex)
        den = np.asarray(self.dense, dtype=complex)
        sym.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "symbols", sym)
        object.__setattr__(self, "dense", den)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.dense) ** 2))


def _assemble(indices: Sequence[int], symbols: Sequence[complex], n: int) -> TransmitVector:
    na = len(indices)
    dense = np.zeros(n, dtype=complex)
    scale = 1.0 / math.sqrt(na)
    for i, s in zip(indices, symbols):
        dense[i - 1] = scale * s
    return TransmitVector(tuple(indices), np.asarray(symbols, dtype=complex), dense)


def _check_bits(bits: Sequence[int], expected: int, scheme: str) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if len(bits) != expected:
        raise ValueError(f"{scheme} expects {expected} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    return bits


def fagim_encode(bits: Sequence[int], config: SchemeConfig) -> TransmitVector:
    """Encode one grouped-scheme bit block.

    The label splits into ``n_active`` consecutive per-group blocks; in each,
    the leading index bits (natural binary, MSB first) pick the within-group
    port and the remaining bits Gray-map to the group's symbol.
    """
    if config.scheme != "fagim":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    bits = _check_bits(bits, config.bits_per_tx, "fagim")
    grouping = config.layout.grouping
    b1 = grouping.index_bits_per_group
    b2 = config.symbol_bits
    per = b1 + b2
    indices = []
    symbols = []
    for g in range(1, config.n_active + 1):
        block = bits[(g - 1) * per : g * per]
        k = bits_to_int(block[:b1]) + 1
        indices.append((g - 1) * grouping.ports_per_group + k)
        symbols.append(config.constellation.points[bits_to_int(block[b1:])])
    return _assemble(indices, symbols, config.n_ports)


def faim_encode(bits: Sequence[int], config: SchemeConfig) -> TransmitVector:
    """Encode one ungrouped-scheme bit block.

    The leading index block is an integer rank into the lexicographic
    enumeration of active-port subsets (raster labels); symbol blocks map to
    the activated ports in ascending label order.
    """
    if config.scheme != "faim":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    bits = _check_bits(bits, config.bits_per_tx, "faim")
    b1 = config.index_bits
    b2 = config.symbol_bits
    subset = unrank_subset(bits_to_int(bits[:b1]), config.n_ports, config.n_active)
    symbols = [
        config.constellation.points[bits_to_int(bits[b1 + a * b2 : b1 + (a + 1) * b2])]
        for a in range(config.n_active)
    ]
    return _assemble(subset, symbols, config.n_ports)


def faps_encode(
    bits: Sequence[int], selected: Sequence[int], config: SchemeConfig
) -> TransmitVector:
    """Encode one port-selection bit block onto externally chosen ports.

    All bits are symbol bits; symbols map to the selected ports in ascending
    label order.
    """
    if config.scheme != "faps":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    bits = _check_bits(bits, config.bits_per_tx, "faps")
    ports = tuple(sorted(int(p) for p in selected))
    if len(ports) != config.n_active:
        raise ValueError(f"expected {config.n_active} selected ports, got {len(ports)}")
    if len(set(ports)) != len(ports):
        raise ValueError("selected ports must be distinct")
    if ports[0] < 1 or ports[-1] > config.n_ports:
        raise ValueError(f"selected ports outside 1..{config.n_ports}")
    b2 = config.symbol_bits
    symbols = [
        config.constellation.points[bits_to_int(bits[a * b2 : (a + 1) * b2])]
        for a in range(config.n_active)
    ]
    return _assemble(ports, symbols, config.n_ports)


def encode(bits: Sequence[int], config: SchemeConfig, selected=None) -> TransmitVector:
    """Scheme-dispatching encoder."""
    if config.scheme == "fagim":
        return fagim_encode(bits, config)
    if config.scheme == "faim":
        return faim_encode(bits, config)
    if selected is None:
        raise ValueError("faps encoding needs the selected ports")
    return faps_encode(bits, selected, config)


@dataclass(frozen=True)
class Codebook:
    """The full transmit alphabet, ordered by ascending bit label.

    ``indices[k]``/``symbols[k]`` hold the activated 1-based port labels and
    their symbols for label ``k``; ``dense[k]`` is the scaled length-N
    codeword.  Shared by the encoder, the ML detector, and the bound
    evaluator.
    """

    config: SchemeConfig
    indices: np.ndarray = field(repr=False)
    symbols: np.ndarray = field(repr=False)
    dense: np.ndarray = field(repr=False)
    selected: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("indices", "symbols", "dense"):
            a = np.asarray(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return self.dense.shape[0]

    @property
    def bits_per_tx(self) -> int:
        return self.config.bits_per_tx

    def vector(self, label: int) -> TransmitVector:
        """The transmit vector of one bit label."""
        if not 0 <= label < len(self):
            raise ValueError(f"label {label} outside 0..{len(self) - 1}")
        return TransmitVector(
            tuple(int(i) for i in self.indices[label]),
            self.symbols[label].copy(),
            self.dense[label].copy(),
        )

    def entries(self) -> Iterator[tuple[tuple[int, ...], TransmitVector]]:
        """Iterate ``(bit tuple, transmit vector)`` in ascending label order."""
        width = self.bits_per_tx
        for label in range(len(self)):
            yield int_to_bits(label, width), self.vector(label)


def _fagim_tables(config: SchemeConfig, labels: np.ndarray):
    grouping = config.layout.grouping
    b1 = grouping.index_bits_per_group
    b2 = config.symbol_bits
    per = b1 + b2
    na = config.n_active
    npp = grouping.ports_per_group
    shifts = (per * (na - 1 - np.arange(na)))[None, :]
    blocks = (labels[:, None] >> shifts) & ((1 << per) - 1)
    v = blocks >> b2
    m = blocks & ((1 << b2) - 1)
    ports = np.arange(na)[None, :] * npp + v + 1
    return ports, config.constellation.points[m]


def _faim_tables(config: SchemeConfig, labels: np.ndarray):
    b1 = config.index_bits
    b2 = config.symbol_bits
    na = config.n_active
    subsets = np.array(
        [unrank_subset(r, config.n_ports, na) for r in range(1 << b1)], dtype=np.int64
    )
    ranks = labels >> (na * b2)
    shifts = (b2 * (na - 1 - np.arange(na)))[None, :]
    m = (labels[:, None] >> shifts) & ((1 << b2) - 1)
    return subsets[ranks], config.constellation.points[m]


def _faps_tables(config: SchemeConfig, labels: np.ndarray, selected):
    b2 = config.symbol_bits
    na = config.n_active
    ports = np.tile(np.sort(np.asarray(selected, dtype=np.int64)), (labels.shape[0], 1))
    shifts = (b2 * (na - 1 - np.arange(na)))[None, :]
    m = (labels[:, None] >> shifts) & ((1 << b2) - 1)
    return ports, config.constellation.points[m]


def build_codebook(config: SchemeConfig, selected: Sequence[int] | None = None) -> Codebook:
    """Enumerate all ``2**B`` codewords in ascending bit-label order.

    Raises :class:`EnumerationCapError` above ``2**20`` entries and checks
    label-to-codeword injectivity.
    """
    b = config.bits_per_tx
    if b > ENUMERATION_CAP_BITS:
        raise EnumerationCapError(
            f"codebook would have 2**{b} entries; cap is 2**{ENUMERATION_CAP_BITS}"
        )
    labels = np.arange(1 << b, dtype=np.int64)
    if config.scheme == "fagim":
        ports, symbols = _fagim_tables(config, labels)
    elif config.scheme == "faim":
        ports, symbols = _faim_tables(config, labels)
    else:
        if selected is None:
            raise ConfigError("faps codebook needs the selected ports")
        sel = tuple(sorted(int(p) for p in selected))
        if len(sel) != config.n_active or len(set(sel)) != len(sel):
            raise ConfigError(f"need {config.n_active} distinct selected ports")
        if sel[0] < 1 or sel[-1] > config.n_ports:
            raise ConfigError(f"selected ports outside 1..{config.n_ports}")
        ports, symbols = _faps_tables(config, labels, sel)
        selected = sel
    dense = np.zeros((labels.shape[0], config.n_ports), dtype=complex)
    np.put_along_axis(
        dense, ports - 1, symbols / math.sqrt(config.n_active), axis=1
    )
    if np.unique(dense, axis=0).shape[0] != dense.shape[0]:
        raise ConfigError("codebook is not injective: duplicate codewords found")
    return Codebook(config, ports, symbols, dense, selected)
