"""Fluid-antenna surface geometry: port grid, block grouping, label maps.

A rectangular surface of ``w1 x w2`` wavelengths carries ``n1 x n2`` ports at
the grid corners, spaced ``w1/n1`` (vertical) and ``w2/n2`` (horizontal)
wavelengths apart with the reference port at ``[0, 0]``.  All distances are
stored in wavelength units; no carrier frequency appears anywhere.

Two labelings of the same physical grid are supported:

* ``raster`` -- column-major over the whole grid (top to bottom, then left
  to right); used by ungrouped schemes.
* ``grouped`` -- the grid is partitioned into ``na1 x na2`` contiguous
  rectangular blocks; blocks are labeled column-major, ports within a block
  are labeled column-major, and the global label is
  ``n = (g - 1) * n_per_group + k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SurfaceSpec",
    "GroupingSpec",
    "PortLayout",
    "group_label",
    "group_location",
    "port_label_in_group",
    "port_location_in_group",
    "global_label",
    "split_global_label",
    "port_position",
]


@dataclass(frozen=True)
class SurfaceSpec:
    """Physical port grid: side lengths in wavelengths and port counts.

    ``w1``/``n1`` run along the vertical direction, ``w2``/``n2`` along the
    horizontal direction.
    """

    w1: float
    w2: float
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n1, int) and isinstance(self.n2, int)):
            raise ValueError("port counts n1, n2 must be integers")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError(f"port counts must be >= 1, got {self.n1}x{self.n2}")
        if not (self.w1 > 0 and self.w2 > 0 and np.isfinite(self.w1) and np.isfinite(self.w2)):
            raise ValueError(f"surface lengths must be positive, got {self.w1}x{self.w2}")

    @property
    def n_ports(self) -> int:
        return self.n1 * self.n2

    @property
    def spacing(self) -> tuple[float, float]:
        """Adjacent-port spacing (vertical, horizontal) in wavelengths."""
        return self.w1 / self.n1, self.w2 / self.n2


@dataclass(frozen=True)
class GroupingSpec:
    """Block-grouping shape: group counts and per-group port counts.

    ``na1 x na2`` groups tile the grid; each group holds ``np1 x np2`` ports.
    The per-group port count must be a power of two so that the per-group
    index-bit budget is an integer.
    """

    na1: int
    na2: int
    np1: int
    np2: int

    def __post_init__(self) -> None:
        for name in ("na1", "na2", "np1", "np2"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        npp = self.np1 * self.np2
        if npp & (npp - 1):
            raise ValueError(f"ports per group must be a power of 2, got {npp}")

    @classmethod
    def for_surface(cls, surface: SurfaceSpec, na1: int, na2: int) -> "GroupingSpec":
        """Build a grouping of ``na1 x na2`` blocks over ``surface``."""
        if not (isinstance(na1, int) and isinstance(na2, int)) or na1 < 1 or na2 < 1:
            raise ValueError(f"group counts must be positive integers, got {na1}x{na2}")
        if surface.n1 % na1 or surface.n2 % na2:
            raise ValueError(
                f"group counts {na1}x{na2} must divide port counts "
                f"{surface.n1}x{surface.n2}"
            )
        return cls(na1, na2, surface.n1 // na1, surface.n2 // na2)

    @property
    def n_groups(self) -> int:
        return self.na1 * self.na2

    @property
    def ports_per_group(self) -> int:
        return self.np1 * self.np2

    @property
    def index_bits_per_group(self) -> int:
        return (self.ports_per_group - 1).bit_length()


def group_label(a1: int, a2: int, grouping: GroupingSpec) -> int:
    """Label of the group in row ``a1``, column ``a2`` (column-major, 1-based)."""
    if not (1 <= a1 <= grouping.na1 and 1 <= a2 <= grouping.na2):
        raise ValueError(f"group location ({a1}, {a2}) outside {grouping.na1}x{grouping.na2} grid")
    return (a2 - 1) * grouping.na1 + a1


def group_location(g: int, grouping: GroupingSpec) -> tuple[int, int]:
    """Inverse of :func:`group_label`: group label -> (row, column)."""
    if not 1 <= g <= grouping.n_groups:
        raise ValueError(f"group label {g} outside 1..{grouping.n_groups}")
    return (g - 1) % grouping.na1 + 1, (g - 1) // grouping.na1 + 1


def port_label_in_group(p1: int, p2: int, grouping: GroupingSpec) -> int:
    """Within-group label of the port in row ``p1``, column ``p2`` of its block."""
    if not (1 <= p1 <= grouping.np1 and 1 <= p2 <= grouping.np2):
        raise ValueError(f"port location ({p1}, {p2}) outside {grouping.np1}x{grouping.np2} block")
    return (p2 - 1) * grouping.np1 + p1


def port_location_in_group(k: int, grouping: GroupingSpec) -> tuple[int, int]:
    """Inverse of :func:`port_label_in_group`."""
    if not 1 <= k <= grouping.ports_per_group:
        raise ValueError(f"within-group label {k} outside 1..{grouping.ports_per_group}")
    return (k - 1) % grouping.np1 + 1, (k - 1) // grouping.np1 + 1


def global_label(g: int, k: int, grouping: GroupingSpec) -> int:
    """Global port label of the ``k``-th port in the ``g``-th group."""
    if not 1 <= g <= grouping.n_groups:
        raise ValueError(f"group label {g} outside 1..{grouping.n_groups}")
    if not 1 <= k <= grouping.ports_per_group:
        raise ValueError(f"within-group label {k} outside 1..{grouping.ports_per_group}")
    return (g - 1) * grouping.ports_per_group + k


def split_global_label(n: int, grouping: GroupingSpec) -> tuple[int, int]:
    """Inverse of :func:`global_label`: global label -> (group, within-group)."""
    total = grouping.n_groups * grouping.ports_per_group
    if not 1 <= n <= total:
        raise ValueError(f"global label {n} outside 1..{total}")
    npp = grouping.ports_per_group
    return (n - 1) // npp + 1, (n - 1) % npp + 1


def _grouped_position(n: int, surface: SurfaceSpec, grouping: GroupingSpec) -> tuple[float, float]:
    g, k = split_global_label(n, grouping)
    a1, a2 = group_location(g, grouping)
    p1, p2 = port_location_in_group(k, grouping)
    s1, s2 = surface.spacing
    return (
        (a1 - 1) * (surface.w1 / grouping.na1) + (p1 - 1) * s1,
        (a2 - 1) * (surface.w2 / grouping.na2) + (p2 - 1) * s2,
    )


def _raster_position(n: int, surface: SurfaceSpec) -> tuple[float, float]:
    if not 1 <= n <= surface.n_ports:
        raise ValueError(f"global label {n} outside 1..{surface.n_ports}")
    r = (n - 1) % surface.n1 + 1
    c = (n - 1) // surface.n1 + 1
    s1, s2 = surface.spacing
    return (r - 1) * s1, (c - 1) * s2


@dataclass(frozen=True)
class PortLayout:
    """Port labeling plus the label -> position map for one surface.

    ``positions[n - 1]`` is the 2D coordinate (wavelengths) of global label
    ``n``.  Instances are immutable; the position array is read-only.
    """

    surface: SurfaceSpec
    grouping: GroupingSpec
    order: str
    positions: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.order not in ("grouped", "raster"):
            raise ValueError(f"unknown port order {self.order!r}")
        if self.grouping.na1 * self.grouping.np1 != self.surface.n1 or (
            self.grouping.na2 * self.grouping.np2 != self.surface.n2
        ):
            raise ValueError("grouping shape does not tile the surface grid")
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (self.surface.n_ports, 2):
            raise ValueError(f"positions must have shape ({self.surface.n_ports}, 2)")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def grouped(cls, surface: SurfaceSpec, grouping: GroupingSpec) -> "PortLayout":
        """Layout with block-grouped labeling."""
        pos = np.array(
            [_grouped_position(n, surface, grouping) for n in range(1, surface.n_ports + 1)]
        )
        return cls(surface, grouping, "grouped", pos)

    @classmethod
    def raster(cls, surface: SurfaceSpec) -> "PortLayout":
        """Layout with column-major raster labeling (grouping degenerates to
        one port per group)."""
        grouping = GroupingSpec(surface.n1, surface.n2, 1, 1)
        pos = np.array([_raster_position(n, surface) for n in range(1, surface.n_ports + 1)])
        return cls(surface, grouping, "raster", pos)

    @property
    def n_ports(self) -> int:
        return self.surface.n_ports

    def group_of(self, n: int) -> tuple[int, int]:
        """(group label, within-group label) of global port ``n``.

        For raster layouts the block containing the port is located from its
        grid coordinates, so the pair is meaningful under either order.
        """
        if self.order == "grouped":
            return split_global_label(n, self.grouping)
        if not 1 <= n <= self.n_ports:
            raise ValueError(f"global label {n} outside 1..{self.n_ports}")
        r = (n - 1) % self.surface.n1 + 1
        c = (n - 1) // self.surface.n1 + 1
        a1, p1 = divmod(r - 1, self.grouping.np1)
        a2, p2 = divmod(c - 1, self.grouping.np2)
        g = group_label(a1 + 1, a2 + 1, self.grouping)
        k = port_label_in_group(p1 + 1, p2 + 1, self.grouping)
        return g, k


def port_position(n: int, layout: PortLayout) -> np.ndarray:
    """Position (wavelengths) of global port label ``n`` under the layout's order."""
    if not 1 <= n <= layout.n_ports:
        raise ValueError(f"global label {n} outside 1..{layout.n_ports}")
    return layout.positions[n - 1].copy()
