"""Square detector array and the circle-packing counts used by scan bounds."""
from dataclasses import dataclass
import math

import numpy as np

from ._num import robust_ceil, robust_floor


@dataclass(frozen=True)
class ArrayGeometry:
    """An ``N x N`` array of congruent square cells tiling an ``L x L`` square.

    Parameters
    ----------
    cells_per_side : int
        N, so the array holds ``M = N**2`` detectors.
    side_length : float
        Side L of the whole array in meters.
    center : tuple of float
        Array centre in meters.
    """

    cells_per_side: int
    side_length: float = 2.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if int(self.cells_per_side) != self.cells_per_side or self.cells_per_side < 1:
            raise ValueError("cells_per_side must be a positive integer")
        if not self.side_length > 0:
            raise ValueError("side_length must be positive")
        object.__setattr__(self, "cells_per_side", int(self.cells_per_side))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def n_cells(self):
        return self.cells_per_side ** 2

    @property
    def area(self):
        return self.side_length ** 2

    @property
    def cell_width(self):
        return self.side_length / self.cells_per_side

    @property
    def cell_area(self):
        return self.cell_width ** 2

    def bounds(self):
        """Arrays ``(lx, ux, ly, uy)`` of length M in row-major order from the lower left."""
        n = self.cells_per_side
        half = 0.5 * self.side_length
        # edges from index arithmetic so shared edges are bit-identical
        edges = np.arange(n + 1) * self.cell_width - half
        edges[-1] = half
        ex = edges + self.center[0]
        ey = edges + self.center[1]
        col = np.tile(np.arange(n), n)
        row = np.repeat(np.arange(n), n)
        return ex[col], ex[col + 1], ey[row], ey[row + 1]


def cell_bounds(geom, m):
    """Rectangle ``(lx, ux, ly, uy)`` of cell ``m`` (row-major from the lower left)."""
    if not 0 <= m < geom.n_cells:
        raise IndexError(f"cell index {m} out of range for {geom.n_cells} cells")
    lx, ux, ly, uy = geom.bounds()
    return float(lx[m]), float(ux[m]), float(ly[m]), float(uy[m])


@dataclass(frozen=True)
class PackingCounts:
    """Footprint counts over the array at one beam radius.

    ``full_overlap_floor`` is clamped to at least 1; ``valid`` is False when
    clamping happened, and scan-level bounds refuse to use such counts.
    """

    n0: int
    n1: int
    full_overlap_floor: int
    valid: bool = True


def packing_counts(geom, rho):
    """Square-packing floor ``N0``, hexagonal ceiling ``N1`` and ``floor(N0 - L/rho)``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    area = geom.area
    n0 = robust_floor(area / (4.0 * rho * rho))
    n1 = robust_ceil(area * math.sqrt(3.0) / (6.0 * rho * rho))
    raw = robust_floor(n0 - geom.side_length / rho)
    return PackingCounts(n0=n0, n1=n1, full_overlap_floor=max(raw, 1), valid=raw >= 1)
