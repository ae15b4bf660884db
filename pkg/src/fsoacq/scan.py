"""Archimedean spiral scan plan, dwell time and step count."""
from dataclasses import dataclass
import io

import numpy as np

from . import kernels
from ._num import robust_ceil
from .beam import LIGHT_SPEED


@dataclass(frozen=True, eq=False)
class ScanPlan:
    """Spiral ``r = b * theta`` sampled at uniform arc-length steps.

    Attributes
    ----------
    spacing_b : float
        Spiral coefficient ``b`` in meters per radian; successive turns are
        ``2 pi b`` apart (see ``turn_spacing``).
    step_length : float
        Arc length between consecutive points, meters.
    r, theta : ndarray
        Polar coordinates of the points, starting at the centre.
    """

    spacing_b: float
    step_length: float
    uncertainty_radius: float
    dwell_time: float
    receiver_processing: float
    link_distance: float
    r: np.ndarray
    theta: np.ndarray

    @property
    def n_points(self):
        return self.r.size

    @property
    def turn_spacing(self):
        return 2.0 * np.pi * self.spacing_b

    @property
    def xy(self):
        return self.r * np.cos(self.theta), self.r * np.sin(self.theta)

    @property
    def scan_time(self):
        return self.n_points * self.dwell_time

    def to_csv(self):
        x, y = self.xy
        buf = io.StringIO()
        buf.write("n,r_m,theta_rad,x_m,y_m\r\n")
        for i in range(self.n_points):
            buf.write(f"{i},{self.r[i]:.17g},{self.theta[i]:.17g},{x[i]:.17g},{y[i]:.17g}\r\n")
        return buf.getvalue()


def steps_per_scan(Ru, rho):
    """Area-ratio step count ``ceil(Ru**2 / rho**2)``."""
    if not (Ru > 0 and rho > 0):
        raise ValueError("Ru and rho must be positive")
    return robust_ceil(Ru * Ru / (rho * rho))


def dwell_time(Tr, R, T_obs=None):
    """Per-step dwell ``Tr + R / c``; ``Tr`` must exceed the observation window."""
    if not Tr > 0:
        raise ValueError("receiver processing time must be positive")
    if R < 0:
        raise ValueError("link distance must be non-negative")
    if T_obs is not None and not Tr > T_obs:
        raise ValueError("receiver processing time must exceed the observation window")
    return Tr + R / LIGHT_SPEED


def build_spiral(Ru, rho, overlap=0.5, Tr=1e-3, R=0.0, T_obs=None):
    """Spiral plan covering a disc of radius ``Ru`` with beam radius ``rho``.

    The ring gap and the step length are both ``2 rho (1 - overlap)``, i.e.
    ``overlap`` is the fractional footprint-diameter overlap between
    neighbours. ``overlap=0.5`` (gap = rho) covers the disc; ``overlap=0``
    lays footprints edge to edge as in square packing.
    """
    if not (rho > 0 and Ru > rho):
        raise ValueError("uncertainty region smaller than beam")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    gap = 2.0 * rho * (1.0 - overlap)
    b = gap / (2.0 * np.pi)
    theta = kernels.spiral_angles(b, gap, Ru)
    return ScanPlan(
        spacing_b=b,
        step_length=gap,
        uncertainty_radius=Ru,
        dwell_time=dwell_time(Tr, R, T_obs),
        receiver_processing=Tr,
        link_distance=R,
        r=b * theta,
        theta=theta,
    )
