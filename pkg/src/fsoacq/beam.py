"""Gaussian beam footprint, per-cell flux and photon counts."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import ndtr

PLANCK = 6.62607004e-34
LIGHT_SPEED = 3e8


@dataclass(frozen=True)
class BeamParams:
    """Gaussian beam at the receiver plane.

    The beam is parameterized by its total received power, so the peak
    intensity ``S / (2 pi rho**2)`` follows the radius and the plane
    integral stays at ``S``.

    Parameters
    ----------
    power : float
        Total signal power S in watts.
    rho : float
        Beam radius in meters.
    x0, y0 : float
        Beam centre in meters.
    """

    power: float
    rho: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if not self.power >= 0:
            raise ValueError("signal power must be non-negative")
        if not self.rho > 0:
            raise ValueError("beam radius must be positive")

    @property
    def peak_intensity(self):
        return self.power / (2.0 * math.pi * self.rho ** 2)

    def intensity(self, x, y):
        r2 = (np.asarray(x) - self.x0) ** 2 + (np.asarray(y) - self.y0) ** 2
        return self.peak_intensity * np.exp(-r2 / (2.0 * self.rho ** 2))


@dataclass(frozen=True)
class ChannelParams:
    """Background light and photon conversion.

    Parameters
    ----------
    noise_intensity : float
        Uniform noise intensity in W/m^2.
    eta : float
        Photoconversion efficiency in (0, 1].
    wavelength : float
        Meters.
    pulse_duration : float
        Observation window T_p in seconds. The default puts K near 3e7
        counts per watt.
    """

    noise_intensity: float
    eta: float = 0.5
    wavelength: float = 1550e-9
    pulse_duration: float = 7.7e-12

    def __post_init__(self):
        if not self.noise_intensity >= 0:
            raise ValueError("noise intensity must be non-negative")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if not (self.wavelength > 0 and self.pulse_duration > 0):
            raise ValueError("wavelength and pulse duration must be positive")

    @property
    def K(self):
        """Expected photon counts per watt of incident power."""
        return self.eta * self.wavelength * self.pulse_duration / (PLANCK * LIGHT_SPEED)

    @classmethod
    def from_noise_power(cls, noise_power, area, **kw):
        """Build from total noise power (W) spread uniformly over ``area`` (m^2)."""
        return cls(noise_intensity=noise_power / area, **kw)

    def with_noise_power(self, noise_power, area):
        return ChannelParams(noise_power / area, self.eta, self.wavelength, self.pulse_duration)


def beam_radius_at(rho0, wavelength, z):
    """Beam radius after propagating ``z`` meters from a waist ``rho0``."""
    if not rho0 > 0:
        raise ValueError("beam waist must be positive")
    if z < 0:
        raise ValueError("propagation distance must be non-negative")
    return rho0 * math.hypot(1.0, wavelength * z / (math.pi * rho0 ** 2))


def interval_mass(a, b):
    """Standard normal mass on ``[a, b]``, differenced on the tail nearest zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.where(a > 0.0, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def cell_signal_flux(beam, lx, ux, ly, uy):
    """Signal power (W) collected by the rectangle(s) ``[lx, ux] x [ly, uy]``.

    Accepts scalars or arrays; returns the same shape.
    """
    r = beam.rho
    fx = interval_mass((np.asarray(lx) - beam.x0) / r, (np.asarray(ux) - beam.x0) / r)
    fy = interval_mass((np.asarray(ly) - beam.y0) / r, (np.asarray(uy) - beam.y0) / r)
    return beam.power * fx * fy


def array_signal_flux(beam, geom):
    """Vector of per-cell signal power over the array."""
    return cell_signal_flux(beam, *geom.bounds())


def cell_mean_counts(beam, chan, lx, ux, ly, uy):
    """Expected photon count ``K * (signal flux + noise_intensity * cell area)``."""
    area = (np.asarray(ux) - lx) * (np.asarray(uy) - ly)
    return chan.K * (cell_signal_flux(beam, lx, ux, ly, uy) + chan.noise_intensity * area)


def array_mean_counts(beam, chan, geom):
    """Per-cell H1 means and the (common) H0 noise mean."""
    signal = chan.K * array_signal_flux(beam, geom)
    noise = np.full(geom.n_cells, chan.K * chan.noise_intensity * geom.cell_area)
    return signal + noise, noise
