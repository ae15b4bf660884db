"""Maximum-likelihood beacon detector over the cell counts."""
from dataclasses import dataclass

import numpy as np

from .beam import array_mean_counts, array_signal_flux
from .stats import moment_summary


@dataclass(frozen=True, eq=False)
class DetectorModel:
    """Per-cell log-likelihood weights and the decision threshold.

    Attributes
    ----------
    weights : ndarray
        ``alpha_m = log1p(SNR_m)`` for the assumed beam, row-major over cells.
    threshold : float
        gamma0, the value the weighted count is compared against.
    """

    weights: np.ndarray
    threshold: float
    assumed_beam: object
    assumed_chan: object
    geometry: object


def detector_weights(geom, assumed_beam, assumed_chan):
    noise = assumed_chan.noise_intensity * geom.cell_area
    if not noise > 0:
        raise ValueError("noise intensity must be positive")
    return np.log1p(array_signal_flux(assumed_beam, geom) / noise)


def build_detector(geom, assumed_beam, assumed_chan, gamma=0.0, *, gamma0=None):
    """Detector built from the parameters the receiver believes.

    The threshold is ``gamma + K * S`` unless ``gamma0`` is given, in which
    case it is used as is.
    """
    alpha = detector_weights(geom, assumed_beam, assumed_chan)
    if gamma0 is None:
        gamma0 = gamma + assumed_chan.K * assumed_beam.power
    w = alpha.copy()
    w.flags.writeable = False
    return DetectorModel(w, float(gamma0), assumed_beam, assumed_chan, geom)


def statistic(det, z):
    """Weighted count ``sum_m z_m * alpha_m``; ``z`` may carry leading batch axes."""
    z = np.asarray(z)
    if z.shape[-1] != det.weights.shape[0]:
        raise ValueError(f"expected {det.weights.shape[0]} counts, got {z.shape[-1]}")
    if np.any(z < 0):
        raise ValueError("counts must be non-negative")
    return z @ det.weights


def decide(det, z):
    """True (signal present) iff the statistic reaches the threshold; ties count as present."""
    return statistic(det, z) >= det.threshold


def detector_moments(det, true_beam, true_chan):
    """Moments of the detector statistic when counts follow ``true_beam`` and ``true_chan``."""
    lam1, lam0 = array_mean_counts(true_beam, true_chan, det.geometry)
    return moment_summary(det.weights, lam1, lam0)
