"""Beacon acquisition with photon-counting detector arrays.

Closed-form detection probabilities, acquisition-time bounds and beam-radius
optimization, each paired with a seeded Monte Carlo check.
"""
from ._num import InfeasibleError
from .acqtime import AcqTimeModel, UncertaintyModel, acq_time_model, ccdf_TU, mean_acq_time_upper_bound, pdf_TU
from .beam import BeamParams, ChannelParams, beam_radius_at, cell_mean_counts, cell_signal_flux
from .detector import DetectorModel, build_detector, decide, detector_moments, statistic
from .geometry import ArrayGeometry, PackingCounts, cell_bounds, packing_counts
from .kernels import BACKEND
from .optimize import OptimizationProblem, minimize_rho, objective, sweep_noise
from .scan import ScanPlan, build_spiral, dwell_time, steps_per_scan
from .stats import (
    MomentSummary, calibrate_threshold, pf_scaled_poisson, pm_gaussian, pm_scaled_poisson,
    regularized_gamma_q, scan_false_alarm_bounds, scan_missed_detection_bounds,
)
from .whiten import verify_probability_preservation, whitening_transform

__version__ = "0.1.0"
